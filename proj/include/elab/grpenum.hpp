#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elab/modq.hpp"

namespace elab::grp {

using modq::FactoredModulus;
using modq::IntMat;
using modq::Mat;

/// Finite generator set in SL_d(Z), each matrix of integer determinant 1.
/// File format: first line "d <dimension>", then one matrix per line as
/// d*d space-separated integers, row-major; lines starting with '#' skipped.
struct GeneratorSet {
    u32 d = 0;
    std::vector<IntMat> mats;
    bool symmetric_closure = true;

    /// Generators actually used: inverses (integer adjugates) appended when
    /// the closure flag is set and missing from the list.
    std::vector<IntMat> effective() const;
};

GeneratorSet load_generators(const std::string& path, bool symmetric_closure = true);
GeneratorSet parse_generators(const std::string& text, bool symmetric_closure = true);
GeneratorSet standard_sl2();  // A = (1 1; 0 1), B = (1 0; 1 1)

/// The enumerated finite group pi_q(Gamma), closed under the generator set.
///
/// Canonical order: BFS discovery order from the identity under left
/// multiplication; ties within a layer broken by the canonical element key.
/// Canonical key = reduced entries row-major, each entry as 8 bytes
/// big-endian, so byte-lexicographic order equals numeric entry order.
class GroupTable {
  public:
    u32 d = 0;
    FactoredModulus q;
    std::vector<Mat> gens;                     // reduced effective generators
    std::vector<std::vector<u32>> gen_action;  // per generator: i -> idx(g * elem_i)
    std::vector<u32> word_length;              // exact Cayley distance from identity

    size_t size() const { return n_; }
    const u64* entries(u32 idx) const { return flat_.data() + size_t(idx) * d * d; }
    Mat element(u32 idx) const;
    std::vector<unsigned char> canonical_key(u32 idx) const;

    std::optional<u32> index_of(const u64* entries) const;
    std::optional<u32> index_of(const Mat& m) const;

    u32 mul(u32 i, u32 j) const;  // index of elem_i * elem_j
    u32 inv(u32 i) const;         // index of elem_i^{-1} (memoized table)

    /// Test/diagnostic constructor: wraps an explicit element list (identity
    /// first, closed under the given generator action) without the det-1 tag.
    static GroupTable from_elements(u32 d, u64 mod, const std::vector<Mat>& elems,
                                    const std::vector<Mat>& gens);

  private:
    friend GroupTable enumerate(const GeneratorSet&, const FactoredModulus&, u64);
    void build_index();

    size_t n_ = 0;
    std::vector<u64> flat_;  // element entries, stride d*d
    // packed-key index when d*d*bits(mod-1) <= 64, byte-key index otherwise
    struct Index;
    std::shared_ptr<Index> index_;
    mutable std::vector<u32> inv_;  // lazily built, guarded by inv_built_
    mutable bool inv_built_ = false;
};

/// BFS closure of {identity} under left multiplication by S mod q.
/// Throws cap_exceeded (naming the reached size) past `cap` elements.
GroupTable enumerate(const GeneratorSet& S, const FactoredModulus& q, u64 cap);

/// Ordinal -> compact index of the mod-q' image, plus the image count.
struct Reduction {
    std::vector<u32> map;  // per table ordinal
    u32 image_count = 0;
};
Reduction reduce_table(const GroupTable& T, u64 q_prime);

/// [pi_q(Gamma) : ker(pi_q -> pi_q')] = |pi_q'(Gamma)| for q' | q.
u64 congruence_index(const GroupTable& T, u64 q_prime);

/// CRT structure check for a coprime split q = q1 * q2.
struct CrtResult {
    bool ok = false;
    u64 size_q1 = 0, size_q2 = 0;
    std::optional<std::pair<u32, u32>> collision;  // ordinals with equal images
};
CrtResult crt_check(const GroupTable& T, u64 q1, u64 q2);

/// Fiber regularization over a product of prime quotients.
/// Input tuples are coordinate vectors (values < factor_sizes[i]); output is
/// the regular subset plus the exact fiber counts K_i. Guarantees
/// |A'| >= |A| / prod_i (2 ln factor_sizes[i]) for factor sizes >= 3.
struct Regularized {
    std::vector<std::vector<u32>> subset;
    std::vector<u64> fiber_counts;
};
Regularized regularize(std::vector<std::vector<u32>> tuples, const std::vector<u64>& factor_sizes);

/// True iff the subgroup generated by {g : (g-1)^d = 0 mod p} is all of T.
/// Requires q prime and p > d.
bool unipotent_span_check(const GroupTable& T);

/// Checks that ker(pi_{p^2} -> pi_p) is 1 + p * g(F_p) with additive
/// structure, and that conjugation matches the adjoint action mod p^2.
struct LieKernelReport {
    bool ok = false;
    u64 kernel_size = 0;
    std::optional<Mat> witness;
    std::string detail;
};
LieKernelReport lie_kernel_check(const GeneratorSet& S, u64 p, u64 cap);

}  // namespace elab::grp
