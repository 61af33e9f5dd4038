#pragma once

#include <string>
#include <vector>

#include "elab/grpenum.hpp"

namespace elab::walk {

using grp::GeneratorSet;
using grp::GroupTable;

/// Finitely supported probability measure on group-table ordinals.
/// Exact mode stores weights as numerator/den with a common denominator;
/// floating mode stores doubles. Atoms are kept sorted by ordinal so every
/// accumulation order is deterministic.
struct SparseMeasure {
    bool exact = true;
    u64 den = 1;
    std::vector<u32> idx;
    std::vector<u64> num;     // exact mode
    std::vector<double> w;    // floating mode

    size_t support_size() const { return idx.size(); }
    double weight_at(u32 ordinal) const;  // 0 when absent

    static SparseMeasure delta(u32 ordinal);
    static SparseMeasure uniform_on(std::vector<u32> ordinals);

    void to_float();  // drop exactness in place
};

/// Default exact-mode support bound; beyond it convolution switches to
/// doubles. Callers needing rational precision on bigger supports pass a
/// larger cap explicitly.
constexpr size_t kDefaultExactCap = size_t(1) << 16;

/// (mu*nu)(x) = sum_g mu(g) nu(g^{-1} x); associative, mass preserving.
SparseMeasure convolve(const SparseMeasure& mu, const SparseMeasure& nu, const GroupTable& T,
                       size_t exact_cap = kDefaultExactCap);

bool is_symmetric(const SparseMeasure& mu, const GroupTable& T);

/// Iterated self-convolution with the right actions of the base atoms
/// precomputed once.
class PowerWalker {
  public:
    PowerWalker(const GroupTable& T, const SparseMeasure& base,
                size_t exact_cap = kDefaultExactCap);
    void step();                      // current <- current * base
    const SparseMeasure& current() const { return cur_; }

  private:
    const GroupTable& T_;
    SparseMeasure base_;
    SparseMeasure cur_;
    std::vector<std::vector<u32>> right_action_;  // per base atom
    size_t exact_cap_;
};

/// Exact value of ||mu * P_{q'}||_2^2 divided by the group order:
/// flatness^2 = image_count * sq_num / den^2.
struct FlatnessSq {
    bool exact = false;
    u128 sq_num = 0;  // sum over image classes of (pushed numerator)^2
    u64 den = 1;
    u64 image_count = 0;
    double value = 0;  // flatness (not squared), always filled
};

FlatnessSq flatness_sq(const SparseMeasure& mu, const GroupTable& T, u64 q_prime);

/// ||mu * P_{q'}||_2: 1 for uniform pushforward, sqrt(|pi_q'|) for a point mass.
double flatness(const SparseMeasure& mu, const GroupTable& T, u64 q_prime);

/// Exact comparison flatness(a) <= flatness(b) at equal q' (exact mode only).
bool flatness_le(const FlatnessSq& a, const FlatnessSq& b);

struct CurveRow {
    u64 n = 0;
    double flatness = 0;
    double ratio = 0;  // flatness(2n) / flatness(n)
};
struct FlatteningCurve {
    std::vector<CurveRow> rows;
    i64 crossing_n = -1;  // first n with flatness < q'^tau, -1 if none
    bool exact = false;
};

/// Flatness of mu^{*n} for n = 0..n_max plus doubling ratios (powers up to
/// 2*n_max are computed). tau supplies the q'^tau crossing threshold.
FlatteningCurve flattening_curve(const SparseMeasure& mu, const GroupTable& T, u64 q_prime,
                                 u32 n_max, double tau, size_t exact_cap = kDefaultExactCap);

/// Measure on words in the generators, retaining pre-reduction words.
/// File format: one line per atom, "weight w1 w2 ... wL" with 1-based
/// generator indices, negative index = inverse; weights normalized on load.
struct WordMeasure {
    GeneratorSet S;
    std::vector<double> weights;                 // normalized
    std::vector<std::vector<int>> words;
    bool integer_weights = true;                 // exact path available
    std::vector<u64> int_weights;                // pre-normalization

    static WordMeasure uniform_on_generators(const GeneratorSet& S);
};

WordMeasure load_measure(const std::string& path, const GeneratorSet& S);
WordMeasure parse_measure(const std::string& text, const GeneratorSet& S);

/// Push a word measure onto a group table mod q.
SparseMeasure push_to_table(const WordMeasure& wm, const GroupTable& T);

struct DiophResult {
    double mass = 0;              // mu^{*n}(Omega_q)
    bool mass_exact = false;
    bool mass_computed = false;   // false if the table exceeded its cap
    bool exact_support = false;   // ball of radius 2m meets Omega_q only at 1
    bool support_partial = false; // node cap hit before radius exhausted
    u32 radius = 0;               // 2m
    u64 ball_size = 0;            // distinct integer matrices in the ball
    u64 norm_bound = 1;           // M = max row-sum norm over Supp(mu)
};

/// Almost-diophantine diagnostics: the mass mu^{*n}(Omega_q) on pi_q and the
/// exact-support check over the integer word ball of radius
/// 2*floor(log q / (2 log M)).
DiophResult almost_diophantine(const WordMeasure& wm, u64 q, u32 n, u64 group_cap,
                               u64 node_cap, size_t exact_cap = kDefaultExactCap);

struct ApproxStats {
    double tripling = 0;   // |A A A| / |A|
    u64 k_cover = 0;       // greedy |X| with AA <= AX
    u64 size_a = 0, size_aa = 0, size_aaa = 0;
};

/// Tripling and covering statistics of a symmetric set containing 1.
ApproxStats approx_group_stats(const std::vector<u32>& A, const GroupTable& T);

}  // namespace elab::walk
