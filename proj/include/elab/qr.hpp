#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elab/grpenum.hpp"

namespace elab::qr {

using grp::GeneratorSet;
using grp::GroupTable;

/// Conjugacy class partition with deterministic least-ordinal representatives.
struct ClassData {
    std::vector<u32> class_of;            // per element ordinal
    std::vector<std::vector<u32>> classes;  // members, ascending ordinals
    std::vector<u32> representatives;     // least ordinal per class
    std::vector<u64> sizes;
};

ClassData conjugacy_classes(const GroupTable& T, u64 cap = 100000);

/// Degrees of all complex irreducibles via the class-algebra method over a
/// finite field F_l with l = 1 mod exponent(T) (Dixon's choice). Exactness is
/// validated by sum d^2 = |T| and degree count = class count.
std::vector<u64> character_degrees(const GroupTable& T, u64 cap = 10000);

/// Smallest degree > 1 when the group is perfect, else the smallest
/// nontrivial degree (possibly 1). Trivial group reports 1.
u64 min_degree(const GroupTable& T);
u64 min_degree_from(const std::vector<u64>& degrees);

struct GowersResult {
    bool covered = false;
    u64 product_size = 0;
    bool hypothesis_holds = false;  // |A1||A2||A3| * m > |H|^3
};

/// Computes A1 A2 A3 exactly and reports coverage; with the size hypothesis
/// satisfied a non-covering triple contradicts the quasi-randomness bound and
/// callers must escalate it.
GowersResult gowers_cover_check(const std::vector<u32>& A1, const std::vector<u32>& A2,
                                const std::vector<u32>& A3, const GroupTable& T, u64 m);

struct IndexProbe {
    std::optional<u64> min_index;  // smallest proper-subgroup index observed
    u64 subgroups_seen = 0;
    u64 trials = 0;
};

/// Randomized probe: closes random 2-element tuples and tracks the smallest
/// proper index found. An upper bound on the true minimum, never the minimum.
IndexProbe min_proper_index_probe(const GroupTable& T, u64 trials, u64 seed);

/// All 2-element tuples (exhaustive variant used by the test suite).
IndexProbe min_proper_index_pairs(const GroupTable& T);

struct NonsplitResult {
    bool found = false;
    u64 trials_used = 0;
    std::optional<modq::Mat> witness;  // z = psi(xy) psi(y)^{-1} psi(x)^{-1} mod p^2
    u32 x = 0, y = 0;                  // ordinals mod p of the witnessing pair
};

/// Searches random pairs for a failure of the BFS-shortest-word section of
/// pi_p to be multiplicative mod p^2. Witness z lies in ker pi_p \ ker pi_p2.
NonsplitResult nonsplit_probe(const GeneratorSet& S, u64 p, u64 trials, u64 seed, u64 cap);

}  // namespace elab::qr
