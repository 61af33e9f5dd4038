#pragma once

#include <complex>
#include <vector>

#include "elab/walk.hpp"

namespace elab::fourier {

using walk::WordMeasure;

/// Probability measure on (Z/qZ)^dim, stored dense; the state count q^dim is
/// capped (default 2^26) before allocation.
struct TorusMeasure {
    u64 q = 1;
    u32 dim = 1;
    std::vector<double> w;  // size q^dim, index = sum coord_i * q^i

    size_t states() const { return w.size(); }
    u64 index_of(const std::vector<u64>& v) const;
    std::vector<u64> vector_of(u64 index) const;

    static TorusMeasure delta(u64 q, u32 dim, const std::vector<u64>& v);
};

constexpr u64 kDefaultStateCap = u64(1) << 26;

u64 checked_states(u64 q, u32 dim, u64 cap);

/// Law of g_n ... g_1 v mod q under mu^{*n}, by exact dynamic programming
/// over (Z/qZ)^dim states. Requires v != 0 mod q.
TorusMeasure push_linear(const WordMeasure& mu, const std::vector<i64>& v, u64 q, u32 n,
                         u64 state_cap = kDefaultStateCap);

/// Monte-Carlo estimate of the same law (for states beyond the DP cap and as
/// a sampling oracle in tests).
TorusMeasure push_linear_sampled(const WordMeasure& mu, const std::vector<i64>& v, u64 q, u32 n,
                                 u64 samples, u64 seed);

/// nu_hat(b) = sum_x nu(x) e^{2 pi i <b,x> / q}; |result| <= 1, b = 0 -> 1.
std::complex<double> fourier_coeff(const TorusMeasure& nu, const std::vector<i64>& b);

/// All coefficients at once via axis-by-axis DFT; index layout as TorusMeasure.
std::vector<std::complex<double>> full_spectrum(const TorusMeasure& nu);

struct DecayBucket {
    u64 s = 1;            // q / gcd(q, b)
    double max_abs = 0;   // max |nu_hat(b)| over the bucket
    u64 count = 0;        // number of frequencies in the bucket
};
struct DecayProfile {
    std::vector<DecayBucket> buckets;  // ascending s
    double tau_hat = 0;                // fitted decay exponent over s > 1
    bool tau_defined = false;          // false => +infinity sentinel (all-zero buckets)
};

/// Buckets b by s = q/gcd(q,b), reports per-bucket maxima and the least
/// squares slope of log max|coeff| against log s over buckets with s > 1.
DecayProfile decay_profile(const TorusMeasure& nu);

/// Exact cardinality of the C-fold sumset of A*v mod q, by iterated boolean
/// circular convolution (FFT when q is a power of two, naive otherwise).
u64 sumset_count(const std::vector<u32>& A, const grp::GroupTable& T, const std::vector<i64>& v,
                 u64 q, u32 C, u64 state_cap = kDefaultStateCap);

struct OrbitCount {
    u64 count = 0;           // N(Pi_C iota(A) g, q_I)
    double benchmark = 0;    // (q_I / gcd(q_I, g-1))^dim_G
    bool precondition_ok = true;
};

/// Distinct residues mod q_I of C-fold products of conjugates a g a^{-1}.
/// The valuation precondition v_p(g-1) >= max(1+delta_2(p), floor(delta m_p))
/// is checked and reported; the count is computed regardless.
OrbitCount adjoint_orbit_count(const std::vector<u32>& A, const grp::GroupTable& T, u32 g_idx,
                               u64 q_I, u32 C, u32 dim_G, double delta, u64 node_cap);

}  // namespace elab::fourier
