#pragma once

#include <optional>
#include <vector>

#include "elab/common.hpp"

namespace elab::modq {

/// A modulus q together with its prime factorization and radical.
/// Invariants: q = prod p^{m_p}, primes strictly increasing, exponents >= 1,
/// radical = prod p. q = 1 has an empty factor list and radical 1.
struct FactoredModulus {
    u64 q = 1;
    std::vector<std::pair<u64, u32>> factors;  // (p, m_p)
    u64 radical = 1;

    std::optional<u32> exponent_of(u64 p) const {
        for (const auto& [pp, m] : factors)
            if (pp == p) return m;
        return std::nullopt;
    }
};

/// Trial-division factorization. Rejects q = 0. Every (p, m) must satisfy
/// p^m < 2^62 so two reduced entries multiply without wrapping a u128 sum.
FactoredModulus factorize(u64 q);

/// q_I = prod_{p in I} p^{m_p} and r_I = prod_{p in I} p.
std::pair<u64, u64> restricted_moduli(const FactoredModulus& fm, const std::vector<u64>& primes);

/// q_delta = prod p^{floor(delta * m_p)} with delta = num/den in (0,1).
u64 delta_modulus(const FactoredModulus& fm, u64 num, u64 den);

/// rdot = prod_{p|q} p^{1+delta_2(p)}. Requires m_2 != 1; the modulus is
/// rejected outright rather than silently lifted to m_2 = 2.
u64 rdot(const FactoredModulus& fm);

inline u32 delta2(u64 p) { return p == 2 ? 1 : 0; }

/// d x d matrix with entries reduced mod `mod` (mod >= 1, mod < 2^62).
struct Mat {
    u32 d = 0;
    u64 mod = 1;
    std::vector<u64> a;  // row-major, size d*d

    Mat() = default;
    Mat(u32 dim, u64 m) : d(dim), mod(m), a(size_t(dim) * dim, 0) {}

    u64& at(u32 i, u32 j) { return a[size_t(i) * d + j]; }
    u64 at(u32 i, u32 j) const { return a[size_t(i) * d + j]; }

    static Mat identity(u32 d, u64 mod);
    static Mat from_int(u32 d, u64 mod, const std::vector<i64>& entries);

    bool is_identity() const;
    bool operator==(const Mat& o) const = default;
};

Mat mat_add(const Mat& x, const Mat& y);
Mat mat_sub(const Mat& x, const Mat& y);
Mat mat_mul(const Mat& x, const Mat& y);
Mat mat_scale(const Mat& x, u64 c);
Mat mat_pow(const Mat& x, u64 e);
Mat mat_reduce(const Mat& x, u64 new_mod);  // new_mod must divide x.mod
u64 mat_det(const Mat& x);
Mat mat_inverse(const Mat& x);  // adjugate * det^{-1}; det must be a unit

// Flat-buffer product for hot loops: out = x * y, all length d*d, mod m.
void mat_mul_flat(u32 d, u64 m, const u64* x, const u64* y, u64* out);

/// Entry-wise p-adic valuation of a matrix, capped at `cap`. Values >= cap
/// report the cap as a +infinity sentinel; callers must branch on it, never
/// compare it arithmetically. The zero matrix reports the sentinel.
u32 vp_mat(const Mat& x, u64 p, u32 cap);

/// Valuation of a single residue, same sentinel contract.
u32 vp_scalar(u64 x, u64 p, u32 cap);

/// pgcd(q, g - 1) = prod p^{min(m_p, v_p(g-1))}. Equals q iff g = 1 mod q.
u64 gcd_shift(const FactoredModulus& fm, const Mat& g);

/// Integer (pre-reduction) d x d matrices, overflow-checked arithmetic.
struct IntMat {
    u32 d = 0;
    std::vector<i64> a;

    IntMat() = default;
    explicit IntMat(u32 dim) : d(dim), a(size_t(dim) * dim, 0) {}

    i64& at(u32 i, u32 j) { return a[size_t(i) * d + j]; }
    i64 at(u32 i, u32 j) const { return a[size_t(i) * d + j]; }

    static IntMat identity(u32 d);
    bool operator==(const IntMat& o) const = default;
};

IntMat int_mul(const IntMat& x, const IntMat& y);
i64 int_det(const IntMat& x);
IntMat int_adjugate(const IntMat& x);  // inverse when det = 1
u64 int_row_sum_norm(const IntMat& x);
Mat reduce_mod(const IntMat& x, u64 mod);

}  // namespace elab::modq
