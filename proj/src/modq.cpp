#include "elab/modq.hpp"

#include <algorithm>
#include <cmath>

namespace elab::modq {

namespace {
constexpr u64 kModCap = u64(1) << 62;

void check_pm_cap(u64 p, u32 m) {
    u128 v = 1;
    for (u32 i = 0; i < m; ++i) {
        v *= p;
        if (v >= kModCap) throw cap_exceeded("prime power p^m exceeds 2^62");
    }
}
}  // namespace

FactoredModulus factorize(u64 q) {
    if (q == 0) throw domain_error("factorize: q = 0 rejected");
    FactoredModulus fm;
    fm.q = q;
    if (q >= kModCap) throw cap_exceeded("modulus exceeds 2^62");
    u64 n = q;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        u32 m = 0;
        while (n % p == 0) {
            n /= p;
            ++m;
        }
        fm.factors.emplace_back(p, m);
        fm.radical *= p;
    }
    if (n > 1) {
        fm.factors.emplace_back(n, 1);
        fm.radical *= n;
    }
    for (const auto& [p, m] : fm.factors) check_pm_cap(p, m);
    return fm;
}

std::pair<u64, u64> restricted_moduli(const FactoredModulus& fm, const std::vector<u64>& primes) {
    u64 qI = 1, rI = 1;
    for (u64 p : primes) {
        auto m = fm.exponent_of(p);
        if (!m) throw domain_error("restricted_moduli: prime not a factor of q");
        qI = checked_mul(qI, checked_pow(p, *m));
        rI = checked_mul(rI, p);
    }
    return {qI, rI};
}

u64 delta_modulus(const FactoredModulus& fm, u64 num, u64 den) {
    if (den == 0 || num == 0 || num >= den)
        throw domain_error("delta_modulus: delta must lie in (0,1)");
    u64 out = 1;
    for (const auto& [p, m] : fm.factors) {
        u64 e = (num * u64(m)) / den;  // floor(delta * m_p)
        out = checked_mul(out, checked_pow(p, u32(e)));
    }
    return out;
}

u64 rdot(const FactoredModulus& fm) {
    for (const auto& [p, m] : fm.factors)
        if (p == 2 && m == 1)
            throw domain_error("rdot: unsupported modulus (m_2 = 1)");
    u64 out = 1;
    for (const auto& [p, m] : fm.factors) out = checked_mul(out, checked_pow(p, 1 + delta2(p)));
    return out;
}

Mat Mat::identity(u32 d, u64 mod) {
    Mat m(d, mod);
    for (u32 i = 0; i < d; ++i) m.at(i, i) = 1 % mod;
    return m;
}

Mat Mat::from_int(u32 d, u64 mod, const std::vector<i64>& entries) {
    if (entries.size() != size_t(d) * d) throw domain_error("Mat::from_int: wrong entry count");
    Mat m(d, mod);
    for (size_t k = 0; k < entries.size(); ++k) {
        i64 v = entries[k] % i64(mod);
        if (v < 0) v += i64(mod);
        m.a[k] = u64(v);
    }
    return m;
}

bool Mat::is_identity() const { return *this == identity(d, mod); }

Mat mat_add(const Mat& x, const Mat& y) {
    Mat r(x.d, x.mod);
    for (size_t k = 0; k < x.a.size(); ++k) r.a[k] = addmod(x.a[k], y.a[k], x.mod);
    return r;
}

Mat mat_sub(const Mat& x, const Mat& y) {
    Mat r(x.d, x.mod);
    for (size_t k = 0; k < x.a.size(); ++k) r.a[k] = submod(x.a[k], y.a[k], x.mod);
    return r;
}

void mat_mul_flat(u32 d, u64 m, const u64* x, const u64* y, u64* out) {
    for (u32 i = 0; i < d; ++i)
        for (u32 j = 0; j < d; ++j) {
            u128 acc = 0;
            for (u32 k = 0; k < d; ++k) acc += u128(x[size_t(i) * d + k]) * y[size_t(k) * d + j];
            out[size_t(i) * d + j] = u64(acc % m);
        }
}

Mat mat_mul(const Mat& x, const Mat& y) {
    Mat r(x.d, x.mod);
    mat_mul_flat(x.d, x.mod, x.a.data(), y.a.data(), r.a.data());
    return r;
}

Mat mat_scale(const Mat& x, u64 c) {
    Mat r(x.d, x.mod);
    c %= x.mod;
    for (size_t k = 0; k < x.a.size(); ++k) r.a[k] = mulmod(x.a[k], c, x.mod);
    return r;
}

Mat mat_pow(const Mat& x, u64 e) {
    Mat r = Mat::identity(x.d, x.mod);
    Mat b = x;
    while (e) {
        if (e & 1) r = mat_mul(r, b);
        b = mat_mul(b, b);
        e >>= 1;
    }
    return r;
}

Mat mat_reduce(const Mat& x, u64 new_mod) {
    if (new_mod == 0 || x.mod % new_mod != 0)
        throw domain_error("mat_reduce: new modulus must divide the old one");
    Mat r(x.d, new_mod);
    for (size_t k = 0; k < x.a.size(); ++k) r.a[k] = x.a[k] % new_mod;
    return r;
}

namespace {
// cofactor expansion; d <= 6 keeps this cheap
u64 det_rec(const Mat& x, std::vector<u32>& cols, u32 row) {
    if (cols.size() == 1) return x.at(row, cols[0]);
    u64 acc = 0;
    bool neg = false;
    for (size_t c = 0; c < cols.size(); ++c) {
        u32 col = cols[c];
        cols.erase(cols.begin() + c);
        u64 sub = det_rec(x, cols, row + 1);
        cols.insert(cols.begin() + c, col);
        u64 term = mulmod(x.at(row, col), sub, x.mod);
        acc = neg ? submod(acc, term, x.mod) : addmod(acc, term, x.mod);
        neg = !neg;
    }
    return acc;
}
}  // namespace

u64 mat_det(const Mat& x) {
    std::vector<u32> cols(x.d);
    for (u32 i = 0; i < x.d; ++i) cols[i] = i;
    return det_rec(x, cols, 0);
}

Mat mat_inverse(const Mat& x) {
    u64 det = mat_det(x);
    u64 det_inv = invmod(det, x.mod);
    Mat adj(x.d, x.mod);
    if (x.d == 1) {
        adj.at(0, 0) = 1 % x.mod;
    } else {
        for (u32 i = 0; i < x.d; ++i)
            for (u32 j = 0; j < x.d; ++j) {
                // cofactor C_ji for the adjugate
                Mat minor(x.d - 1, x.mod);
                for (u32 r = 0, rr = 0; r < x.d; ++r) {
                    if (r == j) continue;
                    for (u32 c = 0, cc = 0; c < x.d; ++c) {
                        if (c == i) continue;
                        minor.at(rr, cc) = x.at(r, c);
                        ++cc;
                    }
                    ++rr;
                }
                u64 m = mat_det(minor);
                if ((i + j) & 1) m = submod(0, m, x.mod);
                adj.at(i, j) = m;
            }
    }
    return mat_scale(adj, det_inv);
}

u32 vp_scalar(u64 x, u64 p, u32 cap) {
    if (x == 0) return cap;
    u32 v = 0;
    while (v < cap && x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

u32 vp_mat(const Mat& x, u64 p, u32 cap) {
    u32 best = cap;
    for (u64 e : x.a) best = std::min(best, vp_scalar(e, p, cap));
    return best;
}

u64 gcd_shift(const FactoredModulus& fm, const Mat& g) {
    Mat shifted = mat_sub(g, Mat::identity(g.d, g.mod));
    u64 out = 1;
    for (const auto& [p, m] : fm.factors) {
        u32 v = vp_mat(shifted, p, m);
        out = checked_mul(out, checked_pow(p, v));
    }
    return out;
}

IntMat IntMat::identity(u32 d) {
    IntMat m(d);
    for (u32 i = 0; i < d; ++i) m.at(i, i) = 1;
    return m;
}

IntMat int_mul(const IntMat& x, const IntMat& y) {
    IntMat r(x.d);
    for (u32 i = 0; i < x.d; ++i)
        for (u32 j = 0; j < x.d; ++j) {
            i128 acc = 0;
            for (u32 k = 0; k < x.d; ++k) acc += i128(x.at(i, k)) * y.at(k, j);
            if (acc > i128(INT64_MAX) || acc < i128(INT64_MIN))
                throw cap_exceeded("integer matrix product overflows 64 bits");
            r.at(i, j) = i64(acc);
        }
    return r;
}

namespace {
i128 int_det_rec(const IntMat& x, std::vector<u32>& cols, u32 row) {
    if (cols.size() == 1) return x.at(row, cols[0]);
    i128 acc = 0;
    i64 sign = 1;
    for (size_t c = 0; c < cols.size(); ++c) {
        u32 col = cols[c];
        cols.erase(cols.begin() + c);
        acc += sign * i128(x.at(row, col)) * int_det_rec(x, cols, row + 1);
        cols.insert(cols.begin() + c, col);
        sign = -sign;
    }
    return acc;
}
}  // namespace

i64 int_det(const IntMat& x) {
    std::vector<u32> cols(x.d);
    for (u32 i = 0; i < x.d; ++i) cols[i] = i;
    i128 det = int_det_rec(x, cols, 0);
    if (det > i128(INT64_MAX) || det < i128(INT64_MIN))
        throw cap_exceeded("integer determinant overflows 64 bits");
    return i64(det);
}

IntMat int_adjugate(const IntMat& x) {
    IntMat adj(x.d);
    if (x.d == 1) {
        adj.at(0, 0) = 1;
        return adj;
    }
    for (u32 i = 0; i < x.d; ++i)
        for (u32 j = 0; j < x.d; ++j) {
            IntMat minor(x.d - 1);
            for (u32 r = 0, rr = 0; r < x.d; ++r) {
                if (r == j) continue;
                for (u32 c = 0, cc = 0; c < x.d; ++c) {
                    if (c == i) continue;
                    minor.at(rr, cc) = x.at(r, c);
                    ++cc;
                }
                ++rr;
            }
            i64 m = int_det(minor);
            adj.at(i, j) = ((i + j) & 1) ? -m : m;
        }
    return adj;
}

u64 int_row_sum_norm(const IntMat& x) {
    u64 best = 0;
    for (u32 i = 0; i < x.d; ++i) {
        u64 s = 0;
        for (u32 j = 0; j < x.d; ++j) s += u64(std::llabs(x.at(i, j)));
        best = std::max(best, s);
    }
    return best;
}

Mat reduce_mod(const IntMat& x, u64 mod) {
    Mat r(x.d, mod);
    for (size_t k = 0; k < x.a.size(); ++k) {
        i64 v = x.a[k] % i64(mod);
        if (v < 0) v += i64(mod);
        r.a[k] = u64(v);
    }
    return r;
}

}  // namespace elab::modq
