#pragma once

#include <vector>

#include "elab/modq.hpp"

namespace elab::padic {

using modq::FactoredModulus;
using modq::IntMat;
using modq::Mat;

/// d x d matrix over Z/p^m with its working precision attached.
struct PadicMat {
    u64 p = 2;
    u32 m = 1;  // entries live in Z/p^m
    Mat mat;

    PadicMat() = default;
    PadicMat(u64 prime, u32 prec, Mat matrix) : p(prime), m(prec), mat(std::move(matrix)) {}

    static PadicMat zero(u64 p, u32 m, u32 d);
    static PadicMat from_int(u64 p, u32 m, u32 d, const std::vector<i64>& entries);

    u64 modulus() const { return mat.mod; }
    /// Valuation with the working precision as +infinity sentinel.
    u32 valuation() const { return modq::vp_mat(mat, p, m); }
};

/// Minimal valuation on which the exponential series converges: 2 at p = 2,
/// 1 otherwise.
inline u32 alpha_p(u64 p) { return p == 2 ? 2 : 1; }

/// Minimal valuation for the two-term product bound: 3 at p = 2, 2 at p = 3,
/// 1 otherwise.
inline u32 beta_p(u64 p) { return p == 2 ? 3 : (p == 3 ? 2 : 1); }

/// Series truncation index: smallest N with N*alpha_p - N/(p-1) >= m, so
/// every dropped term of exp vanishes at precision m.
u32 exp_truncation_index(u64 p, u32 m);

/// exp(x) = sum x^n / n!, exact at precision m. Requires v_p(x) >= alpha_p.
PadicMat exp_trunc(const PadicMat& x);

/// log(g) = sum (-1)^(n-1) (g-1)^n / n, inverse of exp_trunc at precision m.
/// Requires v_p(g - 1) >= alpha_p.
PadicMat log_trunc(const PadicMat& g);

/// v_p(log(exp x * exp y) - x - y), sentinel = precision m.
/// Requires v_p(x), v_p(y) >= beta_p and m > v_p(x) + v_p(y).
u32 bch_defect(const PadicMat& x, const PadicMat& y);

/// a * exp(x) * a^{-1} == exp(a x a^{-1}) at working precision?
bool conj_exp_check(const IntMat& a, const PadicMat& x);

/// exp(x) mod q computed per prime power and recombined by CRT.
/// Requires rdot | x, i.e. v_p(x) >= 1 + delta_2(p) for every p | q.
Mat exp_mod_q(const IntMat& x, const FactoredModulus& q);

/// Word in the free group on s letters, stored as (letter, exponent) pairs
/// with 1-based letters; negative exponents mean inverses.
struct Word {
    std::vector<std::pair<u32, i64>> syllables;

    std::string str() const;  // e.g. "a1^6 a2^12 a1^6"
};

/// Constructive form of the scaled-sum word identity: a word w and constant D
/// with e^{D(x_1+...+x_s)} = w(e^{x_1},...,e^{x_s}) mod R^k for x_i in
/// R*gl_d, v_2(R) != 1. Implemented for k <= 3.
struct SynthesizedWord {
    Word w;
    u64 D = 1;
    u32 k = 1, s = 1;
};
SynthesizedWord word_synthesize(u32 s, u32 k);

/// Samples x_i with v_p(x_i) >= r_val and checks the congruence mod R^k.
/// Returns the minimum observed defect valuation (sentinel = precision used).
struct WordVerification {
    bool ok = false;
    u32 min_defect = 0;      // min over trials of v_p(lhs - rhs)
    u32 required = 0;        // k * r_val
    u32 precision = 0;       // sentinel value
    u64 trials = 0;
};
WordVerification verify_word(const SynthesizedWord& sw, u64 p, u32 r_val, u32 d, u64 trials,
                             u64 seed);

}  // namespace elab::padic
