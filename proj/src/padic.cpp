#include "elab/padic.hpp"

#include <algorithm>
#include <cmath>

namespace elab::padic {

PadicMat PadicMat::zero(u64 p, u32 m, u32 d) {
    return PadicMat(p, m, Mat(d, checked_pow(p, m)));
}

PadicMat PadicMat::from_int(u64 p, u32 m, u32 d, const std::vector<i64>& entries) {
    return PadicMat(p, m, Mat::from_int(d, checked_pow(p, m), entries));
}

u32 exp_truncation_index(u64 p, u32 m) {
    u32 alpha = alpha_p(p);
    for (u32 n = 1;; ++n) {
        // n*alpha - n/(p-1) >= m, compared over the common denominator p-1
        if (i128(n) * alpha * i128(p - 1) - i128(n) >= i128(m) * i128(p - 1)) return n;
    }
}

namespace {

u64 legendre_vfac(u64 n, u64 p) {
    u64 v = 0;
    for (u64 pk = p; pk <= n; pk *= p) {
        v += n / pk;
        if (pk > n / p) break;
    }
    return v;
}

// Divide every entry by p^e; entries must be divisible (guaranteed by the
// series valuations). The result is well-defined mod p^{M-e} >= p^m.
void div_pow_inplace(Mat& m, u64 p, u64 e) {
    u64 pe = 1;
    for (u64 i = 0; i < e; ++i) pe *= p;
    for (u64& v : m.a) v /= pe;
}

}  // namespace

PadicMat exp_trunc(const PadicMat& x) {
    const u64 p = x.p;
    const u32 m = x.m;
    const u32 alpha = alpha_p(p);
    if (x.valuation() < alpha) throw domain_error("exp_trunc: v_p(x) below alpha_p");

    const u32 N = exp_truncation_index(p, m);
    const u64 vfac_max = legendre_vfac(N > 0 ? N - 1 : 0, p);
    const u64 work_mod = checked_pow(p, m + u32(vfac_max));

    Mat xw(x.mat.d, work_mod);
    std::copy(x.mat.a.begin(), x.mat.a.end(), xw.a.begin());

    Mat acc = Mat::identity(x.mat.d, work_mod);
    Mat xp = Mat::identity(x.mat.d, work_mod);
    u64 vfac = 0;
    u64 unit_fact = 1;  // unit part of n! mod work_mod
    for (u32 n = 1; n < N; ++n) {
        xp = mat_mul(xp, xw);
        u64 nn = n;
        while (nn % p == 0) {
            nn /= p;
            ++vfac;
        }
        unit_fact = mulmod(unit_fact, nn % work_mod, work_mod);
        Mat term = mat_scale(xp, invmod(unit_fact, work_mod));
        div_pow_inplace(term, p, vfac);
        acc = mat_add(acc, term);
    }
    return PadicMat(p, m, modq::mat_reduce(acc, checked_pow(p, m)));
}

PadicMat log_trunc(const PadicMat& g) {
    const u64 p = g.p;
    const u32 m = g.m;
    const u32 alpha = alpha_p(p);
    Mat y = mat_sub(g.mat, Mat::identity(g.mat.d, g.modulus()));
    if (modq::vp_mat(y, p, m) < alpha) throw domain_error("log_trunc: v_p(g-1) below alpha_p");

    // smallest N with n*alpha - log_p(n) >= m for all n >= N
    const double logp = std::log(double(p));
    u32 N = 1;
    while (double(N) * alpha - std::log(double(N)) / logp < double(m)) ++N;

    u64 maxdiv = 0;
    for (u64 pk = p; pk < N; pk *= p) ++maxdiv;
    const u64 work_mod = checked_pow(p, m + u32(maxdiv));

    Mat yw(y.d, work_mod);
    std::copy(y.a.begin(), y.a.end(), yw.a.begin());

    Mat acc(y.d, work_mod);
    Mat yp = Mat::identity(y.d, work_mod);
    for (u32 n = 1; n < N; ++n) {
        yp = mat_mul(yp, yw);
        u64 nn = n, e = 0;
        while (nn % p == 0) {
            nn /= p;
            ++e;
        }
        Mat term = mat_scale(yp, invmod(nn % work_mod, work_mod));
        div_pow_inplace(term, p, e);
        acc = (n % 2 == 1) ? mat_add(acc, term) : mat_sub(acc, term);
    }
    return PadicMat(p, m, modq::mat_reduce(acc, checked_pow(p, m)));
}

u32 bch_defect(const PadicMat& x, const PadicMat& y) {
    const u64 p = x.p;
    const u32 m = x.m;
    const u32 beta = beta_p(p);
    const u32 vx = x.valuation(), vy = y.valuation();
    if (vx < beta || vy < beta) throw domain_error("bch_defect: v_p below beta_p");
    if (m <= vx + vy) throw domain_error("bch_defect: precision must exceed v_p(x)+v_p(y)");
    PadicMat prod(p, m, mat_mul(exp_trunc(x).mat, exp_trunc(y).mat));
    Mat z = log_trunc(prod).mat;
    Mat diff = mat_sub(mat_sub(z, x.mat), y.mat);
    return modq::vp_mat(diff, p, m);
}

bool conj_exp_check(const IntMat& a, const PadicMat& x) {
    if (modq::int_det(a) != 1) throw domain_error("conj_exp_check: det(a) != 1");
    Mat am = modq::reduce_mod(a, x.modulus());
    Mat ainv = modq::reduce_mod(modq::int_adjugate(a), x.modulus());
    Mat lhs = mat_mul(mat_mul(am, exp_trunc(x).mat), ainv);
    PadicMat conj(x.p, x.m, mat_mul(mat_mul(am, x.mat), ainv));
    return lhs == exp_trunc(conj).mat;
}

Mat exp_mod_q(const IntMat& x, const FactoredModulus& q) {
    modq::rdot(q);  // rejects m_2 = 1
    std::vector<Mat> parts;
    for (const auto& [p, mp] : q.factors) {
        Mat xp = modq::reduce_mod(x, checked_pow(p, mp));
        u32 need = 1 + modq::delta2(p);
        if (modq::vp_mat(xp, p, mp) < std::min(need, mp))
            throw domain_error("exp_mod_q: x not divisible by p^{1+delta_2(p)} at p = " +
                               std::to_string(p));
        parts.push_back(exp_trunc(PadicMat(p, mp, xp)).mat);
    }
    // CRT recombination, entry-wise
    Mat out(x.d, q.q);
    for (size_t i = 0; i < q.factors.size(); ++i) {
        u64 pm = checked_pow(q.factors[i].first, q.factors[i].second);
        u64 rest = q.q / pm;
        u64 coef = mulmod(rest % q.q, invmod(rest % pm, pm), q.q);
        for (size_t k = 0; k < out.a.size(); ++k)
            out.a[k] = addmod(out.a[k], mulmod(parts[i].a[k] % q.q, coef, q.q), q.q);
    }
    return out;
}

std::string Word::str() const {
    std::string s;
    for (const auto& [letter, e] : syllables) {
        if (!s.empty()) s += ' ';
        s += "a" + std::to_string(letter);
        if (e != 1) s += "^" + std::to_string(e);
    }
    return s.empty() ? "1" : s;
}

SynthesizedWord word_synthesize(u32 s, u32 k) {
    if (s < 1 || k < 1) throw domain_error("word_synthesize: s, k must be positive");
    if (k > 3) throw domain_error("word_synthesize: unsupported k (implemented for k <= 3)");
    SynthesizedWord sw;
    sw.k = k;
    sw.s = s;
    if (s == 1) {
        // one-variable exp is a homomorphism on powers: exact for every k
        sw.w.syllables = {{1, 1}};
        sw.D = 1;
        return sw;
    }
    if (k <= 2) {
        for (u32 i = 1; i <= s; ++i) sw.w.syllables.emplace_back(i, 1);
        sw.D = 1;
        return sw;
    }
    // k = 3: palindromic splitting. Reversal symmetry kills every even-degree
    // term of log w(e^{x_i}); the scaling C absorbs the denominators of the
    // remaining odd terms at p = 2, 3.
    const i64 C = 6;
    for (u32 i = 1; i < s; ++i) sw.w.syllables.emplace_back(i, C);
    sw.w.syllables.emplace_back(s, 2 * C);
    for (u32 i = s - 1; i >= 1; --i) sw.w.syllables.emplace_back(i, C);
    sw.D = u64(2 * C);
    return sw;
}

WordVerification verify_word(const SynthesizedWord& sw, u64 p, u32 r_val, u32 d, u64 trials,
                             u64 seed) {
    if (p == 2 && r_val == 1) throw domain_error("verify_word: v_2(R) = 1 is excluded");
    if (r_val < alpha_p(p)) throw domain_error("verify_word: R below the exp domain");
    WordVerification out;
    out.required = sw.k * r_val;
    const u32 M = out.required + 2;
    out.precision = M;
    out.min_defect = M;
    const u64 mod = checked_pow(p, M);
    const u64 pr = checked_pow(p, r_val);
    Rng rng(derive_seed(seed, "verify_word"));

    for (u64 t = 0; t < trials; ++t) {
        std::vector<PadicMat> xs;
        Mat sum(d, mod);
        for (u32 i = 0; i < sw.s; ++i) {
            Mat x(d, mod);
            for (u64& e : x.a) e = mulmod(pr, rng.below(mod / pr), mod);
            sum = mat_add(sum, x);
            xs.emplace_back(p, M, std::move(x));
        }
        PadicMat arg(p, M, mat_scale(sum, sw.D % mod));
        Mat lhs = exp_trunc(arg).mat;

        std::vector<Mat> letter_exp;
        for (u32 i = 0; i < sw.s; ++i) letter_exp.push_back(exp_trunc(xs[i]).mat);
        Mat rhs = Mat::identity(d, mod);
        for (const auto& [letter, e] : sw.w.syllables) {
            Mat base = letter_exp[letter - 1];
            if (e < 0) base = modq::mat_inverse(base);
            rhs = mat_mul(rhs, mat_pow(base, u64(e < 0 ? -e : e)));
        }
        u32 defect = modq::vp_mat(mat_sub(lhs, rhs), p, M);
        out.min_defect = std::min(out.min_defect, defect);
        ++out.trials;
    }
    out.ok = out.min_defect >= out.required;
    return out;
}

}  // namespace elab::padic
