#include "elab/walk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace elab::walk {

double SparseMeasure::weight_at(u32 ordinal) const {
    auto it = std::lower_bound(idx.begin(), idx.end(), ordinal);
    if (it == idx.end() || *it != ordinal) return 0.0;
    size_t k = size_t(it - idx.begin());
    return exact ? double(num[k]) / double(den) : w[k];
}

SparseMeasure SparseMeasure::delta(u32 ordinal) {
    SparseMeasure m;
    m.exact = true;
    m.den = 1;
    m.idx = {ordinal};
    m.num = {1};
    return m;
}

SparseMeasure SparseMeasure::uniform_on(std::vector<u32> ordinals) {
    std::sort(ordinals.begin(), ordinals.end());
    ordinals.erase(std::unique(ordinals.begin(), ordinals.end()), ordinals.end());
    SparseMeasure m;
    m.exact = true;
    m.den = ordinals.size();
    m.idx = std::move(ordinals);
    m.num.assign(m.idx.size(), 1);
    return m;
}

void SparseMeasure::to_float() {
    if (!exact) return;
    w.resize(num.size());
    for (size_t k = 0; k < num.size(); ++k) w[k] = double(num[k]) / double(den);
    num.clear();
    exact = false;
}

namespace {

void normalize_exact(SparseMeasure& m) {
    u64 g = m.den;
    for (u64 v : m.num) g = gcd_u64(g, v);
    if (g > 1) {
        m.den /= g;
        for (u64& v : m.num) v /= g;
    }
}

SparseMeasure convolve_one(const SparseMeasure& mu, const SparseMeasure& nu, const GroupTable& T,
                           const std::vector<std::vector<u32>>* right_actions, size_t exact_cap) {
    const size_t n = T.size();
    bool exact = mu.exact && nu.exact;
    u64 den = 0;
    if (exact) {
        u128 d = u128(mu.den) * nu.den;
        if (d > ~u64(0)) exact = false;
        else den = u64(d);
    }
    SparseMeasure out;
    if (exact) {
        std::vector<u64> acc(n, 0);
        for (size_t b = 0; b < nu.idx.size(); ++b) {
            const std::vector<u32>* act = right_actions ? &(*right_actions)[b] : nullptr;
            for (size_t a = 0; a < mu.idx.size(); ++a) {
                u32 tgt = act ? (*act)[mu.idx[a]] : T.mul(mu.idx[a], nu.idx[b]);
                acc[tgt] += mu.num[a] * nu.num[b];  // total sums to den <= 2^64
            }
        }
        out.exact = true;
        out.den = den;
        for (u32 i = 0; i < n; ++i)
            if (acc[i]) {
                out.idx.push_back(i);
                out.num.push_back(acc[i]);
            }
        if (out.idx.size() > exact_cap) {
            out.to_float();
        } else {
            normalize_exact(out);
        }
        return out;
    }
    // floating path, deterministic ordinal-sorted accumulation
    std::vector<double> acc(n, 0.0);
    auto wa = [&](const SparseMeasure& m, size_t k) {
        return m.exact ? double(m.num[k]) / double(m.den) : m.w[k];
    };
    for (size_t b = 0; b < nu.idx.size(); ++b) {
        const std::vector<u32>* act = right_actions ? &(*right_actions)[b] : nullptr;
        for (size_t a = 0; a < mu.idx.size(); ++a) {
            u32 tgt = act ? (*act)[mu.idx[a]] : T.mul(mu.idx[a], nu.idx[b]);
            acc[tgt] += wa(mu, a) * wa(nu, b);
        }
    }
    out.exact = false;
    for (u32 i = 0; i < n; ++i)
        if (acc[i] != 0.0) {
            out.idx.push_back(i);
            out.w.push_back(acc[i]);
        }
    return out;
}

}  // namespace

SparseMeasure convolve(const SparseMeasure& mu, const SparseMeasure& nu, const GroupTable& T,
                       size_t exact_cap) {
    return convolve_one(mu, nu, T, nullptr, exact_cap);
}

bool is_symmetric(const SparseMeasure& mu, const GroupTable& T) {
    for (size_t k = 0; k < mu.idx.size(); ++k) {
        u32 j = T.inv(mu.idx[k]);
        auto it = std::lower_bound(mu.idx.begin(), mu.idx.end(), j);
        if (it == mu.idx.end() || *it != j) return false;
        size_t kj = size_t(it - mu.idx.begin());
        if (mu.exact ? (mu.num[k] != mu.num[kj]) : (std::abs(mu.w[k] - mu.w[kj]) > 1e-12))
            return false;
    }
    return true;
}

PowerWalker::PowerWalker(const GroupTable& T, const SparseMeasure& base, size_t exact_cap)
    : T_(T), base_(base), cur_(SparseMeasure::delta(0)), exact_cap_(exact_cap) {
    right_action_.resize(base_.idx.size());
    for (size_t b = 0; b < base_.idx.size(); ++b) {
        right_action_[b].resize(T.size());
        for (u32 i = 0; i < T.size(); ++i) right_action_[b][i] = T.mul(i, base_.idx[b]);
    }
}

void PowerWalker::step() { cur_ = convolve_one(cur_, base_, T_, &right_action_, exact_cap_); }

FlatnessSq flatness_sq(const SparseMeasure& mu, const GroupTable& T, u64 q_prime) {
    grp::Reduction R = grp::reduce_table(T, q_prime);
    FlatnessSq out;
    out.image_count = R.image_count;
    if (mu.exact) {
        std::vector<u64> pushed(R.image_count, 0);
        for (size_t k = 0; k < mu.idx.size(); ++k) pushed[R.map[mu.idx[k]]] += mu.num[k];
        u128 s = 0;
        for (u64 v : pushed) s += u128(v) * v;
        out.exact = true;
        out.sq_num = s;
        out.den = mu.den;
        out.value = std::sqrt(double(R.image_count) * double(s) / (double(mu.den) * double(mu.den)));
    } else {
        std::vector<double> pushed(R.image_count, 0.0);
        for (size_t k = 0; k < mu.idx.size(); ++k) pushed[R.map[mu.idx[k]]] += mu.w[k];
        double s = 0;
        for (double v : pushed) s += v * v;
        out.exact = false;
        out.value = std::sqrt(double(R.image_count) * s);
    }
    return out;
}

double flatness(const SparseMeasure& mu, const GroupTable& T, u64 q_prime) {
    return flatness_sq(mu, T, q_prime).value;
}

namespace {
// 256-bit product of two u128, compared lexicographically
struct U256 {
    u128 hi = 0, lo = 0;
};

U256 mul_u128(u128 a, u128 b) {
    const u128 mask = (u128(1) << 64) - 1;
    u128 a0 = a & mask, a1 = a >> 64;
    u128 b0 = b & mask, b1 = b >> 64;
    u128 p00 = a0 * b0;
    u128 p01 = a0 * b1;
    u128 p10 = a1 * b0;
    u128 p11 = a1 * b1;
    u128 mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
    U256 r;
    r.lo = (p00 & mask) | (mid << 64);
    r.hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    return r;
}

bool le_u256(const U256& a, const U256& b) {
    return a.hi < b.hi || (a.hi == b.hi && a.lo <= b.lo);
}
}  // namespace

bool flatness_le(const FlatnessSq& a, const FlatnessSq& b) {
    if (!a.exact || !b.exact) throw domain_error("flatness_le: exact mode required");
    if (a.image_count != b.image_count)
        throw domain_error("flatness_le: mismatched quotients");
    // a.sq/a.den^2 <= b.sq/b.den^2  <=>  a.sq * b.den^2 <= b.sq * a.den^2
    U256 lhs = mul_u128(a.sq_num, u128(b.den) * b.den);
    U256 rhs = mul_u128(b.sq_num, u128(a.den) * a.den);
    return le_u256(lhs, rhs);
}

FlatteningCurve flattening_curve(const SparseMeasure& mu, const GroupTable& T, u64 q_prime,
                                 u32 n_max, double tau, size_t exact_cap) {
    FlatteningCurve curve;
    std::vector<double> flat(2 * size_t(n_max) + 1, 0.0);
    PowerWalker walker(T, mu, exact_cap);
    bool all_exact = true;
    for (u32 n = 0; n <= 2 * n_max; ++n) {
        if (n > 0) walker.step();
        FlatnessSq f = flatness_sq(walker.current(), T, q_prime);
        flat[n] = f.value;
        all_exact = all_exact && f.exact;
    }
    double threshold = std::pow(double(q_prime), tau);
    for (u32 n = 0; n <= n_max; ++n) {
        CurveRow row;
        row.n = n;
        row.flatness = flat[n];
        row.ratio = flat[n] > 0 ? flat[2 * size_t(n)] / flat[n] : 0.0;
        if (curve.crossing_n < 0 && flat[n] < threshold) curve.crossing_n = i64(n);
        curve.rows.push_back(row);
    }
    curve.exact = all_exact;
    return curve;
}

WordMeasure WordMeasure::uniform_on_generators(const GeneratorSet& S) {
    WordMeasure wm;
    wm.S = S;
    size_t n = S.effective().size();
    for (size_t i = 0; i < n; ++i) {
        wm.weights.push_back(1.0 / double(n));
        wm.words.push_back({int(i + 1)});
        wm.int_weights.push_back(1);
    }
    wm.integer_weights = true;
    return wm;
}

WordMeasure parse_measure(const std::string& text, const GeneratorSet& S) {
    WordMeasure wm;
    wm.S = S;
    std::istringstream in(text);
    std::string line;
    double total = 0;
    std::vector<double> raw;
    bool all_int = true;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double weight;
        if (!(ls >> weight) || weight <= 0) throw config_error("measure file: bad weight line");
        std::vector<int> word;
        int letter;
        size_t n_eff = S.effective().size();
        while (ls >> letter) {
            if (letter == 0 || size_t(std::abs(letter)) > n_eff)
                throw config_error("measure file: generator index out of range");
            word.push_back(letter);
        }
        raw.push_back(weight);
        wm.words.push_back(std::move(word));
        total += weight;
        if (weight != std::floor(weight)) all_int = false;
    }
    if (raw.empty()) throw config_error("measure file: empty measure");
    wm.integer_weights = all_int;
    for (double v : raw) {
        wm.weights.push_back(v / total);
        if (all_int) wm.int_weights.push_back(u64(v));
    }
    return wm;
}

WordMeasure load_measure(const std::string& path, const GeneratorSet& S) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open measure file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_measure(ss.str(), S);
}

namespace {
modq::IntMat word_int_matrix(const GeneratorSet& S, const std::vector<int>& word) {
    auto gens = S.effective();
    modq::IntMat m = modq::IntMat::identity(S.d);
    for (int letter : word) {
        const modq::IntMat& g = gens[size_t(std::abs(letter)) - 1];
        m = modq::int_mul(m, letter > 0 ? g : modq::int_adjugate(g));
    }
    return m;
}
}  // namespace

SparseMeasure push_to_table(const WordMeasure& wm, const GroupTable& T) {
    std::vector<std::pair<u32, size_t>> hits;  // (ordinal, atom)
    for (size_t k = 0; k < wm.words.size(); ++k) {
        modq::Mat m = modq::reduce_mod(word_int_matrix(wm.S, wm.words[k]), T.q.q);
        auto idx = T.index_of(m);
        if (!idx) throw domain_error("push_to_table: word lands outside the table");
        hits.emplace_back(*idx, k);
    }
    SparseMeasure out;
    if (wm.integer_weights) {
        u64 den = 0;
        for (u64 v : wm.int_weights) den += v;
        std::vector<std::pair<u32, u64>> acc;
        for (auto [ord, k] : hits) acc.emplace_back(ord, wm.int_weights[k]);
        std::sort(acc.begin(), acc.end());
        out.exact = true;
        out.den = den;
        for (auto [ord, v] : acc) {
            if (!out.idx.empty() && out.idx.back() == ord)
                out.num.back() += v;
            else {
                out.idx.push_back(ord);
                out.num.push_back(v);
            }
        }
        normalize_exact(out);
    } else {
        std::vector<std::pair<u32, double>> acc;
        for (auto [ord, k] : hits) acc.emplace_back(ord, wm.weights[k]);
        std::sort(acc.begin(), acc.end());
        out.exact = false;
        for (auto [ord, v] : acc) {
            if (!out.idx.empty() && out.idx.back() == ord)
                out.w.back() += v;
            else {
                out.idx.push_back(ord);
                out.w.push_back(v);
            }
        }
    }
    return out;
}

namespace {
struct IntMatHash {
    size_t operator()(const std::vector<i64>& v) const {
        u64 h = 1469598103934665603ULL;
        for (i64 x : v) {
            h ^= u64(x);
            h *= 1099511628211ULL;
        }
        return size_t(h);
    }
};
}  // namespace

DiophResult almost_diophantine(const WordMeasure& wm, u64 q, u32 n, u64 group_cap, u64 node_cap,
                               size_t exact_cap) {
    DiophResult out;
    // support matrices and the norm bound M
    std::vector<modq::IntMat> support;
    for (const auto& word : wm.words) support.push_back(word_int_matrix(wm.S, word));
    u64 M = 1;
    for (const auto& m : support) M = std::max(M, modq::int_row_sum_norm(m));
    out.norm_bound = M;

    // mass mu^{*n}(Omega_q) on the finite quotient
    try {
        grp::GroupTable T = grp::enumerate(wm.S, modq::factorize(q), group_cap);
        SparseMeasure mu = push_to_table(wm, T);
        PowerWalker walker(T, mu, exact_cap);
        for (u32 i = 0; i < n; ++i) walker.step();
        out.mass = walker.current().weight_at(0);
        out.mass_exact = walker.current().exact;
        out.mass_computed = true;
    } catch (const cap_exceeded&) {
        out.mass_computed = false;
    }

    // exact-support check over the integer word ball of radius 2m
    u32 radius = 0;
    if (M >= 2 && q >= 2) radius = 2 * u32(std::log(double(q)) / (2.0 * std::log(double(M))));
    out.radius = radius;
    std::unordered_set<std::vector<i64>, IntMatHash> seen;
    std::vector<modq::IntMat> frontier{modq::IntMat::identity(wm.S.d)};
    seen.insert(frontier[0].a);
    out.exact_support = true;
    for (u32 depth = 1; depth <= radius && !frontier.empty() && !out.support_partial; ++depth) {
        std::vector<modq::IntMat> next;
        for (const auto& x : frontier) {
            if (out.support_partial) break;
            for (const auto& s : support) {
                if (seen.size() >= node_cap) {
                    out.support_partial = true;
                    break;
                }
                modq::IntMat y = modq::int_mul(x, s);
                if (!seen.insert(y.a).second) continue;
                next.push_back(std::move(y));
            }
        }
        frontier = std::move(next);
    }
    out.ball_size = seen.size();
    modq::IntMat id = modq::IntMat::identity(wm.S.d);
    for (const auto& entries : seen) {
        if (entries == id.a) continue;
        modq::IntMat m(wm.S.d);
        m.a = entries;
        if (modq::reduce_mod(m, q).is_identity()) {
            out.exact_support = false;
            break;
        }
    }
    return out;
}

ApproxStats approx_group_stats(const std::vector<u32>& A_in, const GroupTable& T) {
    std::vector<u32> A = A_in;
    std::sort(A.begin(), A.end());
    A.erase(std::unique(A.begin(), A.end()), A.end());
    if (A.empty() || A.front() != 0)
        throw domain_error("approx_group_stats: A must contain the identity");
    for (u32 a : A)
        if (!std::binary_search(A.begin(), A.end(), T.inv(a)))
            throw domain_error("approx_group_stats: A must be symmetric");

    ApproxStats out;
    out.size_a = A.size();
    std::vector<char> in_aa(T.size(), 0);
    for (u32 a : A)
        for (u32 b : A) in_aa[T.mul(a, b)] = 1;
    std::vector<u32> AA;
    for (u32 i = 0; i < T.size(); ++i)
        if (in_aa[i]) AA.push_back(i);
    out.size_aa = AA.size();

    std::vector<char> in_aaa(T.size(), 0);
    for (u32 x : AA)
        for (u32 a : A) in_aaa[T.mul(x, a)] = 1;
    out.size_aaa = u64(std::count(in_aaa.begin(), in_aaa.end(), char(1)));
    out.tripling = double(out.size_aaa) / double(out.size_a);

    // greedy cover: AA <= A X, candidates drawn from AA
    std::vector<char> covered(T.size(), 0);
    size_t uncovered = AA.size();
    while (uncovered > 0) {
        u32 best_x = 0;
        size_t best_gain = 0;
        for (u32 x : AA) {
            size_t gain = 0;
            for (u32 a : A) {
                u32 y = T.mul(a, x);
                if (in_aa[y] && !covered[y]) ++gain;
            }
            if (gain > best_gain) {
                best_gain = gain;
                best_x = x;
            }
        }
        if (best_gain == 0) throw invariant_violation("approx_group_stats: greedy cover stalled");
        for (u32 a : A) {
            u32 y = T.mul(a, best_x);
            if (in_aa[y] && !covered[y]) {
                covered[y] = 1;
                --uncovered;
            }
        }
        ++out.k_cover;
    }
    return out;
}

}  // namespace elab::walk
