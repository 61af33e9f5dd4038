#include "elab/grpenum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace elab::grp {

std::vector<IntMat> GeneratorSet::effective() const {
    std::vector<IntMat> out = mats;
    if (symmetric_closure) {
        for (const auto& m : mats) {
            IntMat inv = modq::int_adjugate(m);
            if (std::find(out.begin(), out.end(), inv) == out.end()) out.push_back(inv);
        }
    }
    return out;
}

GeneratorSet parse_generators(const std::string& text, bool symmetric_closure) {
    GeneratorSet S;
    S.symmetric_closure = symmetric_closure;
    std::istringstream in(text);
    std::string line;
    bool have_dim = false;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        if (!have_dim) {
            std::string kw;
            ls >> kw;
            if (kw != "d") throw config_error("generator file: expected leading 'd <dimension>'");
            if (!(ls >> S.d) || S.d < 1 || S.d > 6)
                throw config_error("generator file: dimension must be in [1,6]");
            have_dim = true;
            continue;
        }
        IntMat m(S.d);
        for (size_t k = 0; k < m.a.size(); ++k)
            if (!(ls >> m.a[k])) throw config_error("generator file: short matrix line");
        if (modq::int_det(m) != 1)
            throw config_error("generator file: matrix determinant is not 1");
        S.mats.push_back(std::move(m));
    }
    if (!have_dim || S.mats.empty()) throw config_error("generator file: no generators");
    return S;
}

GeneratorSet load_generators(const std::string& path, bool symmetric_closure) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open generator file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_generators(ss.str(), symmetric_closure);
}

GeneratorSet standard_sl2() {
    GeneratorSet S;
    S.d = 2;
    IntMat a(2), b(2);
    a.a = {1, 1, 0, 1};
    b.a = {1, 0, 1, 1};
    S.mats = {a, b};
    S.symmetric_closure = true;
    return S;
}

// ---------------------------------------------------------------------------
// Element index: packed 64-bit keys when the entries fit, byte keys otherwise.

namespace {
struct KeyHash {
    size_t operator()(u64 x) const {
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return size_t(x ^ (x >> 31));
    }
};
}  // namespace

struct ElemIndex {
    u32 d = 0;
    u64 mod = 1;
    u32 bits = 0;
    bool packed = false;
    std::unordered_map<u64, u32, KeyHash> pk;
    std::unordered_map<std::string, u32> bk;

    void init(u32 dd, u64 m) {
        d = dd;
        mod = m;
        bits = (m <= 1) ? 1 : u32(std::bit_width(m - 1));
        packed = (u64(bits) * d * d) <= 64;
    }

    u64 pack(const u64* e) const {
        u64 k = 0;
        for (u32 i = 0; i < d * d; ++i) k = (k << bits) | e[i];
        return k;
    }

    std::string bytes(const u64* e) const {
        std::string s(size_t(d) * d * 8, '\0');
        for (u32 i = 0; i < d * d; ++i)
            for (u32 b = 0; b < 8; ++b) s[size_t(i) * 8 + b] = char((e[i] >> (56 - 8 * b)) & 0xff);
        return s;
    }

    std::optional<u32> find(const u64* e) const {
        if (packed) {
            auto it = pk.find(pack(e));
            if (it == pk.end()) return std::nullopt;
            return it->second;
        }
        auto it = bk.find(bytes(e));
        if (it == bk.end()) return std::nullopt;
        return it->second;
    }

    void insert(const u64* e, u32 idx) {
        if (packed)
            pk.emplace(pack(e), idx);
        else
            bk.emplace(bytes(e), idx);
    }
};

struct GroupTable::Index : ElemIndex {};

Mat GroupTable::element(u32 idx) const {
    Mat m(d, q.q);
    const u64* e = entries(idx);
    std::copy(e, e + size_t(d) * d, m.a.begin());
    return m;
}

std::vector<unsigned char> GroupTable::canonical_key(u32 idx) const {
    const u64* e = entries(idx);
    std::vector<unsigned char> key(size_t(d) * d * 8);
    for (u32 i = 0; i < d * d; ++i)
        for (u32 b = 0; b < 8; ++b) key[size_t(i) * 8 + b] = (unsigned char)((e[i] >> (56 - 8 * b)) & 0xff);
    return key;
}

std::optional<u32> GroupTable::index_of(const u64* e) const { return index_->find(e); }

std::optional<u32> GroupTable::index_of(const Mat& m) const {
    if (m.d != d || m.mod != q.q) return std::nullopt;
    return index_->find(m.a.data());
}

u32 GroupTable::mul(u32 i, u32 j) const {
    std::vector<u64> out(size_t(d) * d);
    modq::mat_mul_flat(d, q.q, entries(i), entries(j), out.data());
    auto idx = index_->find(out.data());
    if (!idx) throw invariant_violation("GroupTable::mul: product escaped the table");
    return *idx;
}

u32 GroupTable::inv(u32 i) const {
    if (!inv_built_) {
        inv_.resize(n_);
        for (u32 k = 0; k < n_; ++k) {
            Mat m = modq::mat_inverse(element(k));
            auto idx = index_->find(m.a.data());
            if (!idx) throw domain_error("GroupTable::inv: table is not inverse-closed");
            inv_[k] = *idx;
        }
        inv_built_ = true;
    }
    return inv_[i];
}

void GroupTable::build_index() {
    index_ = std::make_shared<Index>();
    index_->init(d, q.q);
    for (u32 i = 0; i < n_; ++i) index_->insert(entries(i), i);
}

GroupTable GroupTable::from_elements(u32 d, u64 mod, const std::vector<Mat>& elems,
                                     const std::vector<Mat>& gens) {
    GroupTable T;
    T.d = d;
    T.q = modq::factorize(mod);
    T.gens = gens;
    T.n_ = elems.size();
    T.flat_.reserve(elems.size() * size_t(d) * d);
    for (const auto& e : elems) T.flat_.insert(T.flat_.end(), e.a.begin(), e.a.end());
    T.build_index();
    T.gen_action.assign(gens.size(), std::vector<u32>(T.n_));
    std::vector<u64> buf(size_t(d) * d);
    for (size_t g = 0; g < gens.size(); ++g)
        for (u32 i = 0; i < T.n_; ++i) {
            modq::mat_mul_flat(d, mod, gens[g].a.data(), T.entries(i), buf.data());
            auto idx = T.index_->find(buf.data());
            if (!idx) throw domain_error("from_elements: element list not closed under generators");
            T.gen_action[g][i] = *idx;
        }
    // BFS distances over the explicit action
    T.word_length.assign(T.n_, UINT32_MAX);
    T.word_length[0] = 0;
    std::vector<u32> frontier{0};
    u32 depth = 0;
    while (!frontier.empty()) {
        ++depth;
        std::vector<u32> next;
        for (u32 x : frontier)
            for (const auto& act : T.gen_action) {
                u32 y = act[x];
                if (T.word_length[y] == UINT32_MAX) {
                    T.word_length[y] = depth;
                    next.push_back(y);
                }
            }
        frontier = std::move(next);
    }
    return T;
}

GroupTable enumerate(const GeneratorSet& S, const FactoredModulus& q, u64 cap) {
    if (cap < 1) throw config_error("enumerate: cap must be positive");
    GroupTable T;
    T.d = S.d;
    T.q = q;
    const u32 dd = S.d * S.d;
    for (const auto& g : S.effective()) T.gens.push_back(modq::reduce_mod(g, q.q));

    T.index_ = std::make_shared<GroupTable::Index>();
    T.index_->init(S.d, q.q);

    Mat id = Mat::identity(S.d, q.q);
    T.flat_.insert(T.flat_.end(), id.a.begin(), id.a.end());
    T.word_length.push_back(0);
    T.index_->insert(T.entries(0), 0);
    T.n_ = 1;

    std::vector<u32> layer{0};
    std::vector<u64> cand;  // stride dd
    std::vector<u64> prod(dd);
    u32 depth = 0;
    while (!layer.empty()) {
        ++depth;
        cand.clear();
        for (u32 x : layer)
            for (const auto& g : T.gens) {
                modq::mat_mul_flat(S.d, q.q, g.a.data(), T.entries(x), prod.data());
                if (!T.index_->find(prod.data()))
                    cand.insert(cand.end(), prod.begin(), prod.end());
            }
        if (cand.empty()) break;
        // canonical layer order: sort candidates by entry sequence, drop dups
        const size_t nc = cand.size() / dd;
        std::vector<u32> order(nc);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](u32 a, u32 b) {
            return std::lexicographical_compare(cand.begin() + size_t(a) * dd,
                                                cand.begin() + size_t(a) * dd + dd,
                                                cand.begin() + size_t(b) * dd,
                                                cand.begin() + size_t(b) * dd + dd);
        });
        std::vector<u32> next;
        const u64* prev = nullptr;
        for (u32 oi : order) {
            const u64* e = cand.data() + size_t(oi) * dd;
            if (prev && std::equal(e, e + dd, prev)) continue;
            prev = e;
            if (T.n_ + 1 > cap)
                throw cap_exceeded("enumerate: group exceeds cap (reached " +
                                   std::to_string(T.n_ + 1) + " elements)");
            u32 idx = u32(T.n_);
            T.flat_.insert(T.flat_.end(), e, e + dd);
            T.word_length.push_back(depth);
            T.index_->insert(T.entries(idx), idx);
            ++T.n_;
            next.push_back(idx);
        }
        layer = std::move(next);
    }

    T.gen_action.assign(T.gens.size(), std::vector<u32>(T.n_));
    for (size_t g = 0; g < T.gens.size(); ++g)
        for (u32 i = 0; i < T.n_; ++i) {
            modq::mat_mul_flat(S.d, q.q, T.gens[g].a.data(), T.entries(i), prod.data());
            T.gen_action[g][i] = *T.index_->find(prod.data());
        }
    return T;
}

Reduction reduce_table(const GroupTable& T, u64 q_prime) {
    if (q_prime == 0 || T.q.q % q_prime != 0)
        throw domain_error("reduce_table: q' must divide q");
    Reduction R;
    R.map.resize(T.size());
    ElemIndex idx;
    idx.init(T.d, q_prime);
    const u32 dd = T.d * T.d;
    std::vector<u64> red(dd);
    for (u32 i = 0; i < T.size(); ++i) {
        const u64* e = T.entries(i);
        for (u32 k = 0; k < dd; ++k) red[k] = e[k] % q_prime;
        if (auto found = idx.find(red.data())) {
            R.map[i] = *found;
        } else {
            idx.insert(red.data(), R.image_count);
            R.map[i] = R.image_count++;
        }
    }
    return R;
}

u64 congruence_index(const GroupTable& T, u64 q_prime) {
    return reduce_table(T, q_prime).image_count;
}

CrtResult crt_check(const GroupTable& T, u64 q1, u64 q2) {
    if (gcd_u64(q1, q2) != 1 || checked_mul(q1, q2) != T.q.q)
        throw domain_error("crt_check: split must be coprime with q1*q2 = q");
    CrtResult res;
    Reduction r1 = reduce_table(T, q1);
    Reduction r2 = reduce_table(T, q2);
    res.size_q1 = r1.image_count;
    res.size_q2 = r2.image_count;
    std::unordered_map<u64, u32, KeyHash> pairs;
    pairs.reserve(T.size() * 2);
    for (u32 i = 0; i < T.size(); ++i) {
        u64 key = u64(r1.map[i]) * r2.image_count + r2.map[i];
        auto [it, fresh] = pairs.emplace(key, i);
        if (!fresh) {
            res.ok = false;
            res.collision = std::make_pair(it->second, i);
            return res;
        }
    }
    res.ok = (u64(T.size()) == checked_mul(res.size_q1, res.size_q2));
    return res;
}

// ---------------------------------------------------------------------------
// Regularization: backward induction over coordinates; at each coordinate the
// exact fiber level K is the one maximizing (kept per fiber) * (fiber count),
// which retains at least a 1/(1 + ln N) fraction of the current set.

Regularized regularize(std::vector<std::vector<u32>> tuples, const std::vector<u64>& factor_sizes) {
    const size_t m = factor_sizes.size();
    if (m == 0) throw domain_error("regularize: need at least one factor");
    for (u64 n : factor_sizes)
        if (n < 3) throw domain_error("regularize: factor sizes must be >= 3");
    if (tuples.empty()) throw domain_error("regularize: empty input set");
    for (const auto& t : tuples)
        if (t.size() != m) throw domain_error("regularize: tuple arity mismatch");

    std::sort(tuples.begin(), tuples.end());
    tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
    const size_t input_size = tuples.size();

    std::vector<u64> K(m, 0);
    for (size_t i = m; i-- > 0;) {
        // distinct (i+1)-prefixes of the current set, already sorted
        std::vector<std::vector<u32>> prefixes;
        for (const auto& t : tuples) {
            std::vector<u32> p(t.begin(), t.begin() + i + 1);
            if (prefixes.empty() || prefixes.back() != p) prefixes.push_back(std::move(p));
        }
        // fibers: runs of prefixes sharing the first i coordinates
        struct Fiber {
            size_t begin, end;  // range into prefixes
        };
        std::vector<Fiber> fibers;
        size_t run = 0;
        for (size_t k = 1; k <= prefixes.size(); ++k) {
            bool split = (k == prefixes.size()) ||
                         !std::equal(prefixes[k].begin(), prefixes[k].begin() + i,
                                     prefixes[run].begin());
            if (split) {
                fibers.push_back({run, k});
                run = k;
            }
        }
        // pick the level maximizing retained = K * #{fibers of size >= K}
        std::vector<u64> sizes;
        sizes.reserve(fibers.size());
        for (const auto& f : fibers) sizes.push_back(f.end - f.begin);
        std::sort(sizes.begin(), sizes.end());
        sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
        u64 best_k = 1;
        u64 best_ret = 0;
        for (u64 cand : sizes) {
            u64 count = 0;
            for (const auto& f : fibers)
                if (f.end - f.begin >= cand) ++count;
            u64 ret = cand * count;
            if (ret > best_ret) {
                best_ret = ret;
                best_k = cand;
            }
        }
        K[i] = best_k;
        // keep the best_k canonically-smallest i-th coordinates of each
        // surviving fiber; drop smaller fibers entirely
        std::vector<std::vector<u32>> kept;
        for (const auto& f : fibers) {
            if (f.end - f.begin < best_k) continue;
            for (size_t k = f.begin; k < f.begin + best_k; ++k) kept.push_back(prefixes[k]);
        }
        std::vector<std::vector<u32>> filtered;
        for (auto& t : tuples) {
            std::vector<u32> p(t.begin(), t.begin() + i + 1);
            if (std::binary_search(kept.begin(), kept.end(), p)) filtered.push_back(std::move(t));
        }
        tuples = std::move(filtered);
    }

    u64 expect = 1;
    for (u64 k : K) expect *= k;
    if (tuples.size() != expect)
        throw invariant_violation("regularize: fiber counts do not multiply out");
    double bound = double(input_size);
    for (u64 n : factor_sizes) bound /= 2.0 * std::log(double(n));
    if (double(tuples.size()) < bound)
        throw invariant_violation("regularize: retained set below the 2*log bound");
    return {std::move(tuples), std::move(K)};
}

bool unipotent_span_check(const GroupTable& T) {
    if (T.q.factors.size() != 1 || T.q.factors[0].second != 1)
        throw domain_error("unipotent_span_check: q must be prime");
    u64 p = T.q.factors[0].first;
    if (p <= T.d) throw domain_error("unipotent_span_check: requires p > d");
    std::vector<u32> unip;
    Mat id = Mat::identity(T.d, p);
    for (u32 i = 0; i < T.size(); ++i) {
        Mat u = mat_sub(T.element(i), id);
        Mat acc = Mat::identity(T.d, p);
        for (u32 k = 0; k < T.d; ++k) acc = mat_mul(acc, u);  // (g - 1)^d
        bool nil = std::all_of(acc.a.begin(), acc.a.end(), [](u64 v) { return v == 0; });
        if (nil) unip.push_back(i);
    }
    // subgroup closure of the unipotents
    std::vector<char> seen(T.size(), 0);
    std::vector<u32> frontier;
    seen[0] = 1;
    frontier.push_back(0);
    size_t total = 1;
    while (!frontier.empty()) {
        std::vector<u32> next;
        for (u32 x : frontier)
            for (u32 u : unip) {
                u32 y = T.mul(u, x);
                if (!seen[y]) {
                    seen[y] = 1;
                    ++total;
                    next.push_back(y);
                }
            }
        frontier = std::move(next);
    }
    return total == T.size();
}

LieKernelReport lie_kernel_check(const GeneratorSet& S, u64 p, u64 cap) {
    if (p <= S.d) throw domain_error("lie_kernel_check: requires p > d");
    LieKernelReport rep;
    FactoredModulus p2 = modq::factorize(p * p);
    GroupTable T2 = enumerate(S, p2, cap);

    Mat id2 = Mat::identity(S.d, p * p);
    std::vector<u32> kernel;
    for (u32 i = 0; i < T2.size(); ++i) {
        const u64* e = T2.entries(i);
        bool in_ker = true;
        for (u32 r = 0; r < S.d && in_ker; ++r)
            for (u32 c = 0; c < S.d; ++c) {
                u64 want = (r == c) ? 1 : 0;
                if (e[size_t(r) * S.d + c] % p != want) {
                    in_ker = false;
                    break;
                }
            }
        if (in_ker) kernel.push_back(i);
    }
    rep.kernel_size = kernel.size();

    auto log_part = [&](u32 idx) {
        // g = 1 + p x: recover x mod p
        Mat g = T2.element(idx);
        Mat x(S.d, p);
        for (u32 r = 0; r < S.d; ++r)
            for (u32 c = 0; c < S.d; ++c) {
                u64 diff = submod(g.at(r, c), id2.at(r, c), p * p);
                x.at(r, c) = (diff / p) % p;
            }
        return x;
    };

    // additivity of g -> x over the whole kernel
    for (u32 i : kernel) {
        Mat xi = log_part(i);
        for (u32 j : kernel) {
            Mat xj = log_part(j);
            u32 ij = T2.mul(i, j);
            Mat xij = log_part(ij);
            if (!(xij == mat_add(xi, xj))) {
                rep.ok = false;
                rep.witness = T2.element(ij);
                rep.detail = "additivity failed";
                return rep;
            }
        }
    }

    // conjugation matches the adjoint action mod p^2; all a for small tables,
    // generators plus a seeded sample otherwise
    std::vector<u32> conj_set;
    if (T2.size() <= 20000) {
        conj_set.resize(T2.size());
        std::iota(conj_set.begin(), conj_set.end(), 0);
    } else {
        Rng rng(derive_seed(0x11e, "lie_kernel_conj"));
        for (size_t g = 0; g < T2.gens.size(); ++g)
            conj_set.push_back(T2.gen_action[g][0]);
        for (int k = 0; k < 256; ++k) conj_set.push_back(u32(rng.below(T2.size())));
    }
    for (u32 a : conj_set) {
        u32 ainv = T2.inv(a);
        Mat am = T2.element(a);
        Mat am_p = modq::mat_reduce(am, p);
        Mat ainv_p = modq::mat_reduce(T2.element(ainv), p);
        for (u32 g : kernel) {
            u32 conj = T2.mul(T2.mul(a, g), ainv);
            Mat lhs_x = log_part(conj);
            Mat rhs_x = mat_mul(mat_mul(am_p, log_part(g)), ainv_p);
            if (!(lhs_x == rhs_x)) {
                rep.ok = false;
                rep.witness = T2.element(conj);
                rep.detail = "conjugation does not match the adjoint action";
                return rep;
            }
        }
    }

    rep.ok = true;
    rep.detail = "kernel size " + std::to_string(rep.kernel_size) + ", additivity and Ad checked";
    return rep;
}

}  // namespace elab::grp
