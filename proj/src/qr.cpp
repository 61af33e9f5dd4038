#include "elab/qr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace elab::qr {

ClassData conjugacy_classes(const GroupTable& T, u64 cap) {
    if (T.size() > cap) throw cap_exceeded("conjugacy_classes: table exceeds cap");
    const u32 n = u32(T.size());
    ClassData cd;
    cd.class_of.assign(n, UINT32_MAX);
    // conjugating by the generators closes each class; generators generate
    std::vector<u32> gen_idx;
    for (const auto& g : T.gens) gen_idx.push_back(*T.index_of(g));
    for (u32 x = 0; x < n; ++x) {
        if (cd.class_of[x] != UINT32_MAX) continue;
        u32 cls = u32(cd.classes.size());
        std::vector<u32> members{x};
        cd.class_of[x] = cls;
        std::vector<u32> frontier{x};
        while (!frontier.empty()) {
            std::vector<u32> next;
            for (u32 m : frontier)
                for (u32 g : gen_idx) {
                    u32 y = T.mul(T.mul(g, m), T.inv(g));
                    if (cd.class_of[y] == UINT32_MAX) {
                        cd.class_of[y] = cls;
                        members.push_back(y);
                        next.push_back(y);
                    }
                }
            frontier = std::move(next);
        }
        std::sort(members.begin(), members.end());
        cd.representatives.push_back(members.front());
        cd.sizes.push_back(members.size());
        cd.classes.push_back(std::move(members));
    }
    return cd;
}

namespace {

u64 element_order(const GroupTable& T, u32 x) {
    u64 ord = 1;
    u32 cur = x;
    while (cur != 0) {
        cur = T.mul(cur, x);
        ++ord;
    }
    return ord;
}

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Gaussian elimination mod l; returns rank, reduces rows in place.
u32 row_reduce(std::vector<std::vector<u64>>& rows, u64 l) {
    u32 rank = 0;
    size_t cols = rows.empty() ? 0 : rows[0].size();
    for (size_t c = 0; c < cols && rank < rows.size(); ++c) {
        size_t piv = rank;
        while (piv < rows.size() && rows[piv][c] == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[rank], rows[piv]);
        u64 inv = invmod(rows[rank][c], l);
        for (size_t j = c; j < cols; ++j) rows[rank][j] = mulmod(rows[rank][j], inv, l);
        for (size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][c] == 0) continue;
            u64 f = rows[r][c];
            for (size_t j = c; j < cols; ++j)
                rows[r][j] = submod(rows[r][j], mulmod(f, rows[rank][j], l), l);
        }
        ++rank;
    }
    rows.resize(rank);
    return rank;
}

// kernel basis of a square matrix mod l
std::vector<std::vector<u64>> kernel_basis(std::vector<std::vector<u64>> m, u64 l) {
    const size_t n = m.size();
    std::vector<std::vector<u64>> rows = m;
    row_reduce(rows, l);
    // locate pivot columns
    std::vector<i64> pivot_of_col(n, -1);
    for (size_t r = 0; r < rows.size(); ++r) {
        size_t c = 0;
        while (c < n && rows[r][c] == 0) ++c;
        if (c < n) pivot_of_col[c] = i64(r);
    }
    std::vector<std::vector<u64>> basis;
    for (size_t free_c = 0; free_c < n; ++free_c) {
        if (pivot_of_col[free_c] >= 0) continue;
        std::vector<u64> v(n, 0);
        v[free_c] = 1;
        for (size_t c = 0; c < n; ++c) {
            i64 r = pivot_of_col[c];
            if (r < 0) continue;
            v[c] = submod(0, rows[size_t(r)][free_c], l);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

using FMat = std::vector<std::vector<u64>>;

FMat fmat_mul(const FMat& a, const FMat& b, u64 l) {
    size_t n = a.size(), m = b[0].size(), k = b.size();
    FMat out(n, std::vector<u64>(m, 0));
    for (size_t i = 0; i < n; ++i)
        for (size_t t = 0; t < k; ++t) {
            if (a[i][t] == 0) continue;
            u64 f = a[i][t];
            for (size_t j = 0; j < m; ++j)
                out[i][j] = addmod(out[i][j], mulmod(f, b[t][j], l), l);
        }
    return out;
}

// characteristic polynomial coefficients via Newton's identities; l > dim
std::vector<u64> char_poly(const FMat& m, u64 l) {
    const size_t n = m.size();
    std::vector<u64> p(n + 1, 0);  // power sums p[1..n]
    FMat pw = m;
    for (size_t k = 1; k <= n; ++k) {
        u64 tr = 0;
        for (size_t i = 0; i < n; ++i) tr = addmod(tr, pw[i][i], l);
        p[k] = tr;
        if (k < n) pw = fmat_mul(pw, m, l);
    }
    std::vector<u64> e(n + 1, 0);
    e[0] = 1;
    for (size_t k = 1; k <= n; ++k) {
        u64 acc = 0;
        for (size_t i = 1; i <= k; ++i) {
            u64 term = mulmod(e[k - i], p[i], l);
            acc = (i % 2 == 1) ? addmod(acc, term, l) : submod(acc, term, l);
        }
        e[k] = mulmod(acc, invmod(k % l, l), l);
    }
    // char(x) = x^n - e1 x^{n-1} + e2 x^{n-2} - ...
    std::vector<u64> coeff(n + 1, 0);  // coeff[i] multiplies x^i
    for (size_t k = 0; k <= n; ++k) {
        u64 v = e[k];
        if (k % 2 == 1) v = submod(0, v, l);
        coeff[n - k] = v;
    }
    return coeff;
}

u64 poly_eval(const std::vector<u64>& coeff, u64 x, u64 l) {
    u64 acc = 0;
    for (size_t i = coeff.size(); i-- > 0;) acc = addmod(mulmod(acc, x, l), coeff[i], l);
    return acc;
}

}  // namespace

std::vector<u64> character_degrees(const GroupTable& T, u64 cap) {
    if (T.size() > cap) throw cap_exceeded("character_degrees: table exceeds cap");
    ClassData cd = conjugacy_classes(T, cap);
    const size_t k = cd.classes.size();
    if (k > 64) throw cap_exceeded("character_degrees: class count exceeds 64");
    const u64 order = T.size();
    if (k == 1) return {1};

    // exponent and Dixon's field F_l, l = 1 mod exponent, l > 2 sqrt(|T|)
    u64 expo = 1;
    for (u32 rep : cd.representatives) {
        u64 o = element_order(T, rep);
        expo = expo / gcd_u64(expo, o) * o;
    }
    u64 sqrt_floor = u64(std::sqrt(double(order)));
    while (sqrt_floor * sqrt_floor < order) ++sqrt_floor;
    u64 l = 0;
    for (u64 c = 1;; ++c) {
        u64 cand = c * expo + 1;
        if (cand <= 2 * sqrt_floor + 1) continue;
        if (is_prime_u64(cand)) {
            l = cand;
            break;
        }
    }

    // class multiplication coefficients a[i][j][kk]
    std::vector<u32> inv_class(k);
    for (size_t i = 0; i < k; ++i) inv_class[i] = cd.class_of[T.inv(cd.representatives[i])];
    std::vector<FMat> M(k, FMat(k, std::vector<u64>(k, 0)));
    for (size_t i = 0; i < k; ++i)
        for (size_t kk = 0; kk < k; ++kk) {
            u32 zk = cd.representatives[kk];
            for (u32 x : cd.classes[i]) {
                u32 j = cd.class_of[T.mul(T.inv(x), zk)];
                M[i][kk][j] = addmod(M[i][kk][j], 1, l);
            }
        }

    // split F_l^k into common eigenlines of the commuting class matrices
    std::vector<FMat> spaces;  // each: list of basis vectors (rows)
    {
        FMat full;
        for (size_t i = 0; i < k; ++i) {
            std::vector<u64> e(k, 0);
            e[i] = 1;
            full.push_back(std::move(e));
        }
        spaces.push_back(std::move(full));
    }
    for (size_t mi = 0; mi < k; ++mi) {
        bool all_lines = true;
        for (const auto& sp : spaces) all_lines = all_lines && sp.size() == 1;
        if (all_lines) break;
        std::vector<FMat> refined;
        for (auto& sp : spaces) {
            if (sp.size() == 1) {
                refined.push_back(std::move(sp));
                continue;
            }
            const size_t dim = sp.size();
            // restriction R of M[mi]: images of basis vectors expressed in sp
            FMat images;
            for (const auto& v : sp) {
                std::vector<u64> img(k, 0);
                for (size_t c = 0; c < k; ++c) {
                    if (v[c] == 0) continue;
                    for (size_t r = 0; r < k; ++r)
                        img[r] = addmod(img[r], mulmod(M[mi][r][c], v[c], l), l);
                }
                images.push_back(std::move(img));
            }
            // solve coeffs: [sp^T | img] -> R columns, via row reduction of
            // the augmented system over the basis
            FMat R(dim, std::vector<u64>(dim, 0));
            {
                // augmented matrix: rows are k-coordinates; columns = dim basis
                // vectors then dim images
                FMat aug(k, std::vector<u64>(2 * dim, 0));
                for (size_t c = 0; c < dim; ++c)
                    for (size_t r = 0; r < k; ++r) {
                        aug[r][c] = sp[c][r];
                        aug[r][dim + c] = images[c][r];
                    }
                // eliminate to express images in the basis
                u32 rank = 0;
                std::vector<size_t> pivot_rows;
                for (size_t c = 0; c < dim && rank < k; ++c) {
                    size_t piv = rank;
                    while (piv < k && aug[piv][c] == 0) ++piv;
                    if (piv == k) throw invariant_violation("character_degrees: basis degenerate");
                    std::swap(aug[rank], aug[piv]);
                    u64 inv = invmod(aug[rank][c], l);
                    for (size_t j = 0; j < 2 * dim; ++j) aug[rank][j] = mulmod(aug[rank][j], inv, l);
                    for (size_t r = 0; r < k; ++r) {
                        if (r == rank || aug[r][c] == 0) continue;
                        u64 f = aug[r][c];
                        for (size_t j = 0; j < 2 * dim; ++j)
                            aug[r][j] = submod(aug[r][j], mulmod(f, aug[rank][j], l), l);
                    }
                    pivot_rows.push_back(rank);
                    ++rank;
                }
                for (size_t c = 0; c < dim; ++c)
                    for (size_t rr = 0; rr < dim; ++rr) R[rr][c] = aug[pivot_rows[rr]][dim + c];
            }
            // eigenvalues of R: roots of its characteristic polynomial
            std::vector<u64> coeff = char_poly(R, l);
            std::vector<u64> roots;
            for (u64 x = 0; x < l; ++x)
                if (poly_eval(coeff, x, l) == 0) roots.push_back(x);
            for (u64 root : roots) {
                FMat shifted = R;
                for (size_t i = 0; i < dim; ++i) shifted[i][i] = submod(shifted[i][i], root, l);
                auto ker = kernel_basis(shifted, l);
                if (ker.empty()) continue;
                FMat subspace;
                for (const auto& kv : ker) {
                    std::vector<u64> v(k, 0);
                    for (size_t c = 0; c < dim; ++c) {
                        if (kv[c] == 0) continue;
                        for (size_t r = 0; r < k; ++r)
                            v[r] = addmod(v[r], mulmod(kv[c], sp[c][r], l), l);
                    }
                    subspace.push_back(std::move(v));
                }
                refined.push_back(std::move(subspace));
            }
        }
        spaces = std::move(refined);
    }
    if (spaces.size() != k)
        throw invariant_violation("character_degrees: class algebra did not split into lines");

    // central characters and degrees
    std::vector<u64> degrees;
    for (const auto& sp : spaces) {
        const auto& v = sp[0];
        size_t nz = 0;
        while (nz < k && v[nz] == 0) ++nz;
        std::vector<u64> omega(k);
        for (size_t i = 0; i < k; ++i) {
            u64 img = 0;
            for (size_t r = 0; r < k; ++r)
                if (v[r]) img = addmod(img, mulmod(M[i][nz][r], v[r], l), l);
            omega[i] = mulmod(img, invmod(v[nz], l), l);
        }
        u64 s = 0;
        for (size_t i = 0; i < k; ++i) {
            u64 term = mulmod(omega[i], omega[inv_class[i]], l);
            term = mulmod(term, invmod(cd.sizes[i] % l, l), l);
            s = addmod(s, term, l);
        }
        u64 d2 = mulmod(order % l, invmod(s, l), l);
        u64 deg = 0;
        for (u64 d = 1; d <= sqrt_floor; ++d)
            if (mulmod(d, d, l) == d2) {
                deg = d;
                break;
            }
        if (deg == 0) throw invariant_violation("character_degrees: no admissible degree root");
        degrees.push_back(deg);
    }
    std::sort(degrees.begin(), degrees.end());
    u64 sum_sq = 0;
    for (u64 d : degrees) sum_sq += d * d;
    if (sum_sq != order || degrees.size() != k)
        throw invariant_violation("character_degrees: orthogonality validation failed");
    return degrees;
}

u64 min_degree_from(const std::vector<u64>& degrees) {
    if (degrees.size() <= 1) return 1;
    u64 ones = u64(std::count(degrees.begin(), degrees.end(), u64(1)));
    if (ones > 1) return 1;  // nontrivial linear characters exist
    for (u64 d : degrees)
        if (d > 1) return d;
    return 1;
}

u64 min_degree(const GroupTable& T) { return min_degree_from(character_degrees(T)); }

GowersResult gowers_cover_check(const std::vector<u32>& A1, const std::vector<u32>& A2,
                                const std::vector<u32>& A3, const GroupTable& T, u64 m) {
    GowersResult out;
    const size_t n = T.size();
    std::vector<char> p12(n, 0);
    for (u32 a : A1)
        for (u32 b : A2) p12[T.mul(a, b)] = 1;
    std::vector<char> p123(n, 0);
    for (u32 x = 0; x < n; ++x) {
        if (!p12[x]) continue;
        for (u32 c : A3) p123[T.mul(x, c)] = 1;
    }
    out.product_size = u64(std::count(p123.begin(), p123.end(), char(1)));
    out.covered = (out.product_size == n);
    u128 lhs = u128(A1.size()) * A2.size() * A3.size() * m;
    u128 rhs = u128(n) * n * n;
    out.hypothesis_holds = lhs > rhs;
    return out;
}

namespace {
std::optional<u64> closure_index(const GroupTable& T, u32 a, u32 b) {
    std::vector<char> seen(T.size(), 0);
    std::vector<u32> frontier{0};
    seen[0] = 1;
    u64 size = 1;
    std::vector<u32> gens{a, b, T.inv(a), T.inv(b)};
    while (!frontier.empty()) {
        std::vector<u32> next;
        for (u32 x : frontier)
            for (u32 g : gens) {
                u32 y = T.mul(g, x);
                if (!seen[y]) {
                    seen[y] = 1;
                    ++size;
                    next.push_back(y);
                }
            }
        frontier = std::move(next);
    }
    if (size == T.size()) return std::nullopt;  // not proper
    return u64(T.size()) / size;
}
}  // namespace

IndexProbe min_proper_index_probe(const GroupTable& T, u64 trials, u64 seed) {
    IndexProbe out;
    out.trials = trials;
    Rng rng(derive_seed(seed, "min_proper_index"));
    for (u64 t = 0; t < trials; ++t) {
        u32 a = u32(rng.below(T.size()));
        u32 b = u32(rng.below(T.size()));
        if (auto idx = closure_index(T, a, b)) {
            ++out.subgroups_seen;
            if (!out.min_index || *idx < *out.min_index) out.min_index = idx;
        }
    }
    return out;
}

IndexProbe min_proper_index_pairs(const GroupTable& T) {
    IndexProbe out;
    for (u32 a = 0; a < T.size(); ++a)
        for (u32 b = a; b < T.size(); ++b) {
            ++out.trials;
            if (auto idx = closure_index(T, a, b)) {
                ++out.subgroups_seen;
                if (!out.min_index || *idx < *out.min_index) out.min_index = idx;
            }
        }
    return out;
}

NonsplitResult nonsplit_probe(const GeneratorSet& S, u64 p, u64 trials, u64 seed, u64 cap) {
    if (p <= 2 * S.d) throw domain_error("nonsplit_probe: requires p > 2d");
    NonsplitResult out;
    GroupTable Tp = grp::enumerate(S, modq::factorize(p), cap);
    const u64 p2 = p * p;

    // BFS-shortest-word section psi: lift each mod-p element to the integer
    // word product reduced mod p^2, following the canonical BFS tree
    std::vector<modq::Mat> gens2;
    for (const auto& g : S.effective()) gens2.push_back(modq::reduce_mod(g, p2));
    std::vector<modq::Mat> lift(Tp.size(), modq::Mat());
    lift[0] = modq::Mat::identity(S.d, p2);
    std::vector<char> have(Tp.size(), 0);
    have[0] = 1;
    // parents in BFS layer order; ordinals are layer-sorted by construction
    for (u32 y = 0; y < Tp.size(); ++y) {
        if (!have[y]) continue;
        for (size_t g = 0; g < Tp.gen_action.size(); ++g) {
            u32 x = Tp.gen_action[g][y];
            if (!have[x] && Tp.word_length[x] == Tp.word_length[y] + 1) {
                lift[x] = modq::mat_mul(gens2[g], lift[y]);
                have[x] = 1;
            }
        }
    }

    Rng rng(derive_seed(seed, "nonsplit_probe"));
    modq::Mat id2 = modq::Mat::identity(S.d, p2);
    for (u64 t = 0; t < trials; ++t) {
        ++out.trials_used;
        u32 x = u32(rng.below(Tp.size()));
        u32 y = u32(rng.below(Tp.size()));
        u32 xy = Tp.mul(x, y);
        modq::Mat z = modq::mat_mul(lift[xy], modq::mat_mul(modq::mat_inverse(lift[y]),
                                                            modq::mat_inverse(lift[x])));
        if (!(z == id2)) {
            out.found = true;
            out.witness = z;
            out.x = x;
            out.y = y;
            return out;
        }
    }
    return out;
}

}  // namespace elab::qr
