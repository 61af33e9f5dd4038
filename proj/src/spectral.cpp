#include "elab/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace elab::spectral {

std::vector<double> walk_operator_apply(const GroupTable& T, const SparseMeasure& mu,
                                        const std::vector<double>& f) {
    WalkOperator op(T, mu);
    std::vector<double> out(f.size());
    op.apply(f.data(), out.data());
    return out;
}

WalkOperator::WalkOperator(const GroupTable& T, const SparseMeasure& mu) : n_(T.size()) {
    for (size_t k = 0; k < mu.idx.size(); ++k) {
        double w = mu.exact ? double(mu.num[k]) / double(mu.den) : mu.w[k];
        weights_.push_back(w);
        u32 ginv = T.inv(mu.idx[k]);
        std::vector<u32> perm(n_);
        for (u32 x = 0; x < n_; ++x) perm[x] = T.mul(ginv, x);
        perms_.push_back(std::move(perm));
    }
    // connectivity under the support
    std::vector<char> seen(n_, 0);
    std::vector<u32> frontier{0};
    seen[0] = 1;
    size_t total = 1;
    while (!frontier.empty()) {
        std::vector<u32> next;
        for (u32 x : frontier)
            for (const auto& perm : perms_) {
                u32 y = perm[x];
                if (!seen[y]) {
                    seen[y] = 1;
                    ++total;
                    next.push_back(y);
                }
            }
        frontier = std::move(next);
    }
    connected_ = (total == n_);
}

void WalkOperator::apply(const double* in, double* out) const {
    std::fill(out, out + n_, 0.0);
    for (size_t k = 0; k < weights_.size(); ++k) {
        const double w = weights_[k];
        const auto& perm = perms_[k];
        for (size_t x = 0; x < n_; ++x) out[x] += w * in[perm[x]];
    }
}

std::pair<double, double> cheeger_bounds(double lambda2) {
    if (std::abs(lambda2) > 1 + 1e-12) throw domain_error("cheeger_bounds: |lambda2| > 1");
    double g = std::max(0.0, 1.0 - lambda2);
    return {g / 2.0, std::sqrt(2.0 * g)};
}

namespace {

void deflate_mean(std::vector<double>& v) {
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    for (double& x : v) x -= mean;
}

double norm2(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct ExtremePair {
    double value = 0;
    std::vector<double> vec;
    double residual = 0;
};

// Thick-restart Lanczos on the mean-zero subspace, converging both spectrum
// ends. The walk operator fixes constants, so mean subtraction after every
// application is an exact one-dimensional deflation.
struct LanczosResult {
    ExtremePair hi, lo;
    u32 matvecs = 0;
    bool converged = false;
};

LanczosResult thick_restart_lanczos(const WalkOperator& op, const EigenOptions& opt) {
    const size_t n = op.dim();
    const size_t m = std::min<size_t>(40, n);  // basis size
    const size_t keep_per_end = 8;
    LanczosResult res;

    std::vector<std::vector<double>> V;  // orthonormal basis, deflated
    Eigen::MatrixXd Tsmall = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> work(n), av(n);

    Rng rng(derive_seed(opt.seed, "lanczos_start"));
    std::vector<double> v0(n);
    for (double& x : v0) x = rng.unit() - 0.5;
    deflate_mean(v0);
    double nv = norm2(v0);
    if (nv == 0) throw domain_error("lanczos: degenerate start vector");
    for (double& x : v0) x /= nv;
    V.push_back(v0);

    size_t kept = 0;  // restart block size at the head of the basis
    auto apply_deflated = [&](const std::vector<double>& in, std::vector<double>& out) {
        op.apply(in.data(), out.data());
        deflate_mean(out);
        ++res.matvecs;
    };

    auto full_reorth = [&](std::vector<double>& w) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : V) {
                double c = dot(w, v);
                for (size_t i = 0; i < n; ++i) w[i] -= c * v[i];
            }
    };

    while (res.matvecs < opt.max_iters) {
        // extend the basis from position V.size()-? to m columns
        size_t j = V.size() - 1;  // index of begun column (the restart vector)
        while (V.size() < m) {
            j = V.size() - 1;
            apply_deflated(V[j], av);
            double alpha = dot(av, V[j]);
            Tsmall(j, j) = alpha;
            work = av;
            full_reorth(work);
            double beta = norm2(work);
            if (beta < 1e-14) {
                // invariant subspace found; spectrum ends are exact now
                break;
            }
            if (V.size() < m) {
                Tsmall(j, j + 1) = beta;
                Tsmall(j + 1, j) = beta;
            }
            for (double& x : work) x /= beta;
            V.push_back(work);
        }
        size_t dim = V.size();
        // last column diagonal entry
        j = dim - 1;
        apply_deflated(V[j], av);
        Tsmall(j, j) = dot(av, V[j]);
        work = av;
        full_reorth(work);
        double beta_m = norm2(work);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tsmall.topLeftCorner(dim, dim));
        const auto& theta = es.eigenvalues();
        const auto& S = es.eigenvectors();

        auto ritz_residual = [&](size_t col) { return std::abs(beta_m * S(dim - 1, col)); };
        double res_hi = ritz_residual(dim - 1);
        double res_lo = ritz_residual(0);

        if ((res_hi <= opt.tol && res_lo <= opt.tol) || beta_m < 1e-14 ||
            res.matvecs >= opt.max_iters) {
            auto build = [&](size_t col, ExtremePair& out) {
                out.value = theta(col);
                out.vec.assign(n, 0.0);
                for (size_t c = 0; c < dim; ++c) {
                    double s = S(c, col);
                    for (size_t i = 0; i < n; ++i) out.vec[i] += s * V[c][i];
                }
                apply_deflated(out.vec, av);
                double vn = norm2(out.vec);
                double rn = 0;
                for (size_t i = 0; i < n; ++i) {
                    double d = av[i] - out.value * out.vec[i];
                    rn += d * d;
                }
                out.residual = std::sqrt(rn) / (vn > 0 ? vn : 1.0);
            };
            build(dim - 1, res.hi);
            build(0, res.lo);
            res.converged = (res.hi.residual <= opt.tol * 10 && res.lo.residual <= opt.tol * 10);
            return res;
        }

        // thick restart: keep extreme Ritz vectors from both ends
        size_t k_lo = std::min(keep_per_end, dim / 2);
        size_t k_hi = std::min(keep_per_end, dim - k_lo);
        std::vector<size_t> keep_cols;
        for (size_t c = 0; c < k_lo; ++c) keep_cols.push_back(c);
        for (size_t c = dim - k_hi; c < dim; ++c) keep_cols.push_back(c);

        std::vector<std::vector<double>> Y;
        std::vector<double> new_theta, new_b;
        for (size_t col : keep_cols) {
            std::vector<double> y(n, 0.0);
            for (size_t c = 0; c < dim; ++c) {
                double s = S(c, col);
                for (size_t i = 0; i < n; ++i) y[i] += s * V[c][i];
            }
            Y.push_back(std::move(y));
            new_theta.push_back(theta(col));
            new_b.push_back(beta_m * S(dim - 1, col));
        }
        std::vector<double> r = work;  // residual direction, already orthogonal
        for (double& x : r) x /= beta_m;

        V.clear();
        V = std::move(Y);
        V.push_back(std::move(r));
        kept = V.size() - 1;
        Tsmall.setZero();
        for (size_t i = 0; i < kept; ++i) {
            Tsmall(i, i) = new_theta[i];
            Tsmall(i, kept) = new_b[i];
            Tsmall(kept, i) = new_b[i];
        }
        (void)kept;
    }
    return res;
}

}  // namespace

SpectralReport lambda2(const GroupTable& T, const SparseMeasure& mu, const EigenOptions& opt) {
    if (!walk::is_symmetric(mu, T)) throw domain_error("lambda2: measure must be symmetric");
    SpectralReport rep;
    rep.q = T.q.q;
    rep.order = T.size();
    rep.seed = opt.seed;

    const size_t n = T.size();
    if (n == 1) {
        rep.method = "trivial";
        rep.lambda2 = 0;
        rep.opnorm0 = 0;
        rep.gap = 1;
        std::tie(rep.cheeger_lower, rep.cheeger_upper) = cheeger_bounds(0);
        return rep;
    }

    WalkOperator op(T, mu);
    rep.connected = op.connected();

    std::string method = opt.method;
    if (method.empty()) method = (n <= opt.dense_threshold) ? "dense" : "lanczos";
    rep.method = method;

    if (method == "dense") {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        {
            std::vector<double> e(n, 0.0), col(n);
            for (size_t jcol = 0; jcol < n; ++jcol) {
                e[jcol] = 1.0;
                op.apply(e.data(), col.data());
                for (size_t i = 0; i < n; ++i) M(i, jcol) = col[i];
                e[jcol] = 0.0;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        const auto& ev = es.eigenvalues();
        // drop one copy of the top (constant) eigenvalue; if disconnected the
        // report still carries the flag
        rep.lambda2 = ev(n - 2);
        double lam_min = ev(0);
        rep.opnorm0 = std::max(std::abs(lam_min), std::abs(rep.lambda2));
        rep.gap = 1.0 - rep.lambda2;
        Eigen::VectorXd v = es.eigenvectors().col(n - 2);
        Eigen::VectorXd r = M * v - rep.lambda2 * v;
        rep.residual = r.norm() / v.norm();
    } else if (method == "lanczos") {
        LanczosResult lr = thick_restart_lanczos(op, opt);
        if (!lr.converged)
            throw invariant_violation("lambda2: lanczos failed to converge within the cap");
        rep.lambda2 = lr.hi.value;
        rep.opnorm0 = std::max(std::abs(lr.lo.value), std::abs(lr.hi.value));
        rep.gap = 1.0 - rep.lambda2;
        rep.residual = std::max(lr.hi.residual, lr.lo.residual);
    } else if (method == "power") {
        // deflated power iteration on T + I for the top of the spectrum and
        // on -T + I for the bottom
        auto power_extreme = [&](double sign) {
            Rng rng(derive_seed(opt.seed, sign > 0 ? "power_hi" : "power_lo"));
            std::vector<double> v(n), av(n);
            for (double& x : v) x = rng.unit() - 0.5;
            deflate_mean(v);
            double nv = norm2(v);
            for (double& x : v) x /= nv;
            double theta = 0;
            double resid = 1;
            for (u32 it = 0; it < opt.max_iters && resid > opt.tol; ++it) {
                op.apply(v.data(), av.data());
                deflate_mean(av);
                std::vector<double> shifted(n);
                for (size_t i = 0; i < n; ++i) shifted[i] = sign * av[i] + v[i];
                double ns = norm2(shifted);
                if (ns == 0) break;
                for (size_t i = 0; i < n; ++i) shifted[i] /= ns;
                op.apply(shifted.data(), av.data());
                deflate_mean(av);
                theta = dot(av, shifted);
                double rn = 0;
                for (size_t i = 0; i < n; ++i) {
                    double d = av[i] - theta * shifted[i];
                    rn += d * d;
                }
                resid = std::sqrt(rn);
                v = std::move(shifted);
            }
            return std::make_pair(theta, resid);
        };
        auto [hi, res_hi] = power_extreme(+1.0);
        auto [lo, res_lo] = power_extreme(-1.0);
        rep.lambda2 = hi;
        rep.opnorm0 = std::max(std::abs(hi), std::abs(lo));
        rep.gap = 1.0 - rep.lambda2;
        rep.residual = std::max(res_hi, res_lo);
    } else {
        throw config_error("lambda2: unknown method '" + method + "'");
    }
    std::tie(rep.cheeger_lower, rep.cheeger_upper) = cheeger_bounds(rep.lambda2);
    return rep;
}

u64 diameter(const GroupTable& T) {
    u64 best = 0;
    for (u32 wl : T.word_length) {
        if (wl == UINT32_MAX) throw domain_error("diameter: S does not generate the table");
        best = std::max<u64>(best, wl);
    }
    return best;
}

FamilyScan family_scan(const grp::GeneratorSet& S, const std::vector<u64>& q_list, u64 group_cap,
                       const EigenOptions& opt) {
    FamilyScan scan;
    double sxx = 0, sxy = 0;
    double min_gap = 2, min_norm_gap = 2;
    for (u64 q : q_list) {
        try {
            grp::GroupTable T = grp::enumerate(S, modq::factorize(q), group_cap);
            std::vector<u32> atoms;
            for (const auto& g : T.gens) atoms.push_back(*T.index_of(g));
            SparseMeasure mu = SparseMeasure::uniform_on(atoms);
            SpectralReport rep = lambda2(T, mu, opt);
            rep.diameter = diameter(T);
            scan.reports.push_back(rep);
            if (q >= 2) {
                double lx = std::log(double(q));
                sxx += lx * lx;
                sxy += lx * double(rep.diameter);
            }
            min_gap = std::min(min_gap, rep.gap);
            min_norm_gap = std::min(min_norm_gap, 1.0 - rep.opnorm0);
        } catch (const std::exception& e) {
            scan.failures.emplace_back(q, e.what());
        }
    }
    scan.fitted_C = sxx > 0 ? sxy / sxx : 0;
    for (const auto& rep : scan.reports)
        if (rep.q >= 2)
            scan.max_fit_residual = std::max(
                scan.max_fit_residual,
                std::abs(double(rep.diameter) - scan.fitted_C * std::log(double(rep.q))));
    scan.min_gap = scan.reports.empty() ? 0 : min_gap;
    scan.min_norm_gap = scan.reports.empty() ? 0 : min_norm_gap;
    return scan;
}

}  // namespace elab::spectral
