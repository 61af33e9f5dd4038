#pragma once

#include <string>
#include <vector>

#include "elab/walk.hpp"

namespace elab::spectral {

using grp::GroupTable;
using walk::SparseMeasure;

struct SpectralReport {
    u64 q = 1;
    u64 order = 1;
    double lambda2 = 0;   // largest eigenvalue of T_mu on mean-zero functions
    double opnorm0 = 0;   // max(|lambda_min|, lambda2) on mean-zero functions
    double gap = 1;       // 1 - lambda2
    u64 diameter = 0;
    std::string method;   // "dense" | "lanczos" | "power" | "trivial"
    double residual = 0;
    double cheeger_lower = 0, cheeger_upper = 0;
    u64 seed = 0;
    bool connected = true;
};

/// (T_mu f)(x) = sum_g mu(g) f(g^{-1} x). Linear, fixes constants,
/// self-adjoint for symmetric mu.
std::vector<double> walk_operator_apply(const GroupTable& T, const SparseMeasure& mu,
                                        const std::vector<double>& f);

/// Precomputed-permutation form of the walk operator for iterative solvers.
class WalkOperator {
  public:
    WalkOperator(const GroupTable& T, const SparseMeasure& mu);
    void apply(const double* in, double* out) const;
    size_t dim() const { return n_; }
    bool connected() const { return connected_; }

  private:
    size_t n_;
    std::vector<double> weights_;
    std::vector<std::vector<u32>> perms_;  // x -> idx(g^{-1} x) per atom
    bool connected_ = true;
};

struct EigenOptions {
    double tol = 1e-10;          // residual tolerance for iterative methods
    u32 max_iters = 40000;       // matvec budget
    u64 seed = 1;                // start-vector seed (recorded in reports)
    u64 dense_threshold = 4096;  // dense solve at or below this order
    std::string method;          // "", "dense", "lanczos", or "power" to force
};

/// Second eigenvalue data for a symmetric measure. Throws domain_error for
/// non-symmetric mu; flags multiple components instead of failing.
SpectralReport lambda2(const GroupTable& T, const SparseMeasure& mu, const EigenOptions& opt);

/// Max over elements of the BFS distance from the identity (vertex
/// transitivity makes single-source sufficient). S must be symmetric and
/// generate the table.
u64 diameter(const GroupTable& T);

/// Standard discrete Cheeger bounds for the normalized walk:
/// lower = (1 - lambda2)/2, upper = sqrt(2 (1 - lambda2)).
std::pair<double, double> cheeger_bounds(double lambda2);

struct FamilyScan {
    std::vector<SpectralReport> reports;
    std::vector<std::pair<u64, std::string>> failures;  // (q, reason)
    double fitted_C = 0;       // LS fit of diameter vs log q through the origin
    double max_fit_residual = 0;
    double min_gap = 0;        // min over the family of 1 - lambda2
    double min_norm_gap = 0;   // min over the family of 1 - opnorm0
};

/// Per-q spectral reports with a fitted diameter constant. Failures are
/// recorded and the scan continues.
FamilyScan family_scan(const grp::GeneratorSet& S, const std::vector<u64>& q_list, u64 group_cap,
                       const EigenOptions& opt);

}  // namespace elab::spectral
