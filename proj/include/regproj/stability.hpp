#pragma once

#include "regproj/operators.hpp"
#include "regproj/spaces.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace regproj {

/// Estimate of a supremum. Search results are lower bounds; `method` says which.
///   exact_p2       closed form for p = r = 2
///   exact_sampled  exact over the sampling grid
///   exact_vertices exact by enumerating sign vectors
///   random_search  lower bound, `evaluations` ratios tried
struct Estimate {
    double value = 0.0;
    std::string method;
    long evaluations = 0;
    std::vector<double> argmax;  ///< maximizing coefficient or weight vector
};

struct StabilityOptions {
    int gauss_order = 16;
    int samples_per_cell = 64;
    long budget = 2000;
    std::uint64_t seed = 1;
    /// kappa_tilde enumerates all 2^(nk) sign vectors up to this dimension.
    int max_enumeration_dim = 16;
};

/// kappa_n = sup ||w|| / ||Aw|| over the spline space; E must be L^p, F is
/// L^r or C. Exact for p = r = 2, otherwise a random-search lower bound.
/// `start` (optional coefficients) seeds the search.
Estimate estimate_kappa(const Kernel& kernel, const Mesh& mesh, int trial_k, const SpaceSpec& E, const SpaceSpec& F,
                        const StabilityOptions& options = {}, const std::vector<double>& start = {});

/// tau_n = sup ||Aw||_C / max_nodes |Aw|, as the largest l1 row norm of
/// D A_n^{-1} over the dense sampling grid.
Estimate estimate_tau_n(const Kernel& kernel, const CollocationScheme& scheme, int trial_k,
                        const StabilityOptions& options = {});

/// kappa_tilde_n = ||A_n^{-1}|| from (node values, max norm) to E = L^p.
/// The supremum of a convex function over the cube is attained at a vertex.
Estimate estimate_kappa_tilde(const Kernel& kernel, const CollocationScheme& scheme, int trial_k, const SpaceSpec& E,
                              const StabilityOptions& options = {});

/// kappa*_n = sup sum|lambda| / ||A* sum lambda_i delta_{t_i}||_{E*}, lower bound.
Estimate estimate_kappa_star(const Kernel& kernel, const CollocationScheme& scheme, const SpaceSpec& E,
                             const StabilityOptions& options = {});

struct StabilityReport {
    int n = 0;
    double kappa = 0.0;  ///< F = C, lower bound
    double tau = 0.0;
    double kappa_tilde = 0.0;
    double kappa_tilde_upper = 0.0;  ///< tau * kappa
    double kappa_star = 0.0;
    std::string method;
    long budget = 0;
    std::uint64_t seed = 0;
};

/// All four constants for one collocation scheme, E = L^p and F = C.
StabilityReport stability_report(const Kernel& kernel, const CollocationScheme& scheme, int trial_k,
                                 const SpaceSpec& E, const StabilityOptions& options = {});

struct ChainCheck {
    bool passed = false;
    double lower_slack = 0.0;  ///< kappa_tilde - kappa
    double upper_slack = 0.0;  ///< tau kappa - kappa_tilde
    std::string diagnostics;
};

/// kappa_n <= kappa_tilde_n <= tau_n kappa_n, with relative tolerance.
ChainCheck kappa_chain_check(const StabilityReport& report, double tolerance = 1e-9);

std::string stability_csv_header();
std::string stability_csv_row(const StabilityReport& report);

/// Least-squares slope of log(values) against log(ns).
double loglog_slope(const std::vector<double>& ns, const std::vector<double>& values);

}  // namespace regproj
