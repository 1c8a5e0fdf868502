#include "regproj/stability.hpp"

#include "regproj/quadrature.hpp"
#include "regproj/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace regproj {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Weighted l^p norm of a sampled vector (p < infinity) or max norm (p = 0).
struct NormSpec {
    double p = 0.0;
    VectorXd w;

    double operator()(const VectorXd& v) const {
        if (p == 0.0) return v.lpNorm<Eigen::Infinity>();
        if (p == 2.0) return std::sqrt((w.array() * v.array().square()).sum());
        return std::pow((w.array() * v.array().abs().pow(p)).sum(), 1.0 / p);
    }
};

VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Values of the trial basis at the Gauss points of each cell.
MatrixXd basis_matrix(const Mesh& mesh, int k, int order, VectorXd& weights) {
    const std::vector<double> bp = mesh.breakpoints();
    const QuadratureGrid grid = composite_gauss(bp, order);
    const auto N = static_cast<Eigen::Index>(grid.size());
    MatrixXd P = MatrixXd::Zero(N, mesh.cells() * k);
    std::vector<double> vals(k);
    for (Eigen::Index i = 0; i < N; ++i) {
        const int cell = mesh.cell_of(grid.points[i]);
        basis_values(mesh.left(cell), mesh.right(cell), grid.points[i], vals);
        for (int j = 0; j < k; ++j) P(i, cell * k + j) = vals[j];
    }
    weights = to_vector(grid.weights);
    return P;
}

std::vector<double> dense_grid(const Mesh& mesh, int per_cell, const std::vector<double>& extra) {
    const int m = mesh.cells() * per_cell;
    std::vector<double> pts(m + 1);
    for (int i = 0; i <= m; ++i) pts[i] = static_cast<double>(i) / m;
    return merge_breakpoints(pts, extra, 0.0);
}

/// Ratio operator for spline coefficients: numerator ||P x||, denominator ||M x||.
struct DiscreteRatio {
    MatrixXd P;
    NormSpec num;
    MatrixXd M;
    NormSpec den;

    double operator()(const VectorXd& x) const {
        const double d = den(M * x);
        if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
        return num(P * x) / d;
    }
};

/// Maximizes a degree-0 homogeneous ratio. One deterministic sequence: every
/// fifth evaluation is a coordinate-ascent step from the incumbent, the rest
/// are Gaussian directions, so a larger budget extends a smaller one.
template <class Ratio>
Estimate random_search(int dim, const Ratio& ratio, long budget, std::uint64_t seed, const std::vector<double>& start) {
    Rng rng(seed, static_cast<std::uint64_t>(dim));
    Estimate est;
    est.method = "random_search";
    VectorXd best = VectorXd::Zero(dim);
    double best_value = -1.0;
    auto consider = [&](const VectorXd& x) {
        const double v = ratio(x);
        ++est.evaluations;
        if (!std::isfinite(v)) throw std::domain_error("stability: operator is singular on the trial space");
        if (v > best_value) {
            best_value = v;
            best = x;
            return true;
        }
        return false;
    };
    if (!start.empty() && static_cast<int>(start.size()) == dim) consider(to_vector(start));
    double step = 0.5;
    int coord = 0, failures = 0;
    bool negative = false;
    while (est.evaluations < std::max(1L, budget)) {
        if (best_value >= 0.0 && (est.evaluations + 1) % 5 == 0) {
            VectorXd x = best;
            const double size = std::max(best.lpNorm<Eigen::Infinity>(), 1e-300);
            x(coord) += (negative ? -step : step) * size;
            if (consider(x)) {
                failures = 0;
            } else if (++failures >= 2 * dim) {
                step *= 0.5;
                failures = 0;
            }
            negative = !negative;
            if (!negative) coord = (coord + 1) % dim;
        } else {
            VectorXd x(dim);
            for (int i = 0; i < dim; ++i) x(i) = rng.normal();
            consider(x);
        }
    }
    est.value = best_value;
    const double nrm = best.norm();
    est.argmax.resize(dim);
    for (int i = 0; i < dim; ++i) est.argmax[i] = nrm > 0.0 ? best(i) / nrm : 0.0;
    return est;
}

NormSpec solution_norm(const SpaceSpec& E, VectorXd w) {
    if (!E.is_lp()) throw std::invalid_argument("stability: E must be an L^p space");
    return {E.p, std::move(w)};
}

MatrixXd collocation_inverse(const Kernel& kernel, const CollocationScheme& scheme, int trial_k) {
    const MatrixXd A = collocation_matrix(kernel, scheme, trial_k);
    const Eigen::PartialPivLU<MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-14)) throw std::domain_error("stability: collocation matrix is singular");
    return lu.inverse();
}

}  // namespace

Estimate estimate_kappa(const Kernel& kernel, const Mesh& mesh, int trial_k, const SpaceSpec& E, const SpaceSpec& F,
                        const StabilityOptions& options, const std::vector<double>& start) {
    VectorXd w;
    const MatrixXd P = basis_matrix(mesh, trial_k, options.gauss_order, w);
    if (F.is_lp()) {
        const QuadratureGrid grid = composite_gauss(mesh.breakpoints(), options.gauss_order);
        const MatrixXd M = forward_matrix(kernel, mesh, trial_k, grid.points);
        const VectorXd wf = to_vector(grid.weights);
        if (E.is_lp() && E.p == 2.0 && F.p == 2.0) {
            // the basis is orthonormal, so the mass matrix is the identity
            const MatrixXd G = M.transpose() * wf.asDiagonal() * M;
            const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(G);
            const double lmin = eig.eigenvalues()(0);
            if (!(lmin > 1e-300)) throw std::domain_error("estimate_kappa: singular Gram matrix");
            Estimate est{1.0 / std::sqrt(lmin), "exact_p2", 1, {}};
            const VectorXd v = eig.eigenvectors().col(0);
            est.argmax.assign(v.data(), v.data() + v.size());
            return est;
        }
        return random_search(mesh.cells() * trial_k, DiscreteRatio{P, solution_norm(E, w), M, {F.p, wf}},
                             options.budget, options.seed, start);
    }
    const std::vector<double> pts = dense_grid(mesh, options.samples_per_cell, {});
    const MatrixXd D = forward_matrix(kernel, mesh, trial_k, pts);
    return random_search(mesh.cells() * trial_k, DiscreteRatio{P, solution_norm(E, w), D, {0.0, {}}}, options.budget,
                         options.seed, start);
}

Estimate estimate_tau_n(const Kernel& kernel, const CollocationScheme& scheme, int trial_k,
                        const StabilityOptions& options) {
    const MatrixXd X = collocation_inverse(kernel, scheme, trial_k);
    const std::vector<double> pts = dense_grid(scheme.mesh(), options.samples_per_cell, scheme.nodes());
    const MatrixXd R = forward_matrix(kernel, scheme.mesh(), trial_k, pts) * X;
    Eigen::Index row = 0;
    const double value = R.cwiseAbs().rowwise().sum().maxCoeff(&row);
    Estimate est{std::max(1.0, value), "exact_sampled", static_cast<long>(pts.size()), {}};
    for (Eigen::Index j = 0; j < R.cols(); ++j) est.argmax.push_back(R(row, j) >= 0.0 ? 1.0 : -1.0);
    return est;
}

Estimate estimate_kappa_tilde(const Kernel& kernel, const CollocationScheme& scheme, int trial_k, const SpaceSpec& E,
                              const StabilityOptions& options) {
    const MatrixXd X = collocation_inverse(kernel, scheme, trial_k);
    VectorXd w;
    const MatrixXd PX = basis_matrix(scheme.mesh(), trial_k, options.gauss_order, w) * X;
    const NormSpec norm = solution_norm(E, w);
    const int m = static_cast<int>(X.cols());
    Estimate est;
    std::vector<double> sigma(m, 1.0), best_sigma;
    double best = -1.0;
    if (m <= options.max_enumeration_dim) {
        // Gray code over sign vectors with sigma_0 = +1 (the norm is even)
        est.method = "exact_vertices";
        VectorXd v = PX.rowwise().sum();
        const std::uint64_t count = std::uint64_t{1} << (m - 1);
        for (std::uint64_t g = 0; g < count; ++g) {
            if (g > 0) {
                const int bit = std::countr_zero(g) + 1;
                sigma[bit] = -sigma[bit];
                v += 2.0 * sigma[bit] * PX.col(bit);
            }
            const double value = norm(v);
            ++est.evaluations;
            if (value > best) {
                best = value;
                best_sigma = sigma;
            }
        }
    } else {
        // random vertices followed by single-flip ascent
        est.method = "random_search";
        Rng rng(options.seed, static_cast<std::uint64_t>(m));
        while (est.evaluations < std::max(1L, options.budget)) {
            for (double& s : sigma) s = rng.uniform() < 0.5 ? -1.0 : 1.0;
            VectorXd v = PX * to_vector(sigma);
            double value = norm(v);
            ++est.evaluations;
            bool improved = true;
            while (improved && est.evaluations < options.budget) {
                improved = false;
                for (int j = 0; j < m && est.evaluations < options.budget; ++j) {
                    const VectorXd trial = v - 2.0 * sigma[j] * PX.col(j);
                    const double tv = norm(trial);
                    ++est.evaluations;
                    if (tv > value) {
                        value = tv;
                        v = trial;
                        sigma[j] = -sigma[j];
                        improved = true;
                    }
                }
            }
            if (value > best) {
                best = value;
                best_sigma = sigma;
            }
        }
    }
    est.value = best;
    const VectorXd x = X * to_vector(best_sigma);
    est.argmax.assign(x.data(), x.data() + x.size());
    return est;
}

Estimate estimate_kappa_star(const Kernel& kernel, const CollocationScheme& scheme, const SpaceSpec& E,
                             const StabilityOptions& options) {
    if (!E.is_lp()) throw std::invalid_argument("estimate_kappa_star: E must be an L^p space");
    const std::vector<double> nodes = scheme.nodes();
    std::vector<double> bp = merge_breakpoints(scheme.mesh().breakpoints(), nodes);
    const QuadratureGrid grid = composite_gauss(bp, options.gauss_order);
    const auto N = static_cast<Eigen::Index>(grid.size());
    const auto m = static_cast<Eigen::Index>(nodes.size());
    MatrixXd Bt(N, m);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < m; ++j) Bt(i, j) = kernel(nodes[j], grid.points[i]);
    const NormSpec dual_norm{E.p_star(), to_vector(grid.weights)};
    auto ratio = [&](const VectorXd& lambda) {
        const double l1 = lambda.lpNorm<1>();
        if (!(l1 > 0.0)) throw std::invalid_argument("estimate_kappa_star: all-zero weights");
        const double d = dual_norm(Bt * lambda);
        return d > 0.0 ? l1 / d : std::numeric_limits<double>::infinity();
    };
    Estimate est = random_search(static_cast<int>(m), ratio, options.budget, options.seed, {});
    double l1 = 0.0;
    for (double x : est.argmax) l1 += std::abs(x);
    if (l1 > 0.0)
        for (double& x : est.argmax) x /= l1;
    return est;
}

StabilityReport stability_report(const Kernel& kernel, const CollocationScheme& scheme, int trial_k,
                                 const SpaceSpec& E, const StabilityOptions& options) {
    StabilityReport rep;
    rep.n = scheme.mesh().cells();
    rep.budget = options.budget;
    rep.seed = options.seed;
    const Estimate tau = estimate_tau_n(kernel, scheme, trial_k, options);
    const Estimate kt = estimate_kappa_tilde(kernel, scheme, trial_k, E, options);
    // the kappa_tilde maximizer w satisfies ||w|| / ||Aw||_C >= kappa_tilde / tau
    const Estimate kappa = estimate_kappa(kernel, scheme.mesh(), trial_k, E, SpaceSpec::continuous(), options, kt.argmax);
    const Estimate ks = estimate_kappa_star(kernel, scheme, E, options);
    rep.tau = tau.value;
    rep.kappa_tilde = kt.value;
    rep.kappa = kappa.value;
    rep.kappa_tilde_upper = rep.tau * rep.kappa;
    rep.kappa_star = ks.value;
    rep.method = kt.method == "exact_vertices" ? "random_search+exact_vertices" : "random_search";
    return rep;
}

ChainCheck kappa_chain_check(const StabilityReport& report, double tolerance) {
    ChainCheck c;
    c.lower_slack = report.kappa_tilde - report.kappa;
    c.upper_slack = report.kappa_tilde_upper - report.kappa_tilde;
    const double tol = tolerance * std::max(1.0, report.kappa_tilde);
    const bool lower = c.lower_slack >= -tol;
    const bool upper = c.upper_slack >= -tol;
    c.passed = lower && upper;
    char buf[256];
    std::snprintf(buf, sizeof buf, "kappa <= kappa_tilde: %s (slack %.3e); kappa_tilde <= tau*kappa: %s (slack %.3e)",
                  lower ? "ok" : "violated", c.lower_slack, upper ? "ok" : "violated", c.upper_slack);
    c.diagnostics = buf;
    return c;
}

std::string stability_csv_header() { return "n,kappa,tau,kappa_tilde_upper,kappa_star,method,budget,seed,kappa_tilde\n"; }

std::string stability_csv_row(const StabilityReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%d,%.10e,%.10e,%.10e,%.10e,%s,%ld,%llu,%.10e\n", r.n, r.kappa, r.tau,
                  r.kappa_tilde_upper, r.kappa_star, r.method.c_str(), r.budget,
                  static_cast<unsigned long long>(r.seed), r.kappa_tilde);
    return buf;
}

double loglog_slope(const std::vector<double>& ns, const std::vector<double>& values) {
    if (ns.size() != values.size() || ns.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double x = std::log(ns[i]), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace regproj
