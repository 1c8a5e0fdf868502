#include "regproj/solvers.hpp"

#include "regproj/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace regproj {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double signed_power(double x, double e) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), e), x);
}

VectorXd to_vector(std::span<const double> v) {
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Uniform points with `per_cell` samples per mesh cell, plus extra points.
std::vector<double> dense_points(const Mesh& mesh, int per_cell, std::span<const double> extra) {
    const int m = mesh.cells() * per_cell;
    std::vector<double> pts(m + 1);
    for (int i = 0; i <= m; ++i) pts[i] = static_cast<double>(i) / m;
    return merge_breakpoints(pts, extra, 0.0);
}

/// Solves H d = -g for a symmetric positive semidefinite H, adding a ridge if needed.
VectorXd newton_direction(const MatrixXd& H, const VectorXd& g) {
    Eigen::LDLT<MatrixXd> ldlt(H);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        VectorXd d = ldlt.solve(-g);
        if (d.allFinite() && d.dot(g) < 0.0) return d;
    }
    const double diag = std::max(H.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double ridge = 1e-14; ridge < 1e2; ridge *= 100.0) {
        MatrixXd Hr = H;
        Hr.diagonal().array() += ridge * diag;
        Eigen::LDLT<MatrixXd> reg(Hr);
        if (reg.info() != Eigen::Success) continue;
        VectorXd d = reg.solve(-g);
        if (d.allFinite() && d.dot(g) < 0.0) return d;
    }
    return -g;
}

/// Damped Newton on a smooth convex objective; `eval` fills value, gradient and
/// (when requested) Hessian.
struct NewtonOutcome {
    VectorXd x;
    int iterations = 0;
    double gradient_norm = 0.0;
};

template <class Eval>
NewtonOutcome damped_newton(VectorXd x, Eval&& eval, double target, int max_iter) {
    VectorXd g;
    MatrixXd H;
    double value = eval(x, g, &H);
    NewtonOutcome out;
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        if (g.lpNorm<Eigen::Infinity>() <= target) break;
        const VectorXd d = newton_direction(H, g);
        const double slope = g.dot(d);
        double step = 1.0;
        bool accepted = false;
        VectorXd g_trial;
        MatrixXd H_trial;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            const VectorXd trial = x + step * d;
            const double v = eval(trial, g_trial, &H_trial);
            if (!std::isfinite(v)) continue;
            const bool armijo = v <= value + 1e-4 * step * slope;
            // near the optimum the objective stalls in rounding; accept on gradient decrease
            const bool flat = v <= value + 1e-14 * std::abs(value) &&
                              g_trial.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>();
            if (armijo || flat) {
                x = trial;
                value = v;
                g = g_trial;
                H = H_trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    out.gradient_norm = g.lpNorm<Eigen::Infinity>();
    out.x = std::move(x);
    return out;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void fill_residuals(SolveResult& result, std::span<const double> nodes, std::span<const double> f_values,
                    const std::function<double(double)>& f_reference, int samples_per_cell) {
    double rn = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        rn = std::max(rn, std::abs(forward_value(result, nodes[i]) - f_values[i]));
    result.residual_nodes = rn;
    result.residual_C = residual(result, f_reference, SpaceSpec::continuous(), samples_per_cell);
    result.residual_C = std::max(result.residual_C, rn);
}

}  // namespace

double NodalData::operator()(double t) const {
    if (nodes.empty()) return 0.0;
    if (t <= nodes.front()) return values.front();
    if (t >= nodes.back()) return values.back();
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    const double lambda = (t - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
    return (1.0 - lambda) * values[i - 1] + lambda * values[i];
}

double NodalData::at_node(double t) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (std::abs(nodes[i] - t) <= 1e-12) return values[i];
    throw std::invalid_argument("NodalData: t is not a data node");
}

DualSolution::DualSolution(Kernel kernel, DiracCombo v, SpaceSpec space, std::vector<double> breakpoints,
                           int gauss_order)
    : kernel_(std::move(kernel)),
      v_(std::move(v)),
      space_(space),
      breakpoints_(std::move(breakpoints)),
      order_(gauss_order),
      samples_(sample([](double) { return 0.0; }, gauss_sampling_grid(breakpoints_, gauss_order))) {
    const auto grid = samples_.grid();
    std::vector<double> z(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) z[i] = adjoint_apply(kernel_, v_, grid[i]);
    const SampledFunction zs = samples_.with_values(z);
    const double nrm = lp_norm(zs, space_.p_star());
    factor_ = nrm > 0.0 ? std::pow(nrm, space_.q_star() - space_.p_star()) : 0.0;
    for (double& x : z) x = map_value(x);
    samples_ = samples_.with_values(std::move(z));
}

double DualSolution::map_value(double z) const { return factor_ * signed_power(z, space_.p_star() - 1.0); }

double DualSolution::eval(double s) const { return map_value(adjoint_apply(kernel_, v_, s)); }

double DualSolution::forward(double t) const {
    const auto grid = samples_.grid();
    const auto vals = samples_.values();
    const auto w = samples_.weights();
    const GaussRule& rule = gauss_legendre(order_);
    auto split_integral = [&](double a, double b) {
        return integrate([&](double s) { return kernel_(t, s) * eval(s); }, a, b, order_);
    };
    double sum = 0.0;
    for (std::size_t piece = 0; piece + 1 < breakpoints_.size(); ++piece) {
        const double a = breakpoints_[piece], b = breakpoints_[piece + 1];
        if (kernel_.is_volterra() && a >= t) break;
        if (t > a && t < b) {
            sum += split_integral(a, t);
            if (!kernel_.is_volterra()) sum += split_integral(t, b);
            continue;
        }
        const std::size_t base = 1 + piece * rule.nodes.size();
        for (std::size_t g = 0; g < rule.nodes.size(); ++g)
            sum += w[base + g] * kernel_(t, grid[base + g]) * vals[base + g];
    }
    return sum;
}

const PiecewisePoly& Approximation::spline() const {
    if (const auto* p = std::get_if<PiecewisePoly>(&v_)) return *p;
    throw std::logic_error("Approximation: least-error solutions are not splines");
}

const DualSolution& Approximation::dual_solution() const {
    if (const auto* d = std::get_if<DualSolution>(&v_)) return *d;
    throw std::logic_error("Approximation: not a least-error solution");
}

double Approximation::eval(double t) const {
    return std::visit([t](const auto& u) { return u.eval(t); }, v_);
}

SampledFunction Approximation::sampled(int gauss_order) const {
    if (const auto* p = std::get_if<PiecewisePoly>(&v_)) return sample_gauss(*p, gauss_order);
    return std::get<DualSolution>(v_).sampled();
}

double forward_value(const SolveResult& result, double t) {
    if (result.u_n.is_spline()) return apply_A(result.kernel, result.u_n.spline(), t);
    return result.u_n.dual_solution().forward(t);
}

double residual(const SolveResult& result, const std::function<double(double)>& f_reference,
                const SpaceSpec& data_space, int samples_per_cell, int gauss_order) {
    if (data_space.is_lp()) {
        std::vector<double> bp = result.mesh.breakpoints();
        if (!result.u_n.is_spline()) {
            const auto dbp = result.u_n.dual_solution().breakpoints();
            bp.assign(dbp.begin(), dbp.end());
        }
        const QuadratureGrid grid = gauss_sampling_grid(bp, gauss_order);
        std::vector<double> values(grid.size());
        if (result.u_n.is_spline()) {
            const ForwardImage image(result.kernel, result.u_n.spline());
            for (std::size_t i = 0; i < grid.size(); ++i) values[i] = image(grid.points[i]) - f_reference(grid.points[i]);
        } else {
            for (std::size_t i = 0; i < grid.size(); ++i)
                values[i] = forward_value(result, grid.points[i]) - f_reference(grid.points[i]);
        }
        return lp_norm(SampledFunction(grid.points, std::move(values), grid.weights), data_space.p);
    }
    std::vector<double> extra;
    if (result.dual) extra = result.dual->nodes;
    const std::vector<double> pts = dense_points(result.mesh, samples_per_cell, extra);
    double m = 0.0;
    if (result.u_n.is_spline()) {
        const ForwardImage image(result.kernel, result.u_n.spline());
        for (double t : pts) m = std::max(m, std::abs(image(t) - f_reference(t)));
    } else {
        for (double t : pts) m = std::max(m, std::abs(forward_value(result, t) - f_reference(t)));
    }
    return m;
}

SolveResult solve_collocation(const Kernel& kernel, const CollocationScheme& scheme, int trial_k,
                              std::span<const double> f_values, const SolverOptions& options) {
    if (scheme.nodes_per_cell() != trial_k)
        throw std::invalid_argument("solve_collocation: nodes per cell must equal the trial order");
    if (f_values.size() != static_cast<std::size_t>(scheme.node_count()))
        throw std::invalid_argument("solve_collocation: one data value per node required");
    for (double f : f_values)
        if (!std::isfinite(f)) throw std::invalid_argument("solve_collocation: non-finite data");

    const std::vector<double> nodes = scheme.nodes();
    const MatrixXd M = collocation_matrix(kernel, scheme, trial_k);
    const Eigen::PartialPivLU<MatrixXd> lu(M);
    const double rcond = lu.rcond();
    const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(rcond > 1e-14)) {
        std::ostringstream msg;
        msg << "collocation matrix is singular (condition estimate " << condition << ")";
        throw SingularSystemError(msg.str(), condition);
    }
    const VectorXd x = lu.solve(to_vector(f_values));

    SolveResult result{Approximation(PiecewisePoly(scheme.mesh(), trial_k, to_std(x))), kernel, scheme.mesh()};
    result.iterations = 1;
    result.condition_estimate = condition;
    if (kernel.under_resolved(scheme.mesh())) result.diagnostics.push_back("tabulated kernel under-resolved");

    NodalData data{nodes, {f_values.begin(), f_values.end()}};
    const std::function<double(double)> ref = options.f_reference ? options.f_reference
                                                                   : std::function<double(double)>(data);
    const VectorXd node_res = M * x - to_vector(f_values);
    result.residual_nodes = node_res.lpNorm<Eigen::Infinity>();
    result.residual_C = std::max(residual(result, ref, SpaceSpec::continuous(), options.samples_per_cell),
                                 result.residual_nodes);
    result.residual_F = result.residual_C;
    return result;
}

SolveResult solve_least_squares(const Kernel& kernel, const Mesh& mesh, int trial_k, const SampledFunction& f_delta,
                                const SpaceSpec& data_space, const SolverOptions& options) {
    if (!data_space.is_lp() || !(data_space.p > 1.0))
        throw std::invalid_argument("solve_least_squares: data space must be L^r with 1 < r < infinity");
    const double r = data_space.p;
    for (double f : f_delta.values())
        if (!std::isfinite(f)) throw std::invalid_argument("solve_least_squares: non-finite data");

    const MatrixXd M = forward_matrix(kernel, mesh, trial_k, f_delta.grid());
    const VectorXd w = to_vector(f_delta.weights());
    const VectorXd f = to_vector(f_delta.values());
    const VectorXd sw = w.cwiseSqrt();
    const double scale = std::max(1.0, lp_norm(f_delta, r));

    const MatrixXd WM = sw.asDiagonal() * M;
    const Eigen::JacobiSVD<MatrixXd> svd(WM);
    const VectorXd sv = svd.singularValues();
    const double condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(sv(sv.size() - 1) > 1e-13 * sv(0))) {
        std::ostringstream msg;
        msg << "least squares: A restricted to the trial space is rank deficient (condition " << condition << ")";
        throw SingularSystemError(msg.str(), condition);
    }
    VectorXd x = Eigen::ColPivHouseholderQR<MatrixXd>(WM).solve(sw.cwiseProduct(f));

    SolveResult result{Approximation(PiecewisePoly(mesh, trial_k, to_std(x))), kernel, mesh};
    result.condition_estimate = condition;
    result.iterations = 1;
    if (r != 2.0) {
        // Newton-consistent IRLS on (1/r) sum w (rho^2 + eps^2)^(r/2), started
        // from the r = 2 solution
        const double eps = 1e-12 * scale;
        auto eval = [&](const VectorXd& c, VectorXd& grad, MatrixXd* hess) {
            const VectorXd rho = M * c - f;
            const VectorXd s2 = rho.array().square() + eps * eps;
            const VectorXd irls = (w.array() * s2.array().pow(0.5 * r - 1.0)).matrix();
            grad = M.transpose() * irls.cwiseProduct(rho);
            if (hess) {
                const VectorXd curv = (w.array() * s2.array().pow(0.5 * r - 2.0) *
                                       ((r - 1.0) * rho.array().square() + eps * eps))
                                          .matrix();
                *hess = M.transpose() * curv.asDiagonal() * M;
            }
            return (w.array() * s2.array().pow(0.5 * r)).sum() / r;
        };
        const NewtonOutcome nt = damped_newton(x, eval, 1e-14 * std::pow(scale, r - 1.0), options.max_iter);
        x = nt.x;
        result.iterations = nt.iterations + 1;
        result.converged = nt.gradient_norm <= options.tolerance * scale;
        if (!result.converged) {
            std::ostringstream msg;
            msg << "IRLS stopped after " << nt.iterations << " iterations with gradient " << nt.gradient_norm;
            result.diagnostics.push_back(msg.str());
        }
        result.u_n = Approximation(PiecewisePoly(mesh, trial_k, to_std(x)));
    }

    const VectorXd rho = M * x - f;
    result.residual_nodes = rho.lpNorm<Eigen::Infinity>();
    result.residual_F = lp_norm(f_delta.with_values(to_std(rho)), r);
    const std::function<double(double)> ref = options.f_reference ? options.f_reference
                                                                   : std::function<double(double)>(f_delta);
    result.residual_C = residual(result, ref, SpaceSpec::continuous(), options.samples_per_cell);
    return result;
}

SolveResult solve_least_error(const Kernel& kernel, const CollocationScheme& scheme, std::span<const double> f_values,
                              const SpaceSpec& solution_space, const SolverOptions& options) {
    if (!solution_space.is_lp() || !(solution_space.p > 1.0))
        throw std::invalid_argument("solve_least_error: solution space must be L^p with 1 < p < infinity");
    if (f_values.size() != static_cast<std::size_t>(scheme.node_count()))
        throw std::invalid_argument("solve_least_error: one data value per node required");
    for (double v : f_values)
        if (!std::isfinite(v)) throw std::invalid_argument("solve_least_error: non-finite data");

    const std::vector<double> nodes = scheme.nodes();
    const std::vector<double> base =
        options.quadrature_breakpoints.empty() ? scheme.mesh().breakpoints() : options.quadrature_breakpoints;
    const std::vector<double> bp = merge_breakpoints(base, nodes);
    const QuadratureGrid grid = gauss_sampling_grid(bp, options.gauss_order);
    const auto N = static_cast<Eigen::Index>(grid.size());
    const auto m = static_cast<Eigen::Index>(nodes.size());

    // Bt(i, j) = K(t_j, s_i): samples of A* delta_{t_j}
    MatrixXd Bt(N, m);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < m; ++j) Bt(i, j) = kernel(nodes[j], grid.points[i]);
    const VectorXd w = to_vector(grid.weights);
    const VectorXd f = to_vector(f_values);
    const double scale = std::max(1.0, max_abs(f_values));

    const MatrixXd gram = Bt.transpose() * w.asDiagonal() * Bt;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues()(0), lmax = eig.eigenvalues()(m - 1);
    const double condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(lmin > 1e-15 * lmax)) {
        std::ostringstream msg;
        msg << "least error: A* is not injective on the node functionals (condition " << condition << ")";
        throw SingularSystemError(msg.str(), condition);
    }
    const Eigen::LDLT<MatrixXd> gram_ldlt(gram);
    VectorXd lambda = gram_ldlt.solve(f);

    const double ps = solution_space.p_star(), qs = solution_space.q_star();
    const double a = qs - ps;
    int iterations = 1;
    double gradient_norm = 0.0;
    double spread = 0.0;
    if (!(solution_space.p == 2.0 && solution_space.q == 2.0)) {
        // Phi(lambda) = (1/q*) ||A* lambda||^{q*} - lambda . f is convex with
        // gradient (A J_{q*}(A* lambda))(t) - f at the nodes
        auto eval = [&](const VectorXd& lam, VectorXd& grad, MatrixXd* hess) {
            const VectorXd z = Bt * lam;
            const VectorXd az = z.cwiseAbs();
            const double nrm = std::pow((w.array() * az.array().pow(ps)).sum(), 1.0 / ps);
            if (nrm == 0.0) {
                grad = -f;
                if (hess) *hess = gram * 1e-300;
                return 0.0;
            }
            const VectorXd psi = (az.array().pow(ps - 1.0) * z.array().sign()).matrix();
            const double na = std::pow(nrm, a);
            grad = Bt.transpose() * (w.cwiseProduct(psi) * na) - f;
            if (hess) {
                const double eta = 1e-10 * az.maxCoeff();
                const VectorXd curv =
                    (w.array() * na * (ps - 1.0) * (az.array().square() + eta * eta).pow(0.5 * (ps - 2.0))).matrix();
                *hess = Bt.transpose() * curv.asDiagonal() * Bt;
                if (a != 0.0) {
                    const VectorXd wb = Bt.transpose() * w.cwiseProduct(psi);
                    *hess += a * std::pow(nrm, a - ps) * wb * wb.transpose();
                }
            }
            return std::pow(nrm, qs) / qs - lam.dot(f);
        };
        // rescale the Hilbert-space start using the homogeneity of J_{q*}
        {
            VectorXd g0;
            eval(lambda, g0, nullptr);
            const VectorXd image = g0 + f;
            const double denom = image.squaredNorm();
            const double ratio = denom > 0.0 ? image.dot(f) / denom : 0.0;
            if (ratio > 0.0) lambda *= std::pow(ratio, 1.0 / (qs - 1.0));
        }
        const double target = 1e-13 * scale;
        NewtonOutcome nt = damped_newton(lambda, eval, target, options.max_iter);
        for (int s = 0; s < options.multistart; ++s) {
            const double factor = (s % 2 == 0) ? 0.5 / (1 + s / 2) : 2.0 * (1 + s / 2);
            const NewtonOutcome alt = damped_newton(VectorXd(lambda * factor), eval, target, options.max_iter);
            spread = std::max(spread, (alt.x - nt.x).lpNorm<Eigen::Infinity>());
        }
        lambda = nt.x;
        iterations = nt.iterations;
        gradient_norm = nt.gradient_norm;
    }

    DiracCombo v(nodes, to_std(lambda));
    DualSolution u(kernel, v, solution_space, bp, options.gauss_order);
    SolveResult result{Approximation(std::move(u)), kernel, scheme.mesh()};
    result.dual = std::move(v);
    result.iterations = iterations;
    result.condition_estimate = condition;
    result.multistart_spread = spread;

    NodalData data{nodes, {f_values.begin(), f_values.end()}};
    const std::function<double(double)> ref = options.f_reference ? options.f_reference
                                                                   : std::function<double(double)>(data);
    fill_residuals(result, nodes, f_values, ref, options.samples_per_cell);
    result.residual_F = result.residual_C;
    result.converged = result.residual_nodes <= options.tolerance * scale;
    if (!result.converged) {
        std::ostringstream msg;
        msg << "dual Newton stopped after " << iterations << " iterations; node residual " << result.residual_nodes
            << ", gradient " << gradient_norm;
        result.diagnostics.push_back(msg.str());
    }
    return result;
}

}  // namespace regproj
