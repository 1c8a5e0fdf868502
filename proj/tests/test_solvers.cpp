#include "regproj/quadrature.hpp"
#include "regproj/random.hpp"
#include "regproj/solvers.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace regproj;

namespace {

double l1_error(const Approximation& u, const std::function<double(double)>& g) {
    const QuadratureGrid q = composite_gauss(graded_breakpoints(64, 40), 16);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::abs(u(q.points[i]) - g(q.points[i]));
    return s;
}

std::vector<double> values_at(const std::function<double(double)>& f, const std::vector<double>& nodes) {
    std::vector<double> v;
    for (double t : nodes) v.push_back(f(t));
    return v;
}

/// int_0^1 (t_i - s)_+ (t_j - s)_+ ds in closed form.
double gram_l2(double ti, double tj) {
    const double m = std::min(ti, tj);
    return ti * tj * m - (ti + tj) * m * m / 2.0 + m * m * m / 3.0;
}

}  // namespace

TEST_CASE("collocation: exact recovery, zero data, convergence") {
    const Kernel K = Kernel::volterra(2);
    for (int n : {1, 2, 4}) {
        const CollocationScheme s(Mesh(n), {0.7, 1.0});
        SolverOptions opts;
        opts.f_reference = [](double t) { return model_rhs(1.0, 2, t); };
        const SolveResult r = solve_collocation(K, s, 2, values_at(opts.f_reference, s.nodes()), opts);
        CHECK(l1_error(r.u_n, [](double x) { return x; }) < 1e-10);
        CHECK(r.residual_nodes < 1e-12);
        CHECK(r.residual_C < 1e-12);
        CHECK(r.residual_nodes <= r.residual_C + 1e-15);
    }
    const CollocationScheme s4(Mesh(4), {0.7, 1.0});
    const SolveResult zero = solve_collocation(K, s4, 2, std::vector<double>(8, 0.0));
    for (double c : zero.u_n.spline().coeffs()) CHECK(c == 0.0);

    double prev = INFINITY;
    for (int n : {2, 4, 8, 16}) {
        const CollocationScheme s(Mesh(n), {0.7, 1.0});
        const SolveResult r = solve_collocation(K, s, 2, values_at([](double t) { return model_rhs(0.5, 2, t); }, s.nodes()));
        const double e = l1_error(r.u_n, [](double x) { return std::sqrt(x); });
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("collocation: errors") {
    const Kernel K = Kernel::volterra(2);
    const CollocationScheme s(Mesh(2), {0.7, 1.0});
    CHECK_THROWS_AS(solve_collocation(K, s, 1, std::vector<double>(4, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(solve_collocation(K, s, 2, std::vector<double>(3, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(solve_collocation(K, s, 2, std::vector<double>{0, 0, NAN, 0}), std::invalid_argument);
    const Kernel flat = Kernel::parse_csv("0,0,0\n0,1,0\n1,0,0\n1,1,0\n");
    try {
        solve_collocation(flat, s, 2, std::vector<double>(4, 1.0));
        FAIL("expected SingularSystemError");
    } catch (const SingularSystemError& e) {
        CHECK(e.condition_estimate() > 1e14);
    }
}

TEST_CASE("least squares: Hilbert case matches the normal equations") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 6, k = 1 + trial % 2;
        const Mesh mesh(n);
        const QuadratureGrid grid = gauss_sampling_grid(mesh.breakpoints(), 16);
        std::vector<double> f(grid.size());
        for (double& x : f) x = rng.normal();
        const SampledFunction fd(grid.points, f, grid.weights);
        const Kernel K = Kernel::volterra(1 + trial % 2);
        const SolveResult r = solve_least_squares(K, mesh, k, fd, SpaceSpec::lp(2));
        const Eigen::MatrixXd M = forward_matrix(K, mesh, k, grid.points);
        const Eigen::Map<const Eigen::VectorXd> w(grid.weights.data(), grid.size()), fv(f.data(), f.size());
        const Eigen::VectorXd x = (M.transpose() * w.asDiagonal() * M).llt().solve(M.transpose() * w.asDiagonal() * fv);
        const auto c = r.u_n.spline().coeffs();
        for (int i = 0; i < x.size(); ++i) CHECK(std::abs(c[i] - x(i)) < 1e-10 * std::max(1.0, std::abs(x(i))));
    }
}

TEST_CASE("least squares: zero residual and first-order optimality for r = 4") {
    const Kernel K = Kernel::volterra(2);
    const Mesh mesh(3);
    const PiecewisePoly truth = project_Pn([](double s) { return 1.0 + s * s; }, mesh, 2);
    const SampledFunction exact = sample_gauss([&](double t) { return apply_A(K, truth, t); }, mesh.breakpoints(), 16);
    const SolveResult r = solve_least_squares(K, mesh, 2, exact, SpaceSpec::lp(4));
    for (int i = 0; i < truth.dimension(); ++i) CHECK(r.u_n.spline().coeffs()[i] == doctest::Approx(truth.coeffs()[i]).epsilon(1e-7));
    CHECK(r.residual_F < 1e-9);

    Rng rng(5);
    std::vector<double> noisy(exact.size());
    for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] = exact.values()[i] + 0.01 * rng.normal();
    const SampledFunction fd = exact.with_values(noisy);
    const SolveResult r4 = solve_least_squares(K, mesh, 2, fd, SpaceSpec::lp(4));
    CHECK(r4.converged);
    auto objective = [&](const std::vector<double>& c) {
        const PiecewisePoly u(mesh, 2, c);
        std::vector<double> res(fd.size());
        for (std::size_t i = 0; i < res.size(); ++i) res[i] = apply_A(K, u, fd.grid()[i]) - fd.values()[i];
        return std::pow(lp_norm(fd.with_values(res), 4.0), 4.0) / 4.0;
    };
    const std::vector<double> c0(r4.u_n.spline().coeffs().begin(), r4.u_n.spline().coeffs().end());
    const double base = objective(c0);
    for (std::size_t j = 0; j < c0.size(); ++j)
        for (double t : {-1e-4, 1e-4}) {
            std::vector<double> c = c0;
            c[j] += t;
            CHECK(objective(c) >= base - 1e-14);
        }

    SolverOptions few;
    few.max_iter = 1;
    const SolveResult early = solve_least_squares(K, mesh, 2, fd, SpaceSpec::lp(8), few);
    if (!early.converged) CHECK_FALSE(early.diagnostics.empty());
}

TEST_CASE("least error: Hilbert case matches the minimum-norm oracle") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 5;
        const std::vector<double> c = trial % 2 ? std::vector<double>{1.0} : std::vector<double>{0.6, 1.0};
        const CollocationScheme s(Mesh(n), c);
        const std::vector<double> nodes = s.nodes();
        std::vector<double> f(nodes.size());
        for (double& x : f) x = rng.normal();
        const SolveResult r = solve_least_error(Kernel::volterra(2), s, f, SpaceSpec::lp(2));
        const auto m = static_cast<Eigen::Index>(nodes.size());
        Eigen::MatrixXd G(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) G(i, j) = gram_l2(nodes[i], nodes[j]);
        const Eigen::VectorXd lambda = G.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(f.data(), m));
        REQUIRE(r.dual.has_value());
        for (Eigen::Index i = 0; i < m; ++i)
            CHECK(std::abs(r.dual->weights[i] - lambda(i)) < 1e-10 * std::max(1.0, lambda.lpNorm<Eigen::Infinity>()));
        CHECK(r.residual_nodes < 1e-10 * std::max(1.0, Eigen::Map<const Eigen::VectorXd>(f.data(), m).lpNorm<Eigen::Infinity>()));
    }
    const CollocationScheme s(Mesh(2), {1.0});
    const SolveResult z = solve_least_error(Kernel::volterra(1), s, std::vector<double>(2, 0.0), SpaceSpec::lp(4));
    for (double w : z.dual->weights) CHECK(w == 0.0);
    CHECK(z.u_n(0.3) == 0.0);
}

TEST_CASE("least error: minimality, dual identity and Bregman projection for p = 4") {
    const Kernel K = Kernel::volterra(1);
    const CollocationScheme s(Mesh(1), {0.4, 1.0});
    const std::vector<double> f{0.3, -0.2};
    const SpaceSpec E = SpaceSpec::lp(4);
    const SolveResult r = solve_least_error(K, s, f, E);
    CHECK(r.converged);
    CHECK(r.residual_nodes < 1e-10);

    const SampledFunction& u = r.u_n.dual_solution().sampled();
    const double nu = lp_norm(u, E);
    // ||u||^q = <v, f>
    CHECK(std::pow(nu, E.q) == doctest::Approx(r.dual->apply([&](double t) { return f[t < 0.5 ? 0 : 1]; })).epsilon(1e-10));

    // feasible perturbations: sampled w with (Aw)(t_i) = 0 by projection
    const auto grid = u.grid();
    const auto wts = u.weights();
    const auto N = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd Bt(N, 2);
    for (Eigen::Index i = 0; i < N; ++i)
        for (int j = 0; j < 2; ++j) Bt(i, j) = K(s.nodes()[j], grid[i]);
    const Eigen::Map<const Eigen::VectorXd> w(wts.data(), N);
    const Eigen::MatrixXd G = Bt.transpose() * w.asDiagonal() * Bt;
    Rng rng(17);
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        Eigen::VectorXd xi(N);
        for (Eigen::Index i = 0; i < N; ++i) xi(i) = rng.normal() * (trial % 3 == 0 ? 1e-3 : 0.3);
        xi -= Bt * G.ldlt().solve(Bt.transpose() * w.asDiagonal() * xi);
        std::vector<double> v(u.values().begin(), u.values().end());
        for (Eigen::Index i = 0; i < N; ++i) v[i] += xi(i);
        if (lp_norm(u.with_values(v), E) < nu - 1e-12) ++violations;
    }
    CHECK(violations == 0);

    // exact data from u*: D(u*, u_n) <= D(u*, J^{-1}(A* z)) for other z
    const std::function<double(double)> ustar = [](double x) { return 1.0 + x - 2 * x * x; };
    const std::vector<double> fe{integrate(ustar, 0.0, 0.4, 8), integrate(ustar, 0.0, 1.0, 8)};
    const SolveResult re = solve_least_error(K, s, fe, E);
    const SampledFunction& ue = re.u_n.dual_solution().sampled();
    const SampledFunction us = sample(ustar, QuadratureGrid{std::vector<double>(ue.grid().begin(), ue.grid().end()),
                                                            std::vector<double>(ue.weights().begin(), ue.weights().end())});
    const double best = bregman_distance(us, ue, E);
    for (int trial = 0; trial < 200; ++trial) {
        const DiracCombo z(s.nodes(), {re.dual->weights[0] + 0.3 * rng.normal(), re.dual->weights[1] + 0.3 * rng.normal()});
        const DualSolution other(K, z, E, std::vector<double>(re.u_n.dual_solution().breakpoints().begin(),
                                                              re.u_n.dual_solution().breakpoints().end()),
                                 16);
        CHECK(best <= bregman_distance(us, other.sampled(), E) + 1e-12);
    }
}

TEST_CASE("least error: nested families share one grid and norms increase") {
    const Kernel K = Kernel::volterra(1);
    for (double p : {1.5, 3.0}) {
        SolverOptions opts;
        opts.quadrature_breakpoints = Mesh(16).breakpoints();
        opts.multistart = 2;
        double prev = 0.0;
        for (int n : {1, 2, 4, 8, 16}) {
            const CollocationScheme s(Mesh(n), {1.0});
            const SolveResult r =
                solve_least_error(K, s, values_at([](double t) { return std::sin(3 * t); }, s.nodes()), SpaceSpec::lp(p), opts);
            CHECK(r.converged);
            CHECK(r.multistart_spread < 1e-8);
            const double nn = lp_norm(r.u_n.dual_solution().sampled(), p);
            CHECK(nn >= prev - 1e-10);
            prev = nn;
            CHECK(r.u_n.dual_solution().forward(0.5) == doctest::Approx(forward_value(r, 0.5)));
        }
    }
}

TEST_CASE("residuals") {
    const Kernel K = Kernel::volterra(2);
    const CollocationScheme s(Mesh(2), {0.7, 1.0});
    const SolveResult zero = solve_collocation(K, s, 2, std::vector<double>(4, 0.0));
    const std::function<double(double)> f = [](double t) { return std::sin(2 * t); };
    CHECK(residual(zero, f, SpaceSpec::continuous()) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(residual(zero, f, SpaceSpec::lp(2)) ==
          doctest::Approx(std::sqrt(integrate([](double t) { return std::sin(2 * t) * std::sin(2 * t); }, 0, 1, 30))));
    const SolveResult r = solve_collocation(K, s, 2, values_at(f, s.nodes()));
    const std::function<double(double)> g = [](double t) { return t * t - 0.3; };
    for (double eps : {1e-3, 1e-1}) {
        const double perturbed = residual(r, [&](double t) { return f(t) + eps * g(t); }, SpaceSpec::continuous());
        CHECK(perturbed <= residual(r, f, SpaceSpec::continuous()) + eps * 0.7 + 1e-14);
    }
}
