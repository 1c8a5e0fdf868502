#include "regproj/operators.hpp"
#include "regproj/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace regproj;

namespace {

/// Reference integral of K(t, .) u over [0, 1] with many Gauss pieces split at
/// t; pieces are multiples of 1/3600, so they resolve meshes with n | 3600.
double reference_apply(const Kernel& K, const std::function<double(double)>& u, double t) {
    double sum = 0.0;
    const int pieces = 3600;
    for (int i = 0; i < pieces; ++i) {
        const double a = static_cast<double>(i) / pieces, b = static_cast<double>(i + 1) / pieces;
        auto g = [&](double s) { return K(t, s) * u(s); };
        if (t > a && t < b) sum += integrate(g, a, t, 8) + integrate(g, t, b, 8);
        else sum += integrate(g, a, b, 8);
    }
    return sum;
}

}  // namespace

TEST_CASE("kernel values") {
    const Kernel v2 = Kernel::volterra(2), v3 = Kernel::volterra(3, true);
    CHECK(v2(0.7, 0.2) == doctest::Approx(0.5));
    CHECK(v2(0.2, 0.7) == 0.0);
    CHECK(v3(1.0, 0.0) == doctest::Approx(0.5));
    CHECK(v2.is_volterra());
    CHECK(v2.degree_in_s() == 1);
    const Kernel g2 = Kernel::green_d2(), g4 = Kernel::green_d4();
    CHECK(g2(0.3, 0.6) == doctest::Approx(g2(0.6, 0.3)));
    CHECK(g4(0.3, 0.6) == doctest::Approx(g4(0.6, 0.3)));
    CHECK_FALSE(g2.is_volterra());
    CHECK_THROWS(Kernel::volterra(0));
}

TEST_CASE("Green's function kernels invert D^2 and D^4") {
    const PiecewisePoly one = project_Pn([](double) { return 1.0; }, Mesh(3), 1);
    for (double t : {0.1, 0.35, 0.5, 0.9}) {
        CHECK(apply_A(Kernel::green_d2(), one, t) == doctest::Approx(t * (t - 1.0) / 2.0).epsilon(1e-12));
        CHECK(std::abs(apply_A(Kernel::green_d4(), one, t)) == doctest::Approx(t * t * (1 - t) * (1 - t) / 24.0).epsilon(1e-12));
    }
}

TEST_CASE("tabulated kernels") {
    const std::string csv = "t,s,K\n# comment\n0,0,0\n0,1,1\n1,0,2\n1,1,3\n";
    const Kernel k = Kernel::parse_csv(csv);
    CHECK(k(0.5, 0.5) == doctest::Approx(1.5));
    CHECK(k(0.25, 1.0) == doctest::Approx(1.5));
    CHECK(k(2.0, 2.0) == doctest::Approx(3.0));  // clamped
    CHECK(k.under_resolved(Mesh(4)));
    CHECK_FALSE(k.under_resolved(Mesh(1)));
    CHECK_THROWS(Kernel::parse_csv("0,0,1\n0,1,2\n1,0,3\n"));  // not a tensor grid
    CHECK_THROWS(Kernel::parse_csv("0,0,nan\n0,1,2\n1,0,3\n1,1,4\n"));
    CHECK_THROWS(Kernel::load_csv("/nonexistent/kernel.csv"));
    const ApplyResult r = apply_A_checked(k, project_Pn([](double s) { return s; }, Mesh(4), 2), 0.5);
    CHECK(r.under_resolved);
}

TEST_CASE("model right-hand side") {
    for (int i = 1; i <= 20; ++i) {
        const double t = i / 20.0;
        CHECK(model_rhs(0.5, 2, t) == doctest::Approx(4.0 / 15.0 * std::pow(t, 2.5)).epsilon(1e-13));
        CHECK(model_rhs(1.5, 2, t) == doctest::Approx(4.0 / 35.0 * std::pow(t, 3.5)).epsilon(1e-13));
        CHECK(model_rhs(2.0, 1, t) == doctest::Approx(t * t * t / 3.0).epsilon(1e-13));
    }
    CHECK(model_rhs(0.5, 2, 0.0) == 0.0);
    CHECK_THROWS(model_rhs(-1.0, 2, 0.5));
}

TEST_CASE("forward operator on splines matches reference quadrature") {
    const PiecewisePoly u = project_Pn([](double s) { return std::cos(4 * s) + s; }, Mesh(5), 3);
    for (const Kernel& K : {Kernel::volterra(1), Kernel::volterra(2), Kernel::volterra(4, true), Kernel::green_d2(),
                            Kernel::green_d4()}) {
        const ForwardImage image(K, u);
        for (double t : {0.0, 0.13, 0.2, 0.5, 0.61, 1.0}) {
            const double ref = reference_apply(K, [&](double s) { return u(s); }, t);
            CHECK(apply_A(K, u, t) == doctest::Approx(ref).epsilon(1e-11).scale(1.0));
            CHECK(image(t) == doctest::Approx(ref).epsilon(1e-11).scale(1.0));
        }
    }
}

TEST_CASE("collocation schemes and matrices") {
    const CollocationScheme s(Mesh(3), {0.7, 1.0});
    const std::vector<double> nodes = s.nodes();
    REQUIRE(nodes.size() == 6);
    CHECK(nodes[0] == doctest::Approx(0.7 / 3));
    CHECK(nodes[1] == 1.0 / 3);
    CHECK(nodes[5] == 1.0);
    CHECK_THROWS(CollocationScheme(Mesh(2), {1.0, 0.5}));
    CHECK_THROWS(CollocationScheme(Mesh(2), {0.0}));
    CHECK_THROWS(CollocationScheme(Mesh(2), {1.2}));

    const Kernel K = Kernel::volterra(2);
    const Eigen::MatrixXd M = collocation_matrix(K, s, 2);
    const PiecewisePoly u = project_Pn([](double x) { return x * x; }, Mesh(3), 2);
    const Eigen::Map<const Eigen::VectorXd> c(u.coeffs().data(), u.dimension());
    const Eigen::VectorXd Mu = M * c;
    for (std::size_t i = 0; i < nodes.size(); ++i) CHECK(Mu(i) == doctest::Approx(apply_A(K, u, nodes[i])).epsilon(1e-13));
}

TEST_CASE("Dirac combinations and the adjoint") {
    const DiracCombo z({0.25, 0.5, 1.0}, {1.0, -2.0, 0.5});
    CHECK(z.tv_norm() == 3.5);
    CHECK(z.apply([](double t) { return t; }) == doctest::Approx(0.25 - 1.0 + 0.5));
    CHECK_THROWS(DiracCombo({0.5, 0.5}, {1.0, 1.0}));
    CHECK_THROWS(DiracCombo({0.5}, {1.0, 1.0}));
    // <z, Au> = integral (A* z) u
    const Kernel K = Kernel::volterra(2);
    const PiecewisePoly u = project_Pn([](double s) { return std::exp(s); }, Mesh(4), 2);
    const double lhs = z.apply([&](double t) { return apply_A(K, u, t); });
    const double rhs = reference_apply(Kernel::volterra(1), [&](double s) { return adjoint_apply(K, z, s) * u(s); }, 1.0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    // single node, l = 1: A* delta_1 = 1
    const DiracCombo one({1.0}, {1.0});
    CHECK(adjoint_apply(Kernel::volterra(1), one, 0.3) == 1.0);
}
