#include "regproj/spaces.hpp"
#include "regproj/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace regproj;

namespace {

SampledFunction random_function(Rng& rng, const std::vector<double>& bp) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal(), w = 1.0 + 6.0 * rng.uniform();
    return sample_gauss([=](double s) { return a + b * s + c * std::sin(w * s); }, bp, 16);
}

}  // namespace

TEST_CASE("space specs") {
    const SpaceSpec s3 = SpaceSpec::lp(3.0);
    CHECK(s3.q == 3.0);
    CHECK(SpaceSpec::lp(1.5).q == 2.0);
    CHECK(1.0 / s3.q + 1.0 / s3.q_star() == doctest::Approx(1.0));
    CHECK(SpaceSpec::lp(1.5).dual().p == doctest::Approx(3.0));
    CHECK_THROWS(SpaceSpec::lp(1.0));
    CHECK_THROWS(SpaceSpec::lp(INFINITY));
    CHECK_FALSE(SpaceSpec::continuous().is_lp());
}

TEST_CASE("lp_norm examples") {
    const std::vector<double> bp = uniform_breakpoints(4);
    CHECK(lp_norm(sample_gauss([](double) { return 1.0; }, bp), SpaceSpec::lp(3)) == doctest::Approx(1.0));
    CHECK(lp_norm(sample_gauss([](double s) { return s; }, bp), SpaceSpec::lp(2)) ==
          doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    const SampledFunction root = sample_gauss([](double s) { return std::sqrt(s); }, graded_breakpoints(4, 40));
    CHECK(lp_norm(root, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_WITH(lp_norm(sample_gauss([](double) { return NAN; }, bp), 2.0), "non-finite input");
    CHECK_THROWS(lp_norm(root, SpaceSpec::continuous()));
}

TEST_CASE("sup_norm examples") {
    CHECK(sup_norm(sample_uniform([](double) { return -2.0; }, Mesh(3))) == 2.0);
    CHECK(sup_norm(sample_uniform([](double t) { return t * (1 - t); }, Mesh(2), 64)) == doctest::Approx(0.25));
    CHECK(std::abs(sup_norm(sample_uniform([](double t) { return std::sin(M_PI * t); }, Mesh(4), 64)) - 1.0) < 1e-4);
    CHECK_THROWS(SampledFunction({}, {}, {}));
    CHECK_THROWS(SampledFunction({0.5, 0.5}, {1, 1}, {1, 1}));
}

TEST_CASE("duality mapping") {
    const std::vector<double> bp = uniform_breakpoints(5);
    const SampledFunction w = sample_gauss([](double s) { return std::cos(3 * s) - 0.2; }, bp);
    // Hilbert case is the identity
    const SampledFunction j2 = duality_map(w, SpaceSpec::lp(2));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(j2.values()[i] == w.values()[i]);
    // unit constant in L^4
    const SampledFunction one = sample_gauss([](double) { return 1.0; }, bp);
    const SampledFunction j4 = duality_map(one, SpaceSpec::lp(4));
    for (double v : j4.values()) CHECK(v == doctest::Approx(1.0));
    // <J w, w> = ||w||^q
    for (double p : {1.5, 3.0, 4.0}) {
        const SpaceSpec s = SpaceSpec::lp(p);
        CHECK(pairing(duality_map(w, s), w) == doctest::Approx(std::pow(lp_norm(w, s), s.q)).epsilon(1e-12));
    }
    // round trip
    const SampledFunction centered = sample_gauss([](double s) { return s - 0.5; }, bp);
    for (double p : {1.5, 3.0, 4.0}) {
        const SpaceSpec s = SpaceSpec::lp(p);
        const SampledFunction back = duality_map_inverse(duality_map(centered, s), s);
        for (std::size_t i = 0; i < back.size(); ++i) CHECK(std::abs(back.values()[i] - centered.values()[i]) < 1e-10);
        const SampledFunction z = duality_map_inverse(one, s);
        const SampledFunction again = duality_map(z, s);
        for (double v : again.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
    // zero maps to zero
    const SampledFunction zero = duality_map(sample_gauss([](double) { return 0.0; }, bp), SpaceSpec::lp(3));
    for (double v : zero.values()) CHECK(v == 0.0);
}

TEST_CASE("Bregman distances") {
    Rng rng(7);
    const std::vector<double> bp = uniform_breakpoints(6);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        const SpaceSpec s = SpaceSpec::lp(p);
        for (int trial = 0; trial < 10; ++trial) {
            const SampledFunction u = random_function(rng, bp), ut = random_function(rng, bp);
            const double d = bregman_distance(ut, u, s);
            CHECK(d > 0.0);
            CHECK(bregman_distance(u, u, s) == doctest::Approx(0.0).scale(1.0));
            const double dual = bregman_distance(duality_map(u, s), duality_map(ut, s), s.dual());
            CHECK(dual == doctest::Approx(d).epsilon(1e-9));
            CHECK(bregman_symmetric(ut, u, s) ==
                  doctest::Approx(d + bregman_distance(u, ut, s)).epsilon(1e-10));
        }
    }
    // p = 2: half the squared distance
    const SampledFunction a = sample_gauss([](double s) { return s; }, bp), b = sample_gauss([](double) { return 0.0; }, bp);
    CHECK(bregman_distance(a, b, SpaceSpec::lp(2)) == doctest::Approx(1.0 / 6.0));

    // spline overloads on different meshes
    const PiecewisePoly x = project_Pn([](double s) { return s * s; }, Mesh(3), 2);
    const PiecewisePoly y = project_Pn([](double s) { return 1.0 - s; }, Mesh(4), 2);
    CHECK(bregman_distance(x, y, SpaceSpec::lp(3)) > 0.0);
    CHECK(bregman_distance(x, x, SpaceSpec::lp(3)) == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS(bregman_distance(a, sample_gauss([](double s) { return s; }, uniform_breakpoints(2)), SpaceSpec::lp(2)));
}
