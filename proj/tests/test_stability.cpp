#include "regproj/rules.hpp"
#include "regproj/stability.hpp"

#include <doctest.h>

#include <cmath>

using namespace regproj;

TEST_CASE("kappa for constants and the Volterra operator") {
    // Au = t for u = 1, so kappa_1 = 1 / ||t||_2 = sqrt(3)
    const Estimate e = estimate_kappa(Kernel::volterra(1), Mesh(1), 1, SpaceSpec::lp(2), SpaceSpec::lp(2));
    CHECK(e.method == "exact_p2");
    CHECK(e.value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
    // in C: ||t||_C = 1
    StabilityOptions o;
    o.budget = 200;
    const Estimate c = estimate_kappa(Kernel::volterra(1), Mesh(1), 1, SpaceSpec::lp(2), SpaceSpec::continuous(), o);
    CHECK(c.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("random search never exceeds the exact p = 2 value") {
    for (int l : {1, 2}) {
        for (int n : {2, 4}) {
            const Estimate exact = estimate_kappa(Kernel::volterra(l), Mesh(n), 2, SpaceSpec::lp(2), SpaceSpec::lp(2));
            StabilityOptions o;
            o.budget = 3000;
            // p = 2.0001 forces the search path with a nearly identical objective
            const Estimate search =
                estimate_kappa(Kernel::volterra(l), Mesh(n), 2, SpaceSpec::lp(2.0001), SpaceSpec::lp(2.0001), o);
            CHECK(search.method == "random_search");
            CHECK(search.value <= exact.value * 1.01);
            CHECK(search.value >= 0.5 * exact.value);
        }
    }
}

TEST_CASE("search estimates are monotone in the budget") {
    const CollocationScheme scheme(Mesh(4), {0.7, 1.0});
    double prev_k = 0.0, prev_s = 0.0;
    for (long budget : {50L, 200L, 800L, 3200L}) {
        StabilityOptions o;
        o.budget = budget;
        const double k = estimate_kappa(Kernel::volterra(2), Mesh(4), 2, SpaceSpec::lp(3), SpaceSpec::continuous(), o).value;
        const double s = estimate_kappa_star(Kernel::volterra(2), scheme, SpaceSpec::lp(3), o).value;
        CHECK(k >= prev_k);
        CHECK(s >= prev_s);
        prev_k = k;
        prev_s = s;
    }
}

TEST_CASE("tau_n") {
    StabilityOptions o;
    o.samples_per_cell = 256;
    for (int n : {1, 4, 16}) {
        const Estimate t = estimate_tau_n(Kernel::volterra(2), CollocationScheme(Mesh(n), {0.7, 1.0}), 2, o);
        CHECK(t.value >= 1.0);
        CHECK(t.value <= tau_of_c(0.7) + 1e-6);
    }
    // nodes at every sample point leave nothing to amplify: k = 1, c = 1, l = 1 gives piecewise linear Aw
    const Estimate one = estimate_tau_n(Kernel::volterra(1), CollocationScheme(Mesh(8), {1.0}), 1);
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kappa_star for a single node") {
    // A* delta_1 = 1 on [0, 1] for l = 1, so the ratio is 1 for any p
    for (double p : {2.0, 4.0}) {
        StabilityOptions o;
        o.budget = 100;
        const Estimate e = estimate_kappa_star(Kernel::volterra(1), CollocationScheme(Mesh(1), {1.0}), SpaceSpec::lp(p), o);
        CHECK(e.value == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("kappa chain") {
    StabilityOptions o;
    o.budget = 1000;
    for (double p : {2.0, 4.0}) {
        for (int n : {1, 2, 4}) {
            const StabilityReport r =
                stability_report(Kernel::volterra(2), CollocationScheme(Mesh(n), {0.7, 1.0}), 2, SpaceSpec::lp(p), o);
            const ChainCheck c = kappa_chain_check(r);
            CHECK_MESSAGE(c.passed, c.diagnostics);
            CHECK(r.kappa_tilde_upper == doctest::Approx(r.tau * r.kappa));
        }
    }
    StabilityReport bad;
    bad.kappa = 2.0;
    bad.kappa_tilde = 1.0;
    bad.tau = 1.5;
    bad.kappa_tilde_upper = 3.0;
    CHECK_FALSE(kappa_chain_check(bad).passed);
}

TEST_CASE("stability csv and slope") {
    StabilityReport r;
    r.n = 3;
    const std::string row = stability_csv_row(r);
    CHECK(row.rfind("3,", 0) == 0);
    CHECK(stability_csv_header() == "n,kappa,tau,kappa_tilde_upper,kappa_star,method,budget,seed,kappa_tilde\n");
    CHECK(loglog_slope({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0));
}

TEST_CASE("kappa growth rate") {
    for (int l : {1, 2}) {
        std::vector<double> ns, ks;
        for (int n : {4, 8, 16, 32}) {
            ns.push_back(n);
            ks.push_back(estimate_kappa(Kernel::volterra(l), Mesh(n), 2, SpaceSpec::lp(2), SpaceSpec::lp(2)).value);
        }
        CHECK(std::abs(loglog_slope(ns, ks) - l) <= 0.2);
    }
}
