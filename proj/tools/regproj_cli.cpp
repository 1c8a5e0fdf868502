// regproj: solve, table, stability and tau subcommands.

#include "regproj/harness.hpp"
#include "regproj/operators.hpp"
#include "regproj/rules.hpp"
#include "regproj/solvers.hpp"
#include "regproj/stability.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using namespace regproj;

namespace {

struct Options {
    std::uint64_t seed = 1;
    std::string out;
    std::vector<double> c{0.7};
    std::vector<double> delta{1e-3};
    std::vector<double> r{0.5};
    int n_max = 32;
    int n = 0;
    int k = 2;
    int l = 2;
    std::string method = "collocation";
    std::string rule = "dp";
    std::string family = "consecutive";
    std::string kernel_csv;
    std::string reference = "interpolated";
    double b = 0.0;
    double p = 2.0;
    double r_exp = 2.0;
    double error_p = 1.0;
    double theta = 0.5;
    int repetitions = 1;
    long budget = 2000;
};

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << text;
}

std::vector<double> collocation_params(const Options& o) {
    std::vector<double> c = o.c;
    if (static_cast<int>(c.size()) == o.k - 1) c.push_back(1.0);
    if (static_cast<int>(c.size()) != o.k)
        throw std::invalid_argument("--c must give k parameters (or k - 1, with c_k = 1 appended)");
    return c;
}

Kernel make_kernel(const Options& o) { return o.kernel_csv.empty() ? Kernel::volterra(o.l) : Kernel::load_csv(o.kernel_csv); }

std::vector<int> make_family(const Options& o) {
    if (o.family == "dyadic") return dyadic_family(o.n_max);
    if (o.family == "consecutive") return consecutive_family(o.n_max);
    throw std::invalid_argument("--family must be consecutive or dyadic");
}

int run_tau(const Options& o) {
    std::string text = "c,tau\n";
    char buf[64];
    for (double c : o.c) {
        std::snprintf(buf, sizeof buf, "%.6g,%.6f\n", c, tau_of_c(c));
        text += buf;
    }
    write_output(o.out, text);
    return 0;
}

int run_table_cmd(const Options& o) {
    ExperimentConfig cfg;
    cfg.l = o.l;
    cfg.k = o.k;
    cfg.c_values = o.c;
    cfg.deltas = o.delta;
    cfg.r_values = o.r;
    cfg.n_max = o.n_max;
    cfg.b_custom = o.b;
    cfg.error_p = o.error_p;
    cfg.seed = o.seed;
    cfg.repetitions = o.repetitions;
    if (o.reference == "exact") cfg.reference = ResidualReference::exact;
    else if (o.reference != "interpolated") throw std::invalid_argument("--residual-reference must be interpolated or exact");
    write_output(o.out, table_csv(run_table(cfg)));
    return 0;
}

int run_stability(const Options& o) {
    const Kernel kernel = make_kernel(o);
    StabilityOptions so;
    so.budget = o.budget;
    so.seed = o.seed;
    SpaceSpec E{SpaceSpec::Kind::Lp, o.p, std::max(2.0, o.p)};
    std::string text = stability_csv_header();
    for (int n : make_family(o)) {
        const CollocationScheme scheme(Mesh(n), collocation_params(o));
        text += stability_csv_row(stability_report(kernel, scheme, o.k, E, so));
    }
    write_output(o.out, text);
    return 0;
}

int run_solve(const Options& o) {
    if (o.delta.size() != 1 || o.r.size() != 1) throw std::invalid_argument("solve takes one --delta and one --r");
    const double delta = o.delta[0], r = o.r[0];
    const Kernel kernel = make_kernel(o);
    if (!std::holds_alternative<VolterraPower>(kernel.variant()))
        std::fprintf(stderr, "note: exact data s^r is only available for the Volterra power kernel; using quadrature\n");
    const int l = o.l;
    const std::function<double(double)> f = [&](double t) {
        if (std::holds_alternative<VolterraPower>(kernel.variant())) return model_rhs(r, l, t);
        return integrate([&](double s) { return kernel(t, s) * std::pow(s, r); }, 0.0, 1.0, 64);
    };

    const bool me = o.rule == "me";
    std::vector<double> params = me ? std::vector<double>{1.0} : collocation_params(o);
    const int k = me ? 1 : o.k;
    const std::vector<int> family = me ? dyadic_family(o.n_max) : make_family(o);
    const int finest = family.back();

    // node noise is a fixed function for the monotone error rule so data nest
    auto node_values = [&](const std::vector<double>& nodes, int n) {
        if (!me) return noisy_values(f, nodes, delta, o.seed, static_cast<std::uint64_t>(n));
        const std::vector<double> fine = CollocationScheme(Mesh(finest), {1.0}).nodes();
        const std::vector<double> noise = gen_noise(fine.size(), delta, o.seed, 0);
        const NodalData interp{fine, noise};
        std::vector<double> v(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = f(nodes[i]) + interp(nodes[i]);
        return v;
    };

    SolverOptions so;
    if (me) so.quadrature_breakpoints = Mesh(finest).breakpoints();
    auto solve_at = [&](int n) -> SolveResult {
        const CollocationScheme scheme(Mesh(n), params);
        const std::vector<double> nodes = scheme.nodes();
        const std::vector<double> values = node_values(nodes, n);
        const std::vector<double> noise = [&] {
            std::vector<double> d(values.size());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = values[i] - f(nodes[i]);
            return d;
        }();
        SolverOptions opts = so;
        const NodalData interp{nodes, noise};
        opts.f_reference = [f, interp](double t) { return f(t) + interp(t); };
        if (o.method == "collocation") return solve_collocation(kernel, scheme, k, values, opts);
        if (o.method == "least-error") {
            SpaceSpec E = SpaceSpec::lp(o.p);
            return solve_least_error(kernel, scheme, values, E, opts);
        }
        if (o.method == "least-squares") {
            const QuadratureGrid grid = gauss_sampling_grid(Mesh(n).breakpoints(), opts.gauss_order);
            std::vector<double> fv(grid.size());
            for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = opts.f_reference(grid.points[i]);
            return solve_least_squares(kernel, Mesh(n), k, SampledFunction(grid.points, fv, grid.weights),
                                       SpaceSpec::lp(o.r_exp), opts);
        }
        throw std::invalid_argument("--method must be collocation, least-squares or least-error");
    };

    int n = o.n;
    std::string trace_csv;
    if (n <= 0) {
        if (o.rule == "apriori") {
            n = choose_n_apriori(delta, l, o.theta);
        } else if (o.rule == "dp") {
            double b = o.b;
            if (b <= 0.0) {
                if (o.method == "collocation" && k == 2 && params[0] > 0.5 && params[0] < 1.0) b = default_b(params[0]);
                else if (o.method == "least-squares") b = 1.01;
                else throw std::invalid_argument("--b is required for this method and scheme");
            }
            const RuleTrace t = choose_n_discrepancy(solve_at, delta, b, family);
            n = t.chosen_n;
            trace_csv = t.csv();
        } else if (me) {
            if (o.method != "least-error") throw std::invalid_argument("--rule me requires --method least-error");
            const SpaceSpec E = SpaceSpec::lp(o.p);
            auto data_at = [&](int m) {
                const std::vector<double> nodes = CollocationScheme(Mesh(m), params).nodes();
                return NodalData{nodes, node_values(nodes, m)};
            };
            const RuleTrace t = choose_n_monotone_error(solve_at, data_at, delta, family, E.q);
            n = t.chosen_n;
            trace_csv = t.csv();
        } else {
            throw std::invalid_argument("--rule must be apriori, dp or me");
        }
    }

    const SolveResult res = solve_at(n);
    double err = 0.0;
    {
        const QuadratureGrid grid = composite_gauss(graded_breakpoints(4 * n, 40), 16);
        for (std::size_t i = 0; i < grid.size(); ++i)
            err += grid.weights[i] * std::pow(std::abs(res.u_n(grid.points[i]) - std::pow(grid.points[i], r)), o.error_p);
        err = std::pow(err, 1.0 / o.error_p);
    }
    std::printf("method=%s rule=%s n=%d\n", o.method.c_str(), o.n > 0 ? "fixed" : o.rule.c_str(), n);
    std::printf("error_L%g=%.10e residual_C=%.10e residual_nodes=%.10e\n", o.error_p, err, res.residual_C,
                res.residual_nodes);
    std::printf("iterations=%d converged=%s condition=%.3e\n", res.iterations, res.converged ? "true" : "false",
                res.condition_estimate);
    for (const std::string& d : res.diagnostics) std::printf("diagnostic: %s\n", d.c_str());
    if (!trace_csv.empty()) {
        if (o.out.empty()) std::fputs(trace_csv.c_str(), stdout);
        else write_output(o.out, trace_csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularization by projection for first-kind Volterra equations"};
    app.set_config("--config", "", "Key-value configuration file; flags override it");
    app.require_subcommand(1);
    Options o;
    app.add_option("--seed", o.seed, "RNG seed");
    app.add_option("--out", o.out, "Output CSV path (stdout if empty)");
    app.add_option("--c", o.c, "Collocation parameter(s)");
    app.add_option("--delta", o.delta, "Noise level(s)");
    app.add_option("--r", o.r, "Exact solution exponent(s), u*(s) = s^r");
    app.add_option("--n-max", o.n_max, "Largest n in the family");
    app.add_option("--n", o.n, "Fixed n for solve (overrides --rule)");
    app.add_option("--k", o.k, "Spline order (k = 2: piecewise linear)");
    app.add_option("--l", o.l, "Kernel (t-s)^(l-1)");
    app.add_option("--kernel-csv", o.kernel_csv, "Tabulated kernel (t,s,K rows) instead of the Volterra power kernel");
    app.add_option("--method", o.method, "collocation | least-squares | least-error");
    app.add_option("--rule", o.rule, "apriori | dp | me");
    app.add_option("--family", o.family, "consecutive | dyadic");
    app.add_option("--b", o.b, "Discrepancy constant (default 1.01 + tau(c))");
    app.add_option("--p", o.p, "Solution space exponent L^p");
    app.add_option("--r-exp", o.r_exp, "Data space exponent L^r for least squares");
    app.add_option("--error-p", o.error_p, "Exponent of the error norm");
    app.add_option("--theta", o.theta, "A priori rule exponent");
    app.add_option("--repetitions", o.repetitions, "Noise realizations per table cell");
    app.add_option("--budget", o.budget, "Search budget for stability estimates");
    app.add_option("--residual-reference", o.reference, "interpolated | exact");

    auto* solve = app.add_subcommand("solve", "Solve one problem, optionally choosing n by a rule")->fallthrough();
    auto* table = app.add_subcommand("table", "Run the discrepancy-principle experiment table")->fallthrough();
    auto* stability = app.add_subcommand("stability", "Report stability constants")->fallthrough();
    auto* tau = app.add_subcommand("tau", "Print tau(c)")->fallthrough();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*tau) return run_tau(o);
        if (*table) return run_table_cmd(o);
        if (*stability) return run_stability(o);
        if (*solve) return run_solve(o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
