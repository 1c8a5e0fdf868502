#include "regproj/harness.hpp"

#include "regproj/operators.hpp"
#include "regproj/quadrature.hpp"
#include "regproj/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace regproj {

std::vector<double> gen_noise(std::size_t count, double delta, std::uint64_t seed, std::uint64_t stream) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("gen_noise: need delta >= 0");
    if (count == 0) throw std::invalid_argument("gen_noise: need at least one node");
    std::vector<double> theta(count, 0.0);
    if (delta == 0.0) return theta;
    Rng rng(seed, stream);
    double m = 0.0;
    for (double& x : theta) {
        x = rng.normal();
        m = std::max(m, std::abs(x));
    }
    for (double& x : theta) x = delta * (x / m);
    return theta;
}

std::vector<double> noisy_values(const std::function<double(double)>& f, std::span<const double> nodes, double delta,
                                 std::uint64_t seed, std::uint64_t stream) {
    std::vector<double> v = gen_noise(nodes.size(), delta, seed, stream);
    for (std::size_t i = 0; i < nodes.size(); ++i) v[i] += f(nodes[i]);
    return v;
}

double error_to_power(const PiecewisePoly& u, double r, double p, int gauss_order) {
    const int n = u.mesh().cells();
    // four pieces per cell keep kinks of |u - s^r| from spoiling the rule
    std::vector<double> bp = graded_breakpoints(4 * n, 40);
    const QuadratureGrid grid = composite_gauss(bp, gauss_order);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = grid.points[i];
        const double d = std::abs(u(s) - std::pow(s, r));
        sum += grid.weights[i] * (p == 1.0 ? d : std::pow(d, p));
    }
    return p == 1.0 ? sum : std::pow(sum, 1.0 / p);
}

ExperimentRow run_cell(const ExperimentConfig& config, double c, double delta, double r, std::uint64_t seed,
                       CellSweep* sweep) {
    if (config.n_max < 1) throw std::invalid_argument("run_cell: n_max must be >= 1");
    if (!(delta >= 0.0)) throw std::invalid_argument("run_cell: need delta >= 0");
    const Kernel kernel = Kernel::volterra(config.l);
    const int l = config.l;
    const std::function<double(double)> f = [r, l](double t) { return model_rhs(r, l, t); };

    ExperimentRow row;
    row.c = c;
    row.delta = delta;
    row.r = r;
    row.seed = seed;
    row.b_used = config.b_custom > 0.0 ? config.b_custom : default_b(c);

    std::vector<SolveResult> results;
    std::vector<double> errors, residuals;
    std::vector<int> ns;
    for (int n = 1; n <= config.n_max; ++n) {
        std::vector<double> params = config.k == 1 ? std::vector<double>{1.0} : std::vector<double>{c, 1.0};
        if (config.k > 2) throw std::invalid_argument("run_cell: k must be 1 or 2");
        const CollocationScheme scheme(Mesh(n), params);
        const std::vector<double> nodes = scheme.nodes();
        const std::vector<double> noise = gen_noise(nodes.size(), delta, seed, static_cast<std::uint64_t>(n));
        std::vector<double> values(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = f(nodes[i]) + noise[i];
        SolverOptions opts;
        opts.gauss_order = config.gauss_order;
        opts.samples_per_cell = config.samples_per_cell;
        if (config.reference == ResidualReference::exact || delta == 0.0) {
            opts.f_reference = f;
        } else {
            const NodalData interp{nodes, noise};
            opts.f_reference = [f, interp](double t) { return f(t) + interp(t); };
        }
        try {
            results.push_back(solve_collocation(kernel, scheme, config.k, values, opts));
        } catch (const std::exception& e) {
            throw CellError(std::string("collocation failed at n = ") + std::to_string(n) + ": " + e.what(), n);
        }
        ns.push_back(n);
        errors.push_back(error_to_power(results.back().u_n.spline(), r, config.error_p, config.gauss_order));
        residuals.push_back(results.back().residual_C);
    }

    const auto best = std::min_element(errors.begin(), errors.end()) - errors.begin();
    row.n_opt = ns[best];
    row.e_opt = errors[best];
    row.b_opt = delta > 0.0 ? residuals[best] / delta : 0.0;

    RuleTrace trace;
    if (delta > 0.0) {
        trace = choose_n_discrepancy([&](int n) { return results[n - 1]; }, delta, row.b_used, ns);
        row.n_D = trace.chosen_n;
        row.e_D = errors[trace.chosen_n - 1];
        if (!trace.reached) row.status = "dp_not_reached";
        row.r_b = row.b_opt > 0.0 ? row.b_used / row.b_opt : 0.0;
        row.r_e = row.e_opt > 0.0 ? row.e_D / row.e_opt : 1.0;
    } else {
        row.status = "no_noise";
    }
    if (sweep) *sweep = CellSweep{ns, errors, residuals, trace};
    return row;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<ExperimentRow> run_table(const ExperimentConfig& config) {
    if (config.repetitions < 1) throw std::invalid_argument("run_table: repetitions must be >= 1");
    for (double d : config.deltas)
        if (!(d > 0.0)) throw std::invalid_argument("run_table: delta entries must be > 0");
    std::vector<ExperimentRow> rows, medians;
    for (double c : config.c_values) {
        for (double delta : config.deltas) {
            for (double r : config.r_values) {
                std::vector<ExperimentRow> cell;
                for (int rep = 0; rep < config.repetitions; ++rep) {
                    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(rep);
                    ExperimentRow row;
                    try {
                        row = run_cell(config, c, delta, r, seed);
                    } catch (const std::exception& e) {
                        row.c = c;
                        row.delta = delta;
                        row.r = r;
                        row.seed = seed;
                        const auto* ce = dynamic_cast<const CellError*>(&e);
                        row.status = ce ? "error_at_n=" + std::to_string(ce->n) : "error";
                    }
                    rows.push_back(row);
                    if (row.status == "ok" || row.status == "dp_not_reached") cell.push_back(row);
                }
                ExperimentRow med;
                med.c = c;
                med.delta = delta;
                med.r = r;
                med.seed = config.seed;
                med.status = "median";
                auto column = [&](double ExperimentRow::*field) {
                    std::vector<double> v;
                    for (const ExperimentRow& x : cell) v.push_back(x.*field);
                    return median(std::move(v));
                };
                med.n_opt = column(&ExperimentRow::n_opt);
                med.e_opt = column(&ExperimentRow::e_opt);
                med.n_D = column(&ExperimentRow::n_D);
                med.e_D = column(&ExperimentRow::e_D);
                med.b_used = column(&ExperimentRow::b_used);
                med.b_opt = column(&ExperimentRow::b_opt);
                med.r_b = column(&ExperimentRow::r_b);
                med.r_e = column(&ExperimentRow::r_e);
                medians.push_back(med);
            }
        }
    }
    rows.insert(rows.end(), medians.begin(), medians.end());
    return rows;
}

std::string table_csv_header() { return "c,delta,r,n_opt,e_opt,n_D,e_D,b_used,b_opt,r_b,r_e,seed,status\n"; }

std::string table_csv_row(const ExperimentRow& x) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.6g,%.6e,%.6g,%.6g,%.10e,%.6g,%.10e,%.10e,%.10e,%.10e,%.10e,%llu,%s\n", x.c,
                  x.delta, x.r, x.n_opt, x.e_opt, x.n_D, x.e_D, x.b_used, x.b_opt, x.r_b, x.r_e,
                  static_cast<unsigned long long>(x.seed), x.status.c_str());
    return buf;
}

std::string table_csv(const std::vector<ExperimentRow>& rows) {
    std::string out = table_csv_header();
    for (const ExperimentRow& r : rows) out += table_csv_row(r);
    return out;
}

}  // namespace regproj
