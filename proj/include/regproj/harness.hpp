#pragma once

#include "regproj/rules.hpp"
#include "regproj/solvers.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace regproj {

/// delta * theta with theta standard normal draws scaled so max|theta| = 1.
/// The draws come from Rng(seed, stream).
std::vector<double> gen_noise(std::size_t count, double delta, std::uint64_t seed, std::uint64_t stream = 0);

/// Noisy data at nodes: f(t_i) + gen_noise(...)_i.
std::vector<double> noisy_values(const std::function<double(double)>& f, std::span<const double> nodes, double delta,
                                 std::uint64_t seed, std::uint64_t stream = 0);

/// What Au_n is compared against when computing the C-norm residual.
///   interpolated: f + piecewise-linear interpolant of the node noise
///   exact: the noise-free f
enum class ResidualReference { interpolated, exact };

struct ExperimentConfig {
    int l = 2;
    int k = 2;
    std::vector<double> c_values{0.7};
    std::vector<double> deltas{1e-3};
    std::vector<double> r_values{0.5};
    int n_max = 32;
    /// b = 1.01 + tau(c) unless b_custom > 0.
    double b_custom = 0.0;
    double error_p = 1.0;
    std::uint64_t seed = 1;
    int repetitions = 1;
    int samples_per_cell = 64;
    int gauss_order = 16;
    ResidualReference reference = ResidualReference::interpolated;
};

struct ExperimentRow {
    double c = 0.0;
    double delta = 0.0;
    double r = 0.0;
    double n_opt = 0.0;
    double e_opt = 0.0;
    double n_D = 0.0;
    double e_D = 0.0;
    double b_used = 0.0;
    double b_opt = 0.0;
    double r_b = 0.0;
    double r_e = 0.0;
    std::uint64_t seed = 0;
    std::string status = "ok";
};

struct CellError : std::runtime_error {
    CellError(const std::string& what, int n_) : std::runtime_error(what), n(n_) {}
    int n;
};

/// Per-n data of one experiment cell.
struct CellSweep {
    std::vector<int> ns;
    std::vector<double> errors;     ///< ||u_n - u*||_{L^p}
    std::vector<double> residuals;  ///< ||A u_n - f_delta||_C
    RuleTrace trace;
};

/// ||u - s^r||_{L^p} on a grid graded towards 0.
double error_to_power(const PiecewisePoly& u, double r, double p, int gauss_order = 16);

/// Collocation with nodes {(i-1+c)h, ih} for n = 1..n_max and the
/// discrepancy principle. Throws CellError naming n if a solve fails.
ExperimentRow run_cell(const ExperimentConfig& config, double c, double delta, double r, std::uint64_t seed,
                       CellSweep* sweep = nullptr);

/// Rows for every (c, delta, r, repetition) followed by median rows per
/// (c, delta, r). Repetition i uses seed config.seed + i.
std::vector<ExperimentRow> run_table(const ExperimentConfig& config);

std::string table_csv_header();
std::string table_csv_row(const ExperimentRow& row);
std::string table_csv(const std::vector<ExperimentRow>& rows);

double median(std::vector<double> values);

}  // namespace regproj
