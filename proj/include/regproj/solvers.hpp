#pragma once

#include "regproj/operators.hpp"
#include "regproj/spaces.hpp"
#include "regproj/splines.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace regproj {

/// The discrete system is singular or numerically singular.
class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition) {}
    double condition_estimate() const { return condition_; }

private:
    double condition_;
};

/// Data given at collocation nodes, extended to [0, 1] by linear interpolation
/// (constant outside the node range).
struct NodalData {
    std::vector<double> nodes;
    std::vector<double> values;

    double operator()(double t) const;
    /// Value at a node within 1e-12, throws if t is not a node.
    double at_node(double t) const;
};

/// Least-error solution u = J_{q*}(A* v) for a Dirac combination v, evaluated
/// on demand. Integrals use the composite Gauss grid it was solved on.
class DualSolution {
public:
    DualSolution(Kernel kernel, DiracCombo v, SpaceSpec space, std::vector<double> breakpoints, int gauss_order);

    const DiracCombo& dual() const { return v_; }
    const SpaceSpec& space() const { return space_; }
    std::span<const double> breakpoints() const { return breakpoints_; }
    int gauss_order() const { return order_; }

    double eval(double s) const;
    /// Samples on the solver's quadrature grid (endpoints carry zero weight).
    const SampledFunction& sampled() const { return samples_; }
    /// (A u)(t) by quadrature, split exactly at t.
    double forward(double t) const;

private:
    double map_value(double z) const;

    Kernel kernel_;
    DiracCombo v_;
    SpaceSpec space_;
    std::vector<double> breakpoints_;
    int order_;
    double factor_ = 1.0;  // ||A* v||^(q* - p*)
    SampledFunction samples_;
};

/// The computed u_n: a spline for collocation and least squares, the dual
/// representation for least error.
class Approximation {
public:
    Approximation(PiecewisePoly u) : v_(std::move(u)) {}
    Approximation(DualSolution u) : v_(std::move(u)) {}

    bool is_spline() const { return std::holds_alternative<PiecewisePoly>(v_); }
    const PiecewisePoly& spline() const;
    const DualSolution& dual_solution() const;

    double eval(double t) const;
    double operator()(double t) const { return eval(t); }

    /// Samples on a Gauss grid: the spline's mesh (optionally graded towards 0)
    /// or the least-error quadrature grid.
    SampledFunction sampled(int gauss_order = 16) const;

private:
    std::variant<PiecewisePoly, DualSolution> v_;
};

struct SolverOptions {
    int gauss_order = 16;       ///< quadrature points per piece
    int samples_per_cell = 64;  ///< sup-norm sampling density
    int max_iter = 200;
    double tolerance = 1e-8;  ///< relative to scale = max(1, ||f||)
    /// Continuous data used for residual_C; defaults to the interpolant of the data.
    std::function<double(double)> f_reference;
    /// Least error: breakpoints of the quadrature grid (nodes are always added).
    /// Pass the finest mesh of a nested family so all levels share one grid.
    std::vector<double> quadrature_breakpoints;
    /// Least error: additional Newton runs from scaled starts; spread reported.
    int multistart = 0;
};

struct SolveResult {
    Approximation u_n;
    Kernel kernel;
    Mesh mesh;
    double residual_C = 0.0;      ///< sup over a dense grid plus the nodes
    double residual_nodes = 0.0;  ///< max over collocation nodes (or data samples)
    double residual_F = 0.0;      ///< residual in the data norm the method minimizes or samples
    std::optional<DiracCombo> dual;
    int iterations = 0;
    bool converged = true;
    double condition_estimate = 0.0;
    double multistart_spread = 0.0;
    std::vector<std::string> diagnostics;
};

/// Collocation: find u_n in the spline space with (A u_n)(t_{ij}) = f(t_{ij}).
/// Requires one node per trial degree of freedom.
SolveResult solve_collocation(const Kernel& kernel, const CollocationScheme& scheme, int trial_k,
                              std::span<const double> f_values, const SolverOptions& options = {});

/// Least squares: minimize ||A u_n - f||_{L^r} over the spline space. The L^r
/// norm uses the quadrature of f_delta's grid.
SolveResult solve_least_squares(const Kernel& kernel, const Mesh& mesh, int trial_k,
                                const SampledFunction& f_delta, const SpaceSpec& data_space,
                                const SolverOptions& options = {});

/// Least error: the minimum L^p-norm u with (A u)(t) = f(t) at every node,
/// computed as u = J_{q*}(A* v) with the dual weights from Newton's method.
SolveResult solve_least_error(const Kernel& kernel, const CollocationScheme& scheme,
                              std::span<const double> f_values, const SpaceSpec& solution_space,
                              const SolverOptions& options = {});

/// (A u_n)(t) for any result.
double forward_value(const SolveResult& result, double t);

/// ||A u_n - f_reference|| in C[0,1] (dense sampling with `samples_per_cell`
/// points per cell) or in L^r (Gauss quadrature).
double residual(const SolveResult& result, const std::function<double(double)>& f_reference,
                const SpaceSpec& data_space, int samples_per_cell = 64, int gauss_order = 16);

}  // namespace regproj
