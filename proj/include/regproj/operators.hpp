#pragma once

#include "regproj/splines.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace regproj {

/// K(t, s) = (t - s)^(l-1) for s < t and 0 otherwise. With
/// `factorial_normalized` the kernel is divided by (l-1)!, which makes it the
/// Green's function of D^l with zero initial conditions.
struct VolterraPower {
    int l = 1;
    bool factorial_normalized = false;
};

/// Green's function of D^2 with f(0) = f(1) = 0: K(t, s) = s(t - 1) for s < t,
/// symmetric continuation for s >= t.
struct GreenD2 {};

/// Green's function of D^4 with f = f' = 0 at both ends:
/// K(t, s) = -s^2 (1-t)^2 (s + 2st - 3t) / 6 for s < t, symmetric for s >= t.
struct GreenD4 {};

/// Kernel sampled on a tensor grid, bilinear interpolation in between and
/// clamped outside. values are stored t-major: values[i * s_grid.size() + j].
struct TabulatedKernel {
    std::vector<double> t_grid;
    std::vector<double> s_grid;
    std::vector<double> values;
};

class Kernel {
public:
    using Variant = std::variant<VolterraPower, GreenD2, GreenD4, TabulatedKernel>;

    explicit Kernel(Variant v);

    static Kernel volterra(int l, bool factorial_normalized = false) {
        return Kernel(VolterraPower{l, factorial_normalized});
    }
    static Kernel green_d2() { return Kernel(GreenD2{}); }
    static Kernel green_d4() { return Kernel(GreenD4{}); }

    /// Reads (t, s, K) triples, one per line, from a CSV file. A non-numeric
    /// first line is treated as a header.
    static Kernel load_csv(const std::string& path);
    static Kernel parse_csv(const std::string& text);

    double operator()(double t, double s) const;

    const Variant& variant() const { return v_; }

    /// True when K(t, s) = 0 for s >= t.
    bool is_volterra() const;

    /// Polynomial degree in s of K(t, .) on each piece between s_breakpoints.
    int degree_in_s() const;

    /// Points in (0, 1) where K(t, .) may fail to be polynomial.
    std::vector<double> s_breakpoints(double t) const;

    /// True when the kernel table is coarser than the mesh (fewer samples
    /// per direction than mesh cells), so spline images are under-resolved.
    bool under_resolved(const Mesh& mesh) const;

private:
    Variant v_;
};

/// Collocation parameters 0 < c_1 < ... < c_k <= 1 on a mesh; nodes
/// t_{i,j} = (i - 1 + c_j) h ordered cell-major.
class CollocationScheme {
public:
    CollocationScheme(Mesh mesh, std::vector<double> c);

    const Mesh& mesh() const { return mesh_; }
    std::span<const double> parameters() const { return c_; }
    int nodes_per_cell() const { return static_cast<int>(c_.size()); }
    int node_count() const { return mesh_.cells() * nodes_per_cell(); }

    std::vector<double> nodes() const;

private:
    Mesh mesh_;
    std::vector<double> c_;
};

/// Discrete measure sum_i weights[i] delta_{nodes[i]}; an element of C[0,1]*.
struct DiracCombo {
    std::vector<double> nodes;
    std::vector<double> weights;

    DiracCombo() = default;
    DiracCombo(std::vector<double> nodes, std::vector<double> weights);

    /// Total variation norm sum |weights| (the C[0,1]* norm).
    double tv_norm() const;
    /// <z, g> = sum weights[i] g(nodes[i]).
    template <class F>
    double apply(F&& g) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * g(nodes[i]);
        return s;
    }
};

struct ApplyResult {
    double value = 0.0;
    bool under_resolved = false;
};

/// (Au)(t) = integral_0^1 K(t, s) u(s) ds, integrated exactly piece by piece.
double apply_A(const Kernel& kernel, const PiecewisePoly& u, double t);
ApplyResult apply_A_checked(const Kernel& kernel, const PiecewisePoly& u, double t);

/// Integral of K(t, s) phi_j(s) over one mesh cell, for every basis index j < out.size().
void cell_kernel_moments(const Kernel& kernel, double t, double a, double b, std::span<double> out);

/// Fast repeated evaluation of Au for one spline; uses running moments for
/// Volterra power kernels and falls back to apply_A otherwise.
class ForwardImage {
public:
    ForwardImage(const Kernel& kernel, const PiecewisePoly& u);

    double operator()(double t) const;

private:
    Kernel kernel_;
    PiecewisePoly u_;
    int l_ = 0;
    double scale_ = 1.0;
    std::vector<double> moments_;  // moments_[cell * l + m] = int_0^{a_cell} (a_cell - s)^m u(s) ds
};

/// Rows t_{i,j}, columns the trial basis: entry = integral K(t_{i,j}, s) phi(s) ds.
Eigen::MatrixXd collocation_matrix(const Kernel& kernel, const CollocationScheme& scheme, int trial_k);

/// Matrix of Au at arbitrary points: entry (m, c) = (A phi_c)(points[m]).
Eigen::MatrixXd forward_matrix(const Kernel& kernel, const Mesh& mesh, int trial_k,
                               std::span<const double> points);

/// (A* z)(s) = sum_i weights[i] K(nodes[i], s).
double adjoint_apply(const Kernel& kernel, const DiracCombo& z, double s);

/// Exact right-hand side for u*(s) = s^r under the Volterra power kernel:
/// integral_0^t (t - s)^(l-1) s^r ds = t^(r+l) B(r + 1, l).
double model_rhs(double r, int l, double t);

}  // namespace regproj
