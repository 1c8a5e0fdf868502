#pragma once

#include <functional>
#include <span>
#include <vector>

namespace regproj {

/// Uniform mesh of [0, 1] with n cells [(i-1)h, ih], h = 1/n.
class Mesh {
public:
    explicit Mesh(int n);

    int cells() const { return n_; }
    double h() const { return 1.0 / n_; }
    double left(int cell) const { return static_cast<double>(cell) / n_; }
    double right(int cell) const { return static_cast<double>(cell + 1) / n_; }

    /// Owning cell of t in [0, 1]; interior cell boundaries belong to the left cell.
    int cell_of(double t) const;

    /// The n + 1 cell endpoints.
    std::vector<double> breakpoints() const;

    bool operator==(const Mesh&) const = default;

private:
    int n_;
};

/// Nested refinement: n -> 2n. Endpoints of the input are endpoints of the output.
Mesh refine_nested(const Mesh& mesh);

/// Polynomial in monomial form, coefficients in increasing degree.
struct Polynomial {
    std::vector<double> coeffs;

    double operator()(double x) const;
};

/// L2(cell)-orthonormal basis of polynomials of degree < k on [a, b]
/// (shifted, scaled Legendre polynomials).
std::vector<Polynomial> orthonormal_basis(double a, double b, int k);

/// Value of the j-th orthonormal basis function of [a, b] at s.
double basis_value(double a, double b, int j, double s);

/// Fills values[j] = phi_j(s) for j < values.size(); cheaper than repeated basis_value.
void basis_values(double a, double b, double s, std::span<double> values);

/// Element of the discontinuous spline space of order k (degree <= k-1) on a
/// uniform mesh. Coefficients are stored cell-major in the per-cell
/// orthonormal Legendre basis: coeffs[cell * k + j].
class PiecewisePoly {
public:
    PiecewisePoly(Mesh mesh, int k);
    PiecewisePoly(Mesh mesh, int k, std::vector<double> coeffs);

    const Mesh& mesh() const { return mesh_; }
    int order() const { return k_; }
    int dimension() const { return mesh_.cells() * k_; }

    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }
    double coeff(int cell, int j) const { return coeffs_[cell * k_ + j]; }

    /// Value of the owning cell's polynomial (left limit at interior
    /// boundaries, cell 0 at t = 0). Throws for t outside [0, 1].
    double eval(double t) const;
    double operator()(double t) const { return eval(t); }

    /// Value of the polynomial of a given cell (no ownership rule).
    double eval_in_cell(int cell, double t) const;

private:
    Mesh mesh_;
    int k_;
    std::vector<double> coeffs_;
};

/// Local L2 projection P_n onto the spline space: per cell,
/// sum_j (integral phi_j f) phi_j. Integrals use `gauss_order` points per cell.
PiecewisePoly project_Pn(const std::function<double(double)>& f, const Mesh& mesh, int k,
                         int gauss_order = 16);

}  // namespace regproj
