#include "regproj/splines.hpp"

#include "regproj/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace regproj {

Mesh::Mesh(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("Mesh: cell count must be >= 1");
}

int Mesh::cell_of(double t) const {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::out_of_range("Mesh::cell_of: t = " + std::to_string(t) + " outside [0, 1]");
    const double x = t * n_;
    int cell = static_cast<int>(std::ceil(x)) - 1;
    // snap points within rounding of an interior boundary to the left cell
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-12 * n_) cell = static_cast<int>(nearest) - 1;
    if (cell < 0) cell = 0;
    if (cell > n_ - 1) cell = n_ - 1;
    return cell;
}

std::vector<double> Mesh::breakpoints() const { return uniform_breakpoints(n_); }

Mesh refine_nested(const Mesh& mesh) { return Mesh(2 * mesh.cells()); }

double Polynomial::operator()(double x) const {
    double v = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
    return v;
}

void basis_values(double a, double b, double s, std::span<double> values) {
    const double h = b - a;
    const double x = 2.0 * (s - a) / h - 1.0;
    const double scale = 1.0 / std::sqrt(h);
    double p0 = 1.0, p1 = x;
    for (std::size_t j = 0; j < values.size(); ++j) {
        double pj;
        if (j == 0) {
            pj = 1.0;
        } else if (j == 1) {
            pj = x;
        } else {
            const double jj = static_cast<double>(j);
            pj = ((2.0 * jj - 1.0) * x * p1 - (jj - 1.0) * p0) / jj;
            p0 = p1;
            p1 = pj;
        }
        values[j] = std::sqrt(2.0 * j + 1.0) * scale * pj;
    }
}

double basis_value(double a, double b, int j, double s) {
    std::vector<double> v(j + 1);
    basis_values(a, b, s, v);
    return v[j];
}

std::vector<Polynomial> orthonormal_basis(double a, double b, int k) {
    if (k < 1) throw std::invalid_argument("orthonormal_basis: k must be >= 1");
    if (!(b > a)) throw std::invalid_argument("orthonormal_basis: empty cell");
    // Legendre polynomials in x = alpha*s + beta, expanded to monomials in s.
    const double h = b - a;
    const double alpha = 2.0 / h, beta = -2.0 * a / h - 1.0;
    std::vector<std::vector<double>> legendre;
    legendre.push_back({1.0});
    if (k > 1) legendre.push_back({beta, alpha});
    for (int j = 2; j < k; ++j) {
        const auto& p1 = legendre[j - 1];
        const auto& p0 = legendre[j - 2];
        std::vector<double> next(j + 1, 0.0);
        // ((2j-1) x P_{j-1} - (j-1) P_{j-2}) / j with x = alpha*s + beta
        for (std::size_t d = 0; d < p1.size(); ++d) {
            next[d] += (2.0 * j - 1.0) * beta * p1[d] / j;
            next[d + 1] += (2.0 * j - 1.0) * alpha * p1[d] / j;
        }
        for (std::size_t d = 0; d < p0.size(); ++d) next[d] -= (j - 1.0) * p0[d] / j;
        legendre.push_back(std::move(next));
    }
    std::vector<Polynomial> basis;
    for (int j = 0; j < k; ++j) {
        const double norm = std::sqrt((2.0 * j + 1.0) / h);
        Polynomial p{legendre[j]};
        for (double& c : p.coeffs) c *= norm;
        basis.push_back(std::move(p));
    }
    return basis;
}

PiecewisePoly::PiecewisePoly(Mesh mesh, int k)
    : PiecewisePoly(mesh, k, std::vector<double>(static_cast<std::size_t>(mesh.cells()) * k, 0.0)) {}

PiecewisePoly::PiecewisePoly(Mesh mesh, int k, std::vector<double> coeffs)
    : mesh_(mesh), k_(k), coeffs_(std::move(coeffs)) {
    if (k < 1) throw std::invalid_argument("PiecewisePoly: order must be >= 1");
    if (coeffs_.size() != static_cast<std::size_t>(mesh_.cells()) * k_)
        throw std::invalid_argument("PiecewisePoly: coefficient count must equal n*k");
    for (double c : coeffs_)
        if (!std::isfinite(c)) throw std::invalid_argument("PiecewisePoly: non-finite coefficient");
}

double PiecewisePoly::eval_in_cell(int cell, double t) const {
    double buf[32];
    std::vector<double> heap;
    std::span<double> phi;
    if (k_ <= 32) {
        phi = std::span<double>(buf, k_);
    } else {
        heap.resize(k_);
        phi = heap;
    }
    basis_values(mesh_.left(cell), mesh_.right(cell), t, phi);
    double v = 0.0;
    for (int j = 0; j < k_; ++j) v += coeffs_[cell * k_ + j] * phi[j];
    return v;
}

double PiecewisePoly::eval(double t) const { return eval_in_cell(mesh_.cell_of(t), t); }

PiecewisePoly project_Pn(const std::function<double(double)>& f, const Mesh& mesh, int k,
                         int gauss_order) {
    PiecewisePoly out(mesh, k);
    const GaussRule& rule = gauss_legendre(gauss_order);
    std::vector<double> phi(k);
    for (int cell = 0; cell < mesh.cells(); ++cell) {
        const double a = mesh.left(cell), b = mesh.right(cell);
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double s = mid + half * rule.nodes[g];
            const double fs = f(s);
            if (!std::isfinite(fs)) throw std::invalid_argument("project_Pn: non-finite sample");
            basis_values(a, b, s, phi);
            for (int j = 0; j < k; ++j) out.coeffs()[cell * k + j] += half * rule.weights[g] * fs * phi[j];
        }
    }
    return out;
}

}  // namespace regproj
