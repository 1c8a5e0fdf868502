#pragma once

#include <span>
#include <vector>

namespace regproj {

/// Gauss-Legendre rule on the reference interval [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Returns the `order`-point Gauss-Legendre rule (exact for degree 2*order-1).
/// Rules are computed once per order and cached; the reference is stable.
const GaussRule& gauss_legendre(int order);

/// Smallest Gauss order that integrates polynomials of `degree` exactly.
inline int gauss_order_for_degree(int degree) { return degree < 1 ? 1 : (degree + 2) / 2; }

/// Integrates f over [a, b] with the given Gauss order.
template <class F>
double integrate(F&& f, double a, double b, int order) {
    if (!(b > a)) return 0.0;
    const GaussRule& rule = gauss_legendre(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

/// Composite quadrature grid: points with weights such that
/// sum_i weights[i] * g(points[i]) approximates the integral of g over [0, 1].
struct QuadratureGrid {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

/// Composite Gauss-Legendre grid with `order` points on every piece between
/// consecutive breakpoints. Breakpoints are sorted and deduplicated; 0 and 1 are
/// always included.
QuadratureGrid composite_gauss(std::span<const double> breakpoints, int order);

/// Breakpoints i/n, i = 0..n.
std::vector<double> uniform_breakpoints(int n);

/// Uniform breakpoints refined geometrically towards s = 0 inside the first cell
/// (`levels` halvings), for integrands with an algebraic singularity at the origin.
std::vector<double> graded_breakpoints(int n, int levels);

/// Sorted union of two breakpoint sets with near-duplicates (|a - b| <= tol) merged.
std::vector<double> merge_breakpoints(std::span<const double> a, std::span<const double> b,
                                      double tol = 1e-13);

}  // namespace regproj
