#pragma once

#include "regproj/quadrature.hpp"
#include "regproj/splines.hpp"

#include <functional>
#include <span>
#include <vector>

namespace regproj {

/// Function space on [0, 1]: L^p with 1 < p < infinity, or C[0, 1].
///
/// For L^p the duality mapping J_q is the subdifferential of (1/q)||.||^q with
/// q = max(2, p). The conjugate space returned by dual() carries the conjugate
/// power q* = q / (q - 1) rather than max(2, p*), so that
/// dual().duality_map is the inverse of duality_map.
struct SpaceSpec {
    enum class Kind { Lp, C };

    Kind kind = Kind::C;
    double p = 0.0;  ///< Lebesgue exponent (Lp only)
    double q = 0.0;  ///< power of the norm functional (Lp only)

    static SpaceSpec lp(double p);
    static SpaceSpec continuous() { return {}; }

    bool is_lp() const { return kind == Kind::Lp; }
    double p_star() const { return p / (p - 1.0); }
    double q_star() const { return q / (q - 1.0); }
    SpaceSpec dual() const;
};

/// Function known by its values on a grid of [0, 1], with quadrature weights.
///
/// Integrals are sum_i weights[i] * g(values[i]); grids built by sample_gauss
/// use composite Gauss-Legendre weights, and carry the endpoints 0 and 1 with
/// zero weight so the grid also serves sup-norm sampling. Point evaluation
/// between grid points interpolates linearly.
class SampledFunction {
public:
    SampledFunction(std::vector<double> grid, std::vector<double> values, std::vector<double> weights);

    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return grid_.size(); }

    double operator()(double t) const;

    /// Same grid and weights, new values.
    SampledFunction with_values(std::vector<double> values) const;

    bool shares_grid(const SampledFunction& other) const;

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> weights_;
};

/// Composite Gauss grid on the given breakpoints, endpoints added with zero weight.
QuadratureGrid gauss_sampling_grid(std::span<const double> breakpoints, int order);

SampledFunction sample(const std::function<double(double)>& f, const QuadratureGrid& grid);

/// Samples f at `order` Gauss points per piece of `breakpoints` (plus endpoints).
SampledFunction sample_gauss(const std::function<double(double)>& f,
                             std::span<const double> breakpoints, int order = 16);

/// Samples a spline at `order` Gauss points per mesh cell (plus endpoints).
SampledFunction sample_gauss(const PiecewisePoly& u, int order = 16);

/// Uniform sampling with `samples_per_cell` points per mesh cell (endpoints
/// included) and trapezoidal weights.
SampledFunction sample_uniform(const std::function<double(double)>& f, const Mesh& mesh,
                               int samples_per_cell = 64);

/// (integral |f|^p)^(1/p) for p >= 1, by the sampled function's quadrature.
double lp_norm(const SampledFunction& f, double p);
double lp_norm(const SampledFunction& f, const SpaceSpec& spec);
double lp_norm(const PiecewisePoly& f, const SpaceSpec& spec, int gauss_order = 16);

/// max |values|: a lower bound of the sup norm that converges as sampling refines.
double sup_norm(const SampledFunction& f);

/// Norm in the given space: lp_norm for L^p, sup_norm for C.
double norm(const SampledFunction& f, const SpaceSpec& spec);

/// <a, b> = integral a*b on a shared grid.
double pairing(const SampledFunction& a, const SampledFunction& b);

/// (J_q w)(x) = ||w||^(q-p) |w(x)|^(p-1) sign(w(x)).
SampledFunction duality_map(const SampledFunction& w, const SpaceSpec& spec);

/// Inverse duality mapping, J_{q*} on the conjugate space.
SampledFunction duality_map_inverse(const SampledFunction& z, const SpaceSpec& spec);

/// D_q(u_tilde, u) = (1/q)||u_tilde||^q - (1/q)||u||^q + <J_q u, u - u_tilde>.
double bregman_distance(const SampledFunction& u_tilde, const SampledFunction& u,
                        const SpaceSpec& spec);
double bregman_distance(const PiecewisePoly& u_tilde, const PiecewisePoly& u,
                        const SpaceSpec& spec, int gauss_order = 16);

/// <J_q u - J_q u_tilde, u - u_tilde> = D(u_tilde, u) + D(u, u_tilde).
double bregman_symmetric(const SampledFunction& u_tilde, const SampledFunction& u,
                         const SpaceSpec& spec);
double bregman_symmetric(const PiecewisePoly& u_tilde, const PiecewisePoly& u,
                         const SpaceSpec& spec, int gauss_order = 16);

}  // namespace regproj
