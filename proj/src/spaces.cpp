#include "regproj/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace regproj {

namespace {

void require_finite(std::span<const double> values) {
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite input");
}

void require_duality_space(const SpaceSpec& spec) {
    if (!spec.is_lp() || !(spec.p > 1.0) || !std::isfinite(spec.p) || !(spec.q > 1.0))
        throw std::invalid_argument("duality mapping requires L^p with 1 < p < infinity");
}

void require_shared_grid(const SampledFunction& a, const SampledFunction& b) {
    if (!a.shares_grid(b)) throw std::invalid_argument("sampled functions must share a grid");
}

double signed_power(double x, double e) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), e), x);
}

}  // namespace

SpaceSpec SpaceSpec::lp(double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("SpaceSpec::lp: exponent must satisfy 1 < p < infinity");
    return {Kind::Lp, p, std::max(2.0, p)};
}

SpaceSpec SpaceSpec::dual() const {
    if (!is_lp()) throw std::invalid_argument("SpaceSpec::dual: only L^p spaces have a dual here");
    return {Kind::Lp, p_star(), q_star()};
}

SampledFunction::SampledFunction(std::vector<double> grid, std::vector<double> values,
                                 std::vector<double> weights)
    : grid_(std::move(grid)), values_(std::move(values)), weights_(std::move(weights)) {
    if (grid_.empty()) throw std::invalid_argument("SampledFunction: empty grid");
    if (values_.size() != grid_.size() || weights_.size() != grid_.size())
        throw std::invalid_argument("SampledFunction: grid, values and weights differ in size");
    for (std::size_t i = 1; i < grid_.size(); ++i)
        if (!(grid_[i] > grid_[i - 1]))
            throw std::invalid_argument("SampledFunction: grid must be strictly increasing");
}

double SampledFunction::operator()(double t) const {
    if (t <= grid_.front()) return values_.front();
    if (t >= grid_.back()) return values_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    const double x0 = grid_[i - 1], x1 = grid_[i];
    const double lambda = (t - x0) / (x1 - x0);
    return (1.0 - lambda) * values_[i - 1] + lambda * values_[i];
}

SampledFunction SampledFunction::with_values(std::vector<double> values) const {
    return SampledFunction(grid_, std::move(values), weights_);
}

bool SampledFunction::shares_grid(const SampledFunction& other) const {
    return grid_ == other.grid_ && weights_ == other.weights_;
}

QuadratureGrid gauss_sampling_grid(std::span<const double> breakpoints, int order) {
    QuadratureGrid inner = composite_gauss(breakpoints, order);
    QuadratureGrid grid;
    grid.points.reserve(inner.size() + 2);
    grid.weights.reserve(inner.size() + 2);
    grid.points.push_back(0.0);
    grid.weights.push_back(0.0);
    grid.points.insert(grid.points.end(), inner.points.begin(), inner.points.end());
    grid.weights.insert(grid.weights.end(), inner.weights.begin(), inner.weights.end());
    grid.points.push_back(1.0);
    grid.weights.push_back(0.0);
    return grid;
}

SampledFunction sample(const std::function<double(double)>& f, const QuadratureGrid& grid) {
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid.points[i]);
    return SampledFunction(grid.points, std::move(values), grid.weights);
}

SampledFunction sample_gauss(const std::function<double(double)>& f,
                             std::span<const double> breakpoints, int order) {
    return sample(f, gauss_sampling_grid(breakpoints, order));
}

SampledFunction sample_gauss(const PiecewisePoly& u, int order) {
    const std::vector<double> bp = u.mesh().breakpoints();
    return sample_gauss([&u](double t) { return u(t); }, bp, order);
}

SampledFunction sample_uniform(const std::function<double(double)>& f, const Mesh& mesh,
                               int samples_per_cell) {
    if (samples_per_cell < 1) throw std::invalid_argument("sample_uniform: need >= 1 sample per cell");
    const int m = mesh.cells() * samples_per_cell;
    std::vector<double> grid(m + 1), values(m + 1), weights(m + 1, 1.0 / m);
    for (int i = 0; i <= m; ++i) {
        grid[i] = static_cast<double>(i) / m;
        values[i] = f(grid[i]);
    }
    weights.front() = weights.back() = 0.5 / m;
    return SampledFunction(std::move(grid), std::move(values), std::move(weights));
}

double lp_norm(const SampledFunction& f, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("lp_norm: need 1 <= p < infinity");
    require_finite(f.values());
    const auto v = f.values();
    const auto w = f.weights();
    double sum = 0.0;
    if (p == 2.0) {
        for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * v[i] * v[i];
        return std::sqrt(sum);
    }
    if (p == 1.0) {
        for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * std::abs(v[i]);
        return sum;
    }
    for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * std::pow(std::abs(v[i]), p);
    return std::pow(sum, 1.0 / p);
}

double lp_norm(const SampledFunction& f, const SpaceSpec& spec) {
    if (!spec.is_lp()) throw std::invalid_argument("lp_norm: space is not L^p");
    return lp_norm(f, spec.p);
}

double lp_norm(const PiecewisePoly& f, const SpaceSpec& spec, int gauss_order) {
    return lp_norm(sample_gauss(f, gauss_order), spec);
}

double sup_norm(const SampledFunction& f) {
    require_finite(f.values());
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double norm(const SampledFunction& f, const SpaceSpec& spec) {
    return spec.is_lp() ? lp_norm(f, spec.p) : sup_norm(f);
}

double pairing(const SampledFunction& a, const SampledFunction& b) {
    require_shared_grid(a, b);
    const auto va = a.values(), vb = b.values(), w = a.weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) sum += w[i] * va[i] * vb[i];
    return sum;
}

SampledFunction duality_map(const SampledFunction& w, const SpaceSpec& spec) {
    require_duality_space(spec);
    const double nrm = lp_norm(w, spec.p);
    std::vector<double> out(w.size(), 0.0);
    if (nrm == 0.0) return w.with_values(std::move(out));
    if (spec.p == 2.0 && spec.q == 2.0) {
        const auto v = w.values();
        return w.with_values(std::vector<double>(v.begin(), v.end()));
    }
    const double factor = std::pow(nrm, spec.q - spec.p);
    const auto v = w.values();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = factor * signed_power(v[i], spec.p - 1.0);
    return w.with_values(std::move(out));
}

SampledFunction duality_map_inverse(const SampledFunction& z, const SpaceSpec& spec) {
    require_duality_space(spec);
    return duality_map(z, spec.dual());
}

double bregman_distance(const SampledFunction& u_tilde, const SampledFunction& u,
                        const SpaceSpec& spec) {
    require_duality_space(spec);
    require_shared_grid(u_tilde, u);
    const double q = spec.q;
    const SampledFunction ju = duality_map(u, spec);
    const auto vt = u_tilde.values(), vu = u.values(), vj = ju.values(), w = u.weights();
    double cross = 0.0;
    for (std::size_t i = 0; i < vu.size(); ++i) cross += w[i] * vj[i] * (vu[i] - vt[i]);
    const double d = std::pow(lp_norm(u_tilde, spec.p), q) / q - std::pow(lp_norm(u, spec.p), q) / q + cross;
    return d;
}

double bregman_symmetric(const SampledFunction& u_tilde, const SampledFunction& u,
                         const SpaceSpec& spec) {
    require_duality_space(spec);
    require_shared_grid(u_tilde, u);
    const SampledFunction ju = duality_map(u, spec);
    const SampledFunction jt = duality_map(u_tilde, spec);
    const auto vt = u_tilde.values(), vu = u.values(), a = ju.values(), b = jt.values(),
               w = u.weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < vu.size(); ++i) sum += w[i] * (a[i] - b[i]) * (vu[i] - vt[i]);
    return sum;
}

namespace {

std::pair<SampledFunction, SampledFunction> sample_pair(const PiecewisePoly& a, const PiecewisePoly& b,
                                                        int order) {
    const std::vector<double> ba = a.mesh().breakpoints(), bb = b.mesh().breakpoints();
    const std::vector<double> bp = merge_breakpoints(ba, bb);
    const QuadratureGrid grid = gauss_sampling_grid(bp, order);
    return {sample([&a](double t) { return a(t); }, grid), sample([&b](double t) { return b(t); }, grid)};
}

}  // namespace

double bregman_distance(const PiecewisePoly& u_tilde, const PiecewisePoly& u, const SpaceSpec& spec,
                        int gauss_order) {
    const auto [st, su] = sample_pair(u_tilde, u, gauss_order);
    return bregman_distance(st, su, spec);
}

double bregman_symmetric(const PiecewisePoly& u_tilde, const PiecewisePoly& u, const SpaceSpec& spec,
                         int gauss_order) {
    const auto [st, su] = sample_pair(u_tilde, u, gauss_order);
    return bregman_symmetric(st, su, spec);
}

}  // namespace regproj
