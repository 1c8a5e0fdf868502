#include "regproj/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace regproj {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

GaussRule compute_rule(int order) {
    GaussRule rule;
    rule.nodes.assign(order, 0.0);
    rule.weights.assign(order, 0.0);
    if (order == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }
    // roots are symmetric; Newton from the standard cosine guess
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre_with_derivative(order, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre_with_derivative(order, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

std::vector<double> merge_breakpoints(std::span<const double> a, std::span<const double> b,
                                      double tol) {
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double x : all) {
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    }
    return out;
}

QuadratureGrid composite_gauss(std::span<const double> breakpoints, int order) {
    const double ends[] = {0.0, 1.0};
    std::vector<double> bp = merge_breakpoints(breakpoints, ends);
    bp.erase(std::remove_if(bp.begin(), bp.end(), [](double x) { return x < 0.0 || x > 1.0; }),
             bp.end());
    const GaussRule& rule = gauss_legendre(order);
    QuadratureGrid grid;
    grid.points.reserve((bp.size() - 1) * order);
    grid.weights.reserve((bp.size() - 1) * order);
    for (std::size_t piece = 0; piece + 1 < bp.size(); ++piece) {
        const double a = bp[piece], b = bp[piece + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int i = 0; i < order; ++i) {
            grid.points.push_back(mid + half * rule.nodes[i]);
            grid.weights.push_back(half * rule.weights[i]);
        }
    }
    return grid;
}

std::vector<double> uniform_breakpoints(int n) {
    if (n < 1) throw std::invalid_argument("uniform_breakpoints: n must be >= 1");
    std::vector<double> bp(n + 1);
    for (int i = 0; i <= n; ++i) bp[i] = static_cast<double>(i) / n;
    return bp;
}

std::vector<double> graded_breakpoints(int n, int levels) {
    std::vector<double> bp = uniform_breakpoints(n);
    const double h = 1.0 / n;
    std::vector<double> extra;
    double x = h;
    for (int i = 0; i < levels; ++i) {
        x *= 0.5;
        extra.push_back(x);
    }
    return merge_breakpoints(bp, extra, 0.0);
}

}  // namespace regproj
