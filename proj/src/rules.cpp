#include "regproj/rules.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace regproj {

double tau_of_c(double c) {
    if (!(c > 0.5 && c < 1.0)) throw std::domain_error("tau_of_c: need 0.5 < c < 1");
    const double y = c * (-2.0 * c * c * c + c * c + 1.0);
    const double num = 4.0 * std::pow(y * y - y + 1.0, 1.5) - 4.0 * y * y * y + 6.0 * y * y + 6.0 * y - 4.0;
    const double den = 27.0 * y * y * (2.0 * c - 1.0) * (1.0 - c);
    return 1.0 + num / den;
}

AdmissibilityReport check_collocation_params(std::span<const double> c, int l) {
    if (c.empty()) throw std::invalid_argument("check_collocation_params: empty parameter list");
    if (l < 1) throw std::invalid_argument("check_collocation_params: l must be >= 1");
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (!(c[j] > 0.0 && c[j] <= 1.0))
            throw std::invalid_argument("check_collocation_params: parameters must lie in (0, 1]");
        if (j > 0 && !(c[j] > c[j - 1]))
            throw std::invalid_argument("check_collocation_params: parameters must be strictly increasing");
    }
    AdmissibilityReport rep;
    const std::size_t m = (l == 2) ? c.size() - 1 : c.size();
    rep.product = 1.0;
    for (std::size_t j = 0; j < m; ++j) rep.product *= (1.0 - c[j]) / c[j];
    if (l == 1)
        rep.verdict = rep.product < 1.0 ? Admissibility::admissible : Admissibility::inadmissible;
    else if (l == 2)
        rep.verdict = (c.back() == 1.0 && rep.product < 1.0) ? Admissibility::admissible
                                                             : Admissibility::inadmissible;
    return rep;
}

const char* to_string(Admissibility a) {
    switch (a) {
        case Admissibility::admissible: return "admissible";
        case Admissibility::inadmissible: return "inadmissible";
        default: return "unknown";
    }
}

int choose_n_apriori(double delta, int l, double theta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("choose_n_apriori: need delta > 0");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("choose_n_apriori: need 0 < theta < 1");
    if (l < 1) throw std::invalid_argument("choose_n_apriori: l must be >= 1");
    const double n = std::floor(std::pow(delta, -theta / l) + 1e-9);
    if (n >= static_cast<double>(std::numeric_limits<int>::max())) throw std::overflow_error("choose_n_apriori: n too large");
    return std::max(1, static_cast<int>(n));
}

std::string RuleTrace::csv() const {
    std::string out = "n,criterion_value,decision\n";
    char buf[96];
    for (const TraceEntry& e : entries) {
        std::snprintf(buf, sizeof buf, "%d,%.10e,", e.n, e.value);
        out += buf;
        out += e.decision;
        out += '\n';
    }
    return out;
}

std::vector<int> consecutive_family(int n_max, int n_min) {
    std::vector<int> f;
    for (int n = std::max(1, n_min); n <= n_max; ++n) f.push_back(n);
    return f;
}

std::vector<int> dyadic_family(int n_max, int n_min) {
    std::vector<int> f;
    for (int n = std::max(1, n_min); n <= n_max; n *= 2) f.push_back(n);
    return f;
}

RuleTrace choose_n_discrepancy(const SolveAt& solve_at, double delta, double b, std::span<const int> family) {
    if (!(delta > 0.0)) throw std::invalid_argument("choose_n_discrepancy: need delta > 0");
    if (!(b > 1.0)) throw std::invalid_argument("choose_n_discrepancy: need b > 1");
    if (family.empty()) throw std::invalid_argument("choose_n_discrepancy: empty family");
    RuleTrace trace{"dp", b, {}, family.back(), false};
    for (int n : family) {
        double d = 0.0;
        try {
            d = solve_at(n).residual_C;
        } catch (const std::exception& e) {
            throw RuleError(std::string("discrepancy principle: solve failed at n = ") + std::to_string(n) + ": " +
                                e.what(),
                            trace, n);
        }
        const bool stop = d <= b * delta;
        trace.entries.push_back({n, d, stop ? "stop" : "continue"});
        if (stop) {
            trace.chosen_n = n;
            trace.reached = true;
            return trace;
        }
    }
    trace.entries.back().decision = "not_reached";
    return trace;
}

double me_index(const DiracCombo& v_n, const DiracCombo& v_next, const NodalData& f_delta, double q) {
    if (!(q > 1.0)) throw std::invalid_argument("me_index: need q > 1");
    std::vector<double> diff = v_next.weights;
    for (std::size_t i = 0; i < v_n.nodes.size(); ++i) {
        std::size_t j = 0;
        while (j < v_next.nodes.size() && std::abs(v_next.nodes[j] - v_n.nodes[i]) > 1e-12) ++j;
        if (j == v_next.nodes.size()) throw std::invalid_argument("me_index: node sets are not nested");
        diff[j] -= v_n.weights[i];
    }
    double tv = 0.0, pair = 0.0;
    for (std::size_t j = 0; j < diff.size(); ++j) {
        tv += std::abs(diff[j]);
        pair += diff[j] * f_delta.at_node(v_next.nodes[j]);
    }
    if (tv == 0.0) throw UndefinedIndexError("me_index: v_{n+1} = v_n, d_ME undefined");
    return pair / (q * tv);
}

RuleTrace choose_n_monotone_error(const SolveAt& solve_at, const std::function<NodalData(int)>& data_at,
                                  double delta, std::span<const int> family, double q) {
    if (!(delta >= 0.0)) throw std::invalid_argument("choose_n_monotone_error: need delta >= 0");
    if (family.size() < 2) throw std::invalid_argument("choose_n_monotone_error: family needs two levels");
    RuleTrace trace{"me", delta, {}, family.back(), false};
    auto solve = [&](int n) {
        try {
            SolveResult r = solve_at(n);
            if (!r.dual) throw std::invalid_argument("monotone error rule needs least-error solutions");
            return r;
        } catch (const std::exception& e) {
            throw RuleError(std::string("monotone error rule: solve failed at n = ") + std::to_string(n) + ": " +
                                e.what(),
                            trace, n);
        }
    };
    SolveResult current = solve(family[0]);
    for (std::size_t i = 0; i + 1 < family.size(); ++i) {
        SolveResult next = solve(family[i + 1]);
        const double d = me_index(*current.dual, *next.dual, data_at(family[i + 1]), q);
        const bool stop = delta > d;
        trace.entries.push_back({family[i], d, stop ? "stop" : "continue"});
        if (stop) {
            trace.chosen_n = family[i];
            trace.reached = true;
            return trace;
        }
        current = std::move(next);
    }
    trace.entries.push_back({family.back(), std::numeric_limits<double>::quiet_NaN(), "not_reached"});
    return trace;
}

}  // namespace regproj
