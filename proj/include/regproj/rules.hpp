#pragma once

#include "regproj/operators.hpp"
#include "regproj/solvers.hpp"

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace regproj {

/// Asymptotic bound on sup|Aw| / max_nodes|Aw| for linear splines, l = 2 and
/// nodes {(i-1+c)h, ih}. Domain 0.5 < c < 1.
double tau_of_c(double c);

/// Default discrepancy constant b(c) = 1.01 + tau(c).
inline double default_b(double c) { return 1.01 + tau_of_c(c); }

enum class Admissibility { admissible, inadmissible, unknown };

struct AdmissibilityReport {
    double product = 0.0;
    Admissibility verdict = Admissibility::unknown;
};

/// Convergence test for collocation parameters: prod (1-c_j)/c_j < 1 (l = 1);
/// c_k = 1 and the product over j < k below 1 (l = 2); unknown for l > 2.
AdmissibilityReport check_collocation_params(std::span<const double> c, int l);

const char* to_string(Admissibility a);

/// n = max(1, floor(delta^(-theta/l))).
int choose_n_apriori(double delta, int l, double theta);

struct TraceEntry {
    int n = 0;
    double value = 0.0;  ///< d_DP(n) or d_ME(n)
    std::string decision;
};

struct RuleTrace {
    std::string rule_id;
    double constant = 0.0;  ///< b for the discrepancy principle, delta for ME
    std::vector<TraceEntry> entries;
    int chosen_n = 0;
    bool reached = false;

    /// n,criterion_value,decision
    std::string csv() const;
};

/// A solve failed inside a rule; carries the trace up to the failing n.
class RuleError : public std::runtime_error {
public:
    RuleError(const std::string& what, RuleTrace partial, int n)
        : std::runtime_error(what), partial_(std::move(partial)), n_(n) {}
    const RuleTrace& partial_trace() const { return partial_; }
    int failing_n() const { return n_; }

private:
    RuleTrace partial_;
    int n_;
};

/// d_ME(n) is undefined because v_{n+1} = v_n.
class UndefinedIndexError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

std::vector<int> consecutive_family(int n_max, int n_min = 1);
/// n_min, 2 n_min, 4 n_min, ... up to n_max.
std::vector<int> dyadic_family(int n_max, int n_min = 1);

using SolveAt = std::function<SolveResult(int)>;

/// First n of the family with residual_C <= b delta.
RuleTrace choose_n_discrepancy(const SolveAt& solve_at, double delta, double b, std::span<const int> family);

/// d_ME(n) = <v_{n+1} - v_n, f> / (q ||v_{n+1} - v_n||), the norm being the
/// total variation of the measure. f is read at the nodes of v_next.
double me_index(const DiracCombo& v_n, const DiracCombo& v_next, const NodalData& f_delta, double q);

/// First n of a nested family with delta > d_ME(n). `data_at(n)` returns the
/// data seen by the level-n solve; q is the power of the solution space.
RuleTrace choose_n_monotone_error(const SolveAt& solve_at, const std::function<NodalData(int)>& data_at,
                                  double delta, std::span<const int> family, double q);

}  // namespace regproj
