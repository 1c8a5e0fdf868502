#include "regproj/operators.hpp"

#include "regproj/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace regproj {

namespace {

double int_pow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

double green_d4_lower(double t, double s) {
    return -s * s * (1.0 - t) * (1.0 - t) * (s + 2.0 * s * t - 3.0 * t) / 6.0;
}

double bilinear(const TabulatedKernel& k, double t, double s) {
    auto locate = [](const std::vector<double>& g, double x, std::size_t& i, double& w) {
        if (g.size() == 1 || x <= g.front()) {
            i = 0;
            w = 0.0;
            return;
        }
        if (x >= g.back()) {
            i = g.size() - 2;
            w = 1.0;
            return;
        }
        i = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin()) - 1;
        w = (x - g[i]) / (g[i + 1] - g[i]);
    };
    std::size_t it, is;
    double wt, ws;
    locate(k.t_grid, t, it, wt);
    locate(k.s_grid, s, is, ws);
    const std::size_t ns = k.s_grid.size();
    auto at = [&](std::size_t i, std::size_t j) {
        i = std::min(i, k.t_grid.size() - 1);
        j = std::min(j, ns - 1);
        return k.values[i * ns + j];
    };
    return (1 - wt) * ((1 - ws) * at(it, is) + ws * at(it, is + 1)) +
           wt * ((1 - ws) * at(it + 1, is) + ws * at(it + 1, is + 1));
}

}  // namespace

Kernel::Kernel(Variant v) : v_(std::move(v)) {
    if (const auto* vp = std::get_if<VolterraPower>(&v_); vp && vp->l < 1)
        throw std::invalid_argument("VolterraPower: l must be >= 1");
    if (const auto* tab = std::get_if<TabulatedKernel>(&v_)) {
        if (tab->t_grid.empty() || tab->s_grid.empty() ||
            tab->values.size() != tab->t_grid.size() * tab->s_grid.size())
            throw std::invalid_argument("TabulatedKernel: values must fill the tensor grid");
        if (!std::is_sorted(tab->t_grid.begin(), tab->t_grid.end()) ||
            !std::is_sorted(tab->s_grid.begin(), tab->s_grid.end()))
            throw std::invalid_argument("TabulatedKernel: grids must be increasing");
        for (double v : tab->values)
            if (!std::isfinite(v)) throw std::invalid_argument("TabulatedKernel: non-finite sample");
    }
}

Kernel Kernel::parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::map<std::pair<double, double>, double> samples;
    std::vector<double> ts, ss;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double t, s, k;
        if (!(fields >> t >> s >> k)) {
            if (first) {
                first = false;
                continue;
            }
            throw std::invalid_argument("kernel CSV: malformed line '" + line + "'");
        }
        first = false;
        samples[{t, s}] = k;
        ts.push_back(t);
        ss.push_back(s);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    std::sort(ss.begin(), ss.end());
    ss.erase(std::unique(ss.begin(), ss.end()), ss.end());
    TabulatedKernel tab{ts, ss, {}};
    tab.values.reserve(ts.size() * ss.size());
    for (double t : ts) {
        for (double s : ss) {
            const auto it = samples.find({t, s});
            if (it == samples.end()) throw std::invalid_argument("kernel CSV: samples do not form a tensor grid");
            tab.values.push_back(it->second);
        }
    }
    return Kernel(std::move(tab));
}

Kernel Kernel::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open kernel file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

double Kernel::operator()(double t, double s) const {
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, VolterraPower>) {
                if (!(s < t)) return 0.0;
                const double v = int_pow(t - s, k.l - 1);
                return k.factorial_normalized ? v / factorial(k.l - 1) : v;
            } else if constexpr (std::is_same_v<T, GreenD2>) {
                return s < t ? s * (t - 1.0) : t * (s - 1.0);
            } else if constexpr (std::is_same_v<T, GreenD4>) {
                return s < t ? green_d4_lower(t, s) : green_d4_lower(s, t);
            } else {
                return bilinear(k, t, s);
            }
        },
        v_);
}

bool Kernel::is_volterra() const { return std::holds_alternative<VolterraPower>(v_); }

int Kernel::degree_in_s() const {
    return std::visit(
        [](const auto& k) -> int {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, VolterraPower>) return k.l - 1;
            else if constexpr (std::is_same_v<T, GreenD2>) return 1;
            else if constexpr (std::is_same_v<T, GreenD4>) return 3;
            else return 1;
        },
        v_);
}

std::vector<double> Kernel::s_breakpoints(double t) const {
    std::vector<double> bp;
    if (const auto* tab = std::get_if<TabulatedKernel>(&v_)) {
        for (double s : tab->s_grid)
            if (s > 0.0 && s < 1.0) bp.push_back(s);
    } else if (t > 0.0 && t < 1.0) {
        bp.push_back(t);
    }
    return bp;
}

bool Kernel::under_resolved(const Mesh& mesh) const {
    const auto* tab = std::get_if<TabulatedKernel>(&v_);
    if (!tab) return false;
    const auto n = static_cast<std::size_t>(mesh.cells());
    return tab->t_grid.size() < n + 1 || tab->s_grid.size() < n + 1;
}

CollocationScheme::CollocationScheme(Mesh mesh, std::vector<double> c) : mesh_(mesh), c_(std::move(c)) {
    if (c_.empty()) throw std::invalid_argument("CollocationScheme: need at least one parameter");
    for (std::size_t j = 0; j < c_.size(); ++j) {
        if (!(c_[j] > 0.0 && c_[j] <= 1.0))
            throw std::invalid_argument("CollocationScheme: parameters must lie in (0, 1]");
        if (j > 0 && !(c_[j] > c_[j - 1]))
            throw std::invalid_argument("CollocationScheme: parameters must be strictly increasing");
    }
}

std::vector<double> CollocationScheme::nodes() const {
    std::vector<double> t;
    t.reserve(node_count());
    const double h = mesh_.h();
    for (int i = 0; i < mesh_.cells(); ++i)
        for (double c : c_) t.push_back(c == 1.0 ? mesh_.right(i) : (i + c) * h);
    return t;
}

DiracCombo::DiracCombo(std::vector<double> n, std::vector<double> w) : nodes(std::move(n)), weights(std::move(w)) {
    if (nodes.size() != weights.size()) throw std::invalid_argument("DiracCombo: nodes and weights differ in size");
    std::vector<double> sorted = nodes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("DiracCombo: nodes must be distinct");
}

double DiracCombo::tv_norm() const {
    double s = 0.0;
    for (double w : weights) s += std::abs(w);
    return s;
}

void cell_kernel_moments(const Kernel& kernel, double t, double a, double b, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const int k = static_cast<int>(out.size());
    double hi = b;
    if (kernel.is_volterra()) hi = std::min(b, t);
    if (!(hi > a)) return;
    std::vector<double> cuts{a};
    for (double x : kernel.s_breakpoints(t))
        if (x > a && x < hi) cuts.push_back(x);
    cuts.push_back(hi);
    const int order = gauss_order_for_degree(k - 1 + kernel.degree_in_s());
    const GaussRule& rule = gauss_legendre(order);
    std::vector<double> phi(k);
    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double lo = cuts[piece], up = cuts[piece + 1];
        const double half = 0.5 * (up - lo), mid = 0.5 * (up + lo);
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double s = mid + half * rule.nodes[g];
            const double kw = half * rule.weights[g] * kernel(t, s);
            basis_values(a, b, s, phi);
            for (int j = 0; j < k; ++j) out[j] += kw * phi[j];
        }
    }
}

ApplyResult apply_A_checked(const Kernel& kernel, const PiecewisePoly& u, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("apply_A: t outside [0, 1]");
    const Mesh& mesh = u.mesh();
    const int k = u.order();
    std::vector<double> m(k);
    double value = 0.0;
    for (int cell = 0; cell < mesh.cells(); ++cell) {
        if (kernel.is_volterra() && mesh.left(cell) >= t) break;
        cell_kernel_moments(kernel, t, mesh.left(cell), mesh.right(cell), m);
        for (int j = 0; j < k; ++j) value += m[j] * u.coeff(cell, j);
    }
    return {value, kernel.under_resolved(mesh)};
}

double apply_A(const Kernel& kernel, const PiecewisePoly& u, double t) {
    return apply_A_checked(kernel, u, t).value;
}

ForwardImage::ForwardImage(const Kernel& kernel, const PiecewisePoly& u) : kernel_(kernel), u_(u) {
    const auto* vp = std::get_if<VolterraPower>(&kernel.variant());
    if (!vp) return;
    l_ = vp->l;
    scale_ = vp->factorial_normalized ? 1.0 / factorial(l_ - 1) : 1.0;
    const Mesh& mesh = u.mesh();
    const int n = mesh.cells(), k = u.order();
    const double h = mesh.h();
    moments_.assign(static_cast<std::size_t>(n) * l_, 0.0);
    const GaussRule& rule = gauss_legendre(gauss_order_for_degree(k - 1 + l_ - 1));
    for (int cell = 0; cell + 1 < n; ++cell) {
        const double a = mesh.left(cell), b = mesh.right(cell);
        for (int m = 0; m < l_; ++m) {
            // shift the running moment from a to b, then add this cell
            double shifted = 0.0;
            for (int j = 0; j <= m; ++j)
                shifted += binomial(m, j) * int_pow(h, m - j) * moments_[cell * l_ + j];
            const double local = integrate([&](double s) { return int_pow(b - s, m) * u_.eval_in_cell(cell, s); },
                                           a, b, static_cast<int>(rule.nodes.size()));
            moments_[(cell + 1) * l_ + m] = shifted + local;
        }
    }
}

double ForwardImage::operator()(double t) const {
    if (l_ == 0) return apply_A(kernel_, u_, t);
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("ForwardImage: t outside [0, 1]");
    const Mesh& mesh = u_.mesh();
    const int cell = mesh.cell_of(t);
    const double a = mesh.left(cell);
    double value = 0.0;
    for (int m = 0; m < l_; ++m)
        value += binomial(l_ - 1, m) * int_pow(t - a, l_ - 1 - m) * moments_[cell * l_ + m];
    const int order = gauss_order_for_degree(u_.order() - 1 + l_ - 1);
    value += integrate([&](double s) { return int_pow(t - s, l_ - 1) * u_.eval_in_cell(cell, s); }, a, t, order);
    return scale_ * value;
}

Eigen::MatrixXd collocation_matrix(const Kernel& kernel, const CollocationScheme& scheme, int trial_k) {
    return forward_matrix(kernel, scheme.mesh(), trial_k, scheme.nodes());
}

Eigen::MatrixXd forward_matrix(const Kernel& kernel, const Mesh& mesh, int trial_k,
                               std::span<const double> points) {
    if (trial_k < 1) throw std::invalid_argument("forward_matrix: trial order must be >= 1");
    const int n = mesh.cells();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), n * trial_k);
    std::vector<double> m(trial_k);
    for (std::size_t row = 0; row < points.size(); ++row) {
        const double t = points[row];
        for (int cell = 0; cell < n; ++cell) {
            if (kernel.is_volterra() && mesh.left(cell) >= t) break;
            cell_kernel_moments(kernel, t, mesh.left(cell), mesh.right(cell), m);
            for (int j = 0; j < trial_k; ++j) M(static_cast<Eigen::Index>(row), cell * trial_k + j) = m[j];
        }
    }
    return M;
}

double adjoint_apply(const Kernel& kernel, const DiracCombo& z, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::out_of_range("adjoint_apply: s outside [0, 1]");
    double v = 0.0;
    for (std::size_t i = 0; i < z.nodes.size(); ++i) v += z.weights[i] * kernel(z.nodes[i], s);
    return v;
}

double model_rhs(double r, int l, double t) {
    if (!(r > -1.0)) throw std::invalid_argument("model_rhs: exponent r must exceed -1");
    if (l < 1) throw std::invalid_argument("model_rhs: l must be >= 1");
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("model_rhs: t outside [0, 1]");
    if (t == 0.0) return 0.0;
    const double beta = std::exp(std::lgamma(r + 1.0) + std::lgamma(static_cast<double>(l)) -
                                 std::lgamma(r + 1.0 + l));
    return std::pow(t, r + l) * beta;
}

}  // namespace regproj
