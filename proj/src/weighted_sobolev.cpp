#include "wlab/weighted_sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace wlab {

void NormSpec::validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("NormSpec: p must exceed 1");
    if (gamma < 0 || gamma > 2) throw std::invalid_argument("NormSpec: gamma must be 0, 1 or 2");
    if (!std::isfinite(theta)) throw std::invalid_argument("NormSpec: theta must be finite");
}

namespace {

// Sum over cells of weight * corner mean of g, g given per spatial node.
double cell_quadrature(const NodeField& u, const std::vector<double>& g, double exponent) {
    const GridSpec& s = u.spec();
    const int d = s.d();
    std::vector<int> idx(d);
    double transverse = 1.0;
    for (int a = 1; a < d; ++a) transverse *= s.step[a];
    std::vector<double> w1(s.n_nodes[0] - 1);
    for (int i = 0; i + 1 < s.n_nodes[0]; ++i) w1[i] = power_integral(u.x(0, i), u.x(0, i + 1), exponent) * transverse;
    const int corners = 1 << d;
    double total = 0.0;
    for (std::size_t node = 0; node < u.num_space_nodes(); ++node) {
        u.node_indices(node, idx);
        bool lower = true;
        for (int a = 0; a < d; ++a)
            if (idx[a] + 1 >= s.n_nodes[a]) lower = false;
        if (!lower) continue;
        double mean = 0.0;
        for (int c = 0; c < corners; ++c) {
            std::size_t n = node;
            for (int a = 0; a < d; ++a)
                if (c & (1 << a)) n += u.stride(a);
            mean += g[n];
        }
        mean /= corners;
        if (mean == 0.0) continue;
        total += w1[idx[0]] * mean;
    }
    return total;
}

std::vector<double> node_integrand(const NodeField& u, int m, double p, int j, const NodeField* dx1) {
    std::vector<double> g(u.num_space_nodes(), 0.0);
    for (std::size_t node = 0; node < u.num_space_nodes(); ++node) {
        const double x1 = u.x(0, static_cast<int>(node / u.stride(0)));
        double s = 0.0;
        for (int k = 0; k < u.d1(); ++k) {
            double v = u.at(j, node, k);
            if (x1 == 0.0 && m < 0) {
                if (m != -1) {
                    if (v != 0.0) throw std::domain_error("weighted_lp_norm: M^m u singular at x1 = 0");
                    throw std::domain_error("weighted_lp_norm: m < -1 unsupported at x1 = 0");
                }
                // (x1)^{-1} u -> D_1 u(0) when u(0) = 0
                v = v == 0.0 ? dx1->at(j, node, k) : std::numeric_limits<double>::infinity();
            } else if (m != 0) {
                v *= std::pow(x1, m);
            }
            s += std::pow(std::fabs(v), p);
        }
        g[node] = s;
    }
    return g;
}

double lp_slice(const NodeField& u, int m, double p, double theta, int j) {
    NodeField dx1;
    const bool need = m < 0 && u.x(0, 0) == 0.0;
    if (need) {
        std::vector<int> beta(u.d(), 0);
        beta[0] = 1;
        dx1 = derivative(u, std::span<const int>(beta), 0);
    }
    const auto g = node_integrand(u, m, p, j, need ? &dx1 : nullptr);
    return std::pow(cell_quadrature(u, g, theta - u.d()), 1.0 / p);
}

void enumerate_multi(int d, int order, std::vector<int>& cur, int axis, std::vector<std::vector<int>>& out) {
    if (axis == d - 1) {
        cur[axis] = order;
        out.push_back(cur);
        return;
    }
    for (int b = order; b >= 0; --b) {
        cur[axis] = b;
        enumerate_multi(d, order - b, cur, axis + 1, out);
    }
}

}  // namespace

double weighted_lp_norm(const NodeField& u, const NormSpec& spec, int time_index) {
    spec.validate();
    if (time_index < 0 || time_index >= u.nt()) throw std::out_of_range("weighted_lp_norm: time index");
    return lp_slice(u, spec.m_power, spec.p, spec.theta, time_index);
}

std::vector<double> weighted_lp_norm_series(const NodeField& u, const NormSpec& spec) {
    spec.validate();
    std::vector<double> out(u.nt());
    for (int j = 0; j < u.nt(); ++j) out[j] = lp_slice(u, spec.m_power, spec.p, spec.theta, j);
    return out;
}

double time_lp(const std::vector<double>& g, double ht, double p) {
    if (g.size() == 1) return g[0];
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double w = (j == 0 || j + 1 == g.size()) ? 0.5 : 1.0;
        s += w * std::pow(g[j], p);
    }
    return std::pow(s * ht, 1.0 / p);
}

double sobolev_norm_integer(const NodeField& u, const NormSpec& spec, int time_index) {
    spec.validate();
    double total = 0.0;
    for (int order = 0; order <= spec.gamma; ++order) {
        std::vector<std::vector<int>> betas;
        std::vector<int> cur(u.d(), 0);
        enumerate_multi(u.d(), order, cur, 0, betas);
        for (const auto& beta : betas) {
            const NodeField D = order == 0 ? u : derivative(u, std::span<const int>(beta), 0);
            total += std::pow(lp_slice(D, spec.m_power + order, spec.p, spec.theta, time_index), spec.p);
        }
    }
    return std::pow(total, 1.0 / spec.p);
}

namespace {
EquivTriple triple_at(const NodeField& w, const NormSpec& spec, int j, const std::vector<NodeField>& d1,
                      const std::vector<NodeField>& d2) {
    EquivTriple T;
    const double p = spec.p;
    T.a = lp_slice(w, -1, p, spec.theta, j);
    double b = 0.0, c = 0.0;
    for (const auto& D : d1) b += std::pow(lp_slice(D, 0, p, spec.theta, j), p);
    for (const auto& D : d2) c += std::pow(lp_slice(D, 1, p, spec.theta, j), p);
    T.b = std::pow(b, 1.0 / p);
    T.c = std::pow(c, 1.0 / p);
    return T;
}

void derivative_sets(const NodeField& w, std::vector<NodeField>& d1, std::vector<NodeField>& d2) {
    const int d = w.d();
    for (int i = 0; i < d; ++i) {
        std::vector<int> beta(d, 0);
        beta[i] = 1;
        d1.push_back(derivative(w, std::span<const int>(beta), 0));
    }
    // ordered pairs (i, j): mixed derivatives appear twice
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::vector<int> beta(d, 0);
            beta[i] += 1;
            beta[j] += 1;
            d2.push_back(derivative(w, std::span<const int>(beta), 0));
        }
}
}  // namespace

EquivTriple equiv_triple(const NodeField& w, const NormSpec& spec, int time_index) {
    spec.validate();
    std::vector<NodeField> d1, d2;
    derivative_sets(w, d1, d2);
    return triple_at(w, spec, time_index, d1, d2);
}

std::vector<EquivTriple> equiv_triple_series(const NodeField& w, const NormSpec& spec) {
    spec.validate();
    std::vector<NodeField> d1, d2;
    derivative_sets(w, d1, d2);
    std::vector<EquivTriple> out;
    for (int j = 0; j < w.nt(); ++j) out.push_back(triple_at(w, spec, j, d1, d2));
    return out;
}

GridSpec poincare_grid(int d, int d1, double r, double a, int cells) {
    if (!(r > 0.0) || a - r < 0.0) throw std::domain_error("poincare_grid: need 0 < r <= a");
    GridSpec g;
    g.d1 = d1;
    for (int k = 0; k < d; ++k) {
        g.origin.push_back(k == 0 ? a - r : -r);
        g.step.push_back(2.0 * r / cells);
        g.n_nodes.push_back(cells + 1);
    }
    return g;
}

PoincareResult poincare_check(const NodeField& u, double r, double a, double p, double alpha) {
    if (alpha < 0.0) throw std::domain_error("poincare_check: alpha must be nonnegative");
    if (!(r > 0.0) || a - r < 0.0) throw std::domain_error("poincare_check: D_r(a) must lie in the half space");
    const GridSpec& s = u.spec();
    const int d = s.d();
    for (int k = 0; k < d; ++k) {
        const double lo = k == 0 ? a - r : -r;
        const double hi = s.origin[k] + (s.n_nodes[k] - 1) * s.step[k];
        if (std::fabs(s.origin[k] - lo) > 1e-12 * (1 + a) || std::fabs(hi - (lo + 2 * r)) > 1e-9 * (1 + a))
            throw std::invalid_argument("poincare_check: field must live on D_r(a)");
    }
    const WeightParams w(alpha);
    PoincareResult R;
    // node weights: sum over adjacent cells of cell weight / 2^d
    const std::size_t N = u.num_space_nodes();
    std::vector<double> ones(N, 1.0);
    std::vector<double> W(N, 0.0);
    {
        std::vector<int> idx(d);
        double transverse = 1.0;
        for (int k = 1; k < d; ++k) transverse *= s.step[k];
        const int corners = 1 << d;
        for (std::size_t node = 0; node < N; ++node) {
            u.node_indices(node, idx);
            bool lower = true;
            for (int k = 0; k < d; ++k)
                if (idx[k] + 1 >= s.n_nodes[k]) lower = false;
            if (!lower) continue;
            const double cw = power_integral(u.x(0, idx[0]), u.x(0, idx[0] + 1), alpha) * transverse / corners;
            for (int c = 0; c < corners; ++c) {
                std::size_t n = node;
                for (int k = 0; k < d; ++k)
                    if (c & (1 << k)) n += u.stride(k);
                W[n] += cw;
            }
        }
    }
    const int d1 = u.d1();
    double lhs = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            double g = 0.0;
            for (int k = 0; k < d1; ++k) g += std::pow(std::fabs(u.at(0, i, k) - u.at(0, j, k)), p);
            row += W[j] * g;
        }
        lhs += W[i] * row;
    }
    R.lhs = lhs;
    std::vector<double> grad(N, 0.0);
    for (int k = 0; k < d; ++k) {
        std::vector<int> beta(d, 0);
        beta[k] = 1;
        const NodeField D = derivative(u, std::span<const int>(beta), 0);
        for (std::size_t n = 0; n < N; ++n)
            for (int c = 0; c < d1; ++c) grad[n] += std::pow(std::fabs(D.at(0, n, c)), p);
    }
    R.gradient_integral = cell_quadrature(u, grad, alpha);
    R.nu_D = interval_weight(HalfLineInterval(a - r, a + r), w) * std::pow(2.0 * r, d - 1);
    R.bound = std::pow(2.0, alpha + 2.0) * std::pow(2.0 * r, p) * R.nu_D * R.gradient_integral;
    return R;
}

namespace {
double raw_bump(double s) {
    if (std::fabs(s) >= 0.5) return 0.0;
    return std::exp(-1.0 / (1.0 - 4.0 * s * s));
}

double bump_normaliser() {
    // composite Simpson on (-1/2, 1/2), computed once
    static const double value = [] {
        const int n = 200000;
        const double h = 1.0 / n;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += c * raw_bump(-0.5 + i * h);
        }
        return s * h / 3.0;
    }();
    return value;
}
}  // namespace

double mollifier(double s) { return raw_bump(s) / bump_normaliser(); }

double mollifier_derivative(double s) {
    if (std::fabs(s) >= 0.5) return 0.0;
    const double q = 1.0 - 4.0 * s * s;
    return mollifier(s) * (-8.0 * s / (q * q));
}

namespace {
// sup over the support, sampled then refined by golden section around the best sample
template <class F>
double sup_on(F&& f, double lo, double hi) {
    const int n = 4000;
    double best = -1.0, arg = lo;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double v = f(x);
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    double a = std::max(lo, arg - (hi - lo) / n), b = std::min(hi, arg + (hi - lo) / n);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80; ++it) {
        const double c = b - g * (b - a), e = a + g * (b - a);
        if (f(c) > f(e)) b = e;
        else a = c;
    }
    return std::max(best, f(0.5 * (a + b)));
}

void bump_constants(double a, double r, double alpha, double& c0, double& c1) {
    const double nu = interval_weight(HalfLineInterval(a - r, a + r), WeightParams(alpha));
    const double lo = a - 0.5 * r, hi = a + 0.5 * r;
    auto zeta = [&](double x) { return std::pow(x, -alpha) / r * mollifier((x - a) / r); };
    auto dzeta = [&](double x) {
        const double s = (x - a) / r;
        return std::fabs(-alpha * std::pow(x, -alpha - 1.0) / r * mollifier(s) + std::pow(x, -alpha) / (r * r) * mollifier_derivative(s));
    };
    c0 = sup_on(zeta, lo, hi) * nu;
    c1 = sup_on(dzeta, lo, hi) * nu * r;
}
}  // namespace

BumpCalibration bump_calibration(double alpha) {
    static std::mutex mu;
    static std::map<double, BumpCalibration> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
    WeightParams check(alpha);
    BumpCalibration cal{alpha, 0.0, 0.0};
    for (int i = 0; i <= 60; ++i) {
        const double rho = std::pow(10.0, -3.0 + 3.0 * i / 60.0);
        double c0 = 0.0, c1 = 0.0;
        bump_constants(1.0, rho, alpha, c0, c1);
        cal.sup_constant = std::max(cal.sup_constant, c0);
        cal.derivative_constant = std::max(cal.derivative_constant, c1);
    }
    cal.sup_constant *= 1.001;
    cal.derivative_constant *= 1.001;
    cache.emplace(alpha, cal);
    return cal;
}

Bump::Bump(double a, double r, double alpha) : a_(a), r_(r), alpha_(alpha) {
    if (!(r > 0.0) || r > a) throw std::domain_error("bump_zeta: need 0 < r <= a");
    WeightParams check(alpha);
    bump_constants(a, r, alpha, c0_, c1_);
}

double Bump::operator()(double x) const {
    if (x <= 0.0) return 0.0;
    return std::pow(x, -alpha_) / r_ * mollifier((x - a_) / r_);
}

double Bump::derivative(double x) const {
    if (x <= 0.0) return 0.0;
    const double s = (x - a_) / r_;
    return -alpha_ * std::pow(x, -alpha_ - 1.0) / r_ * mollifier(s) + std::pow(x, -alpha_) / (r_ * r_) * mollifier_derivative(s);
}

Bump bump_zeta(double a, double r, double alpha) {
    Bump z(a, r, alpha);
    const BumpCalibration cal = bump_calibration(alpha);
    if (z.sup_constant() > cal.sup_constant || z.derivative_constant() > cal.derivative_constant)
        throw std::logic_error("bump_zeta: constants exceed the frozen calibration");
    return z;
}

HolderQuotients holder_quotients(const NodeField& u, double kappa, double p) {
    const int d = u.d();
    const double kappa0 = 1.0 - 2.0 / p - static_cast<double>(d) / p;
    if (!(kappa0 > 0.0)) throw std::domain_error("holder_quotients: need p > d + 2");
    if (!(kappa > 0.0) || kappa >= kappa0) throw std::domain_error("holder_quotients: kappa must lie in (0, kappa0)");
    const std::size_t N = u.num_space_nodes();
    const int d1 = u.d1();
    std::vector<std::vector<double>> pos(N, std::vector<double>(d));
    std::vector<int> idx(d);
    for (std::size_t n = 0; n < N; ++n) {
        u.node_indices(n, idx);
        for (int a = 0; a < d; ++a) pos[n][a] = u.x(a, idx[a]);
    }
    auto diff = [&](int j1, std::size_t n1, int j2, std::size_t n2) {
        double s = 0.0;
        for (int k = 0; k < d1; ++k) {
            const double v = u.at(j1, n1, k) - u.at(j2, n2, k);
            s += v * v;
        }
        return std::sqrt(s);
    };
    HolderQuotients Q;
    for (int j = 0; j < u.nt(); ++j)
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = a + 1; b < N; ++b) {
                double dist = 0.0;
                for (int k = 0; k < d; ++k) dist += (pos[a][k] - pos[b][k]) * (pos[a][k] - pos[b][k]);
                Q.space = std::max(Q.space, diff(j, a, j, b) / std::pow(std::sqrt(dist), kappa));
            }
    for (std::size_t n = 0; n < N; ++n)
        for (int j = 0; j < u.nt(); ++j)
            for (int l = j + 1; l < u.nt(); ++l)
                Q.time = std::max(Q.time, diff(j, n, l, n) / std::pow((l - j) * u.spec().ht, 0.5 * kappa));
    return Q;
}

}  // namespace wlab
