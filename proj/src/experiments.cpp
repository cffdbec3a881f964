#include <cmath>
#include <functional>
#include <numbers>

#include "verify_common.hpp"
#include "wlab/cube_operators.hpp"
#include "wlab/pd_system_solver.hpp"
#include "wlab/weighted_measure.hpp"

namespace wlab::verify {
using namespace detail;

namespace {
const double kPi = std::numbers::pi;

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / x.size();
        my += y[i] / y.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// mu-weighted quadrature over the nodes of a d = 1 field inside [t_lo, t_hi] x [x_lo, x_hi]:
// trapezoid in time, exact weight per cell with the corner mean of the integrand in space.
struct BoxQuadrature {
    const NodeField& v;
    double t_lo, t_hi, x_lo, x_hi, alpha;

    template <class G>
    std::pair<double, double> integrate(G&& g) const {
        double s = 0.0, m = 0.0;
        const double eps = 1e-9 * v.spec().step[0];
        for (int j = 0; j < v.nt(); ++j) {
            const double t = v.t(j);
            if (t < t_lo - 1e-9 * v.spec().ht || t > t_hi + 1e-9 * v.spec().ht) continue;
            const bool end = std::fabs(t - t_lo) < 1e-9 * v.spec().ht || std::fabs(t - t_hi) < 1e-9 * v.spec().ht;
            const double wt = v.spec().ht * (end ? 0.5 : 1.0);
            for (std::size_t i = 0; i + 1 < v.num_space_nodes(); ++i) {
                const double a = v.x(0, static_cast<int>(i)), b = v.x(0, static_cast<int>(i) + 1);
                if (a < x_lo - eps || b > x_hi + eps) continue;
                const double w = power_integral(a, b, alpha) * wt;
                s += w * 0.5 * (g(v.at(j, i, 0)) + g(v.at(j, i + 1, 0)));
                m += w;
            }
        }
        return {s, m};
    }
    double mean() const {
        const auto [s, m] = integrate([](double x) { return x; });
        return s / m;
    }
    double average_pow(double p, double c) const {
        const auto [s, m] = integrate([p, c](double x) { return std::pow(std::fabs(x - c), p); });
        return s / m;
    }
};

struct BoundaryCase {
    std::string name;
    // G(s, y) on the unit box, s = (t - t_bottom) / (lambda r)^2, y = x / (a + lambda r)
    std::function<double(double, double)> G;
    bool degenerate = false;
};

std::vector<BoundaryCase> oscillation_corpus() {
    return {
        {"lateral s^2", [](double s, double y) { return y * s * s; }},
        {"lateral 1-cos", [](double s, double y) { return y * (1 - std::cos(kPi * s)); }},
        {"first mode", [](double, double y) { return std::sin(kPi * y); }},
        {"modes + lateral", [](double s, double y) {
             return std::sin(kPi * y) + 0.5 * std::sin(2 * kPi * y) + 0.3 * std::sin(3 * kPi * y) + y * s * s;
         }},
        {"modes - lateral", [](double s, double y) {
             return std::sin(kPi * y) - 0.7 * std::sin(2 * kPi * y) + 0.2 * std::sin(3 * kPi * y) - 2 * y * s * s;
         }},
        {"second mode + cubic lateral", [](double s, double y) { return 0.2 * std::sin(2 * kPi * y) + y * s * s * s; }},
    };
}

bool theta_in_oscillation_range(int d, double p, double theta) {
    return theta > d - 1 && (theta <= d || (p >= 2 && theta < d + 1));
}
}  // namespace

SuiteReport oscillation_decay(const json& cfg) {
    SuiteReport R("oscillation-decay");
    const int d = get(cfg, "d", 1);
    const double p = get(cfg, "p", 2.0), a = get(cfg, "a", 1.0), r = get(cfg, "r", 1.0);
    const auto thetas = get(cfg, "thetas", std::vector<double>{1.0, 0.5});
    const auto lambdas = get(cfg, "lambdas", std::vector<double>{4, 8, 16, 32});
    LocalSolveOptions opt;
    opt.cells_per_r = get(cfg, "cells_per_r", 8);
    opt.steps_per_r2 = get(cfg, "steps_per_r2", 16);
    opt.store_per_r2 = get(cfg, "store_per_r2", 8);
    if (d != 1) throw ConfigError("oscillation-decay: only d = 1 is implemented");
    if (!(r > 0 && r <= a)) throw ConfigError("oscillation-decay: need 0 < r <= a");
    for (double lam : lambdas)
        if (lam * r / a < 2) throw ConfigError("oscillation-decay: regime needs lambda r / a >= 2");
    for (double th : thetas)
        if (!theta_in_oscillation_range(d, p, th)) throw ConfigError("oscillation-decay: theta outside the admissible range");
    R.environment = environment(0, {{"cells_per_r", opt.cells_per_r},
                                    {"steps_per_r2", opt.steps_per_r2},
                                    {"store_per_r2", opt.store_per_r2},
                                    {"lambdas", lambdas}});
    const auto heat = SystemCoefficients::heat(1, 1);
    const double t0 = 0.0;
    const auto corpus = oscillation_corpus();

    // ratio[case][lambda][theta]; the caloric field does not depend on theta
    std::vector<std::vector<std::vector<double>>> ratio(corpus.size(),
                                                        std::vector<std::vector<double>>(lambdas.size(), std::vector<double>(thetas.size())));
    std::vector<std::vector<char>> degenerate(corpus.size(), std::vector<char>(lambdas.size(), 0));
    double worst_residual = 0.0;
    auto ratios_for = [&](const NodeField& uxx, double lam, const std::function<void(std::size_t, double, double)>& out) {
        const double L = a + lam * r, tb = t0 - lam * lam * r * r;
        for (std::size_t k = 0; k < thetas.size(); ++k) {
            const double alpha = thetas[k] - d + p;
            const BoxQuadrature small{uxx, t0 - r * r, t0, std::max(a - r, 0.0), a + r, alpha};
            const BoxQuadrature big{uxx, tb, t0, std::max(a - lam * r, 0.0), L, alpha};
            out(k, small.average_pow(p, small.mean()), big.average_pow(p, 0.0));
        }
    };
    std::vector<double> worst_res(corpus.size() * lambdas.size(), 0.0);
    parallel_for(corpus.size() * lambdas.size(), [&](std::size_t job) {
        const std::size_t c = job / lambdas.size(), l = job % lambdas.size();
        const double lam = lambdas[l];
        const double L = a + lam * r, tb = t0 - lam * lam * r * r;
        const auto& G = corpus[c].G;
        const PointFunction g = [&](double t, std::span<const double> x, std::span<double> o) {
            o[0] = G((t - tb) / (lam * lam * r * r), x[0] / L);
        };
        const LocalSolveResult S = homogeneous_local_solve(heat, g, LocalBox{t0, a, {}, r, lam}, opt);
        worst_res[job] = S.residual;
        const NodeField uxx = derivative(S.u, {2});
        ratios_for(uxx, lam, [&](std::size_t k, double num, double den) {
            // a field with u_xx at roundoff level has no oscillation to measure
            const bool degen = !(den > 1e-24 * std::pow(S.u.max_abs() / (L * L), p));
            degenerate[c][l] = degenerate[c][l] || degen;
            ratio[c][l][k] = degen ? 0.0 : num / den;
        });
    });
    for (double v : worst_res) worst_residual = std::max(worst_residual, v);

    std::vector<double> xs;
    for (double lam : lambdas) xs.push_back(std::log(1 + lam * r / a));
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        const std::string tag = " theta=" + std::to_string(thetas[k]);
        std::vector<double> env(lambdas.size(), 0.0);
        for (std::size_t c = 0; c < corpus.size(); ++c) {
            bool used = true;
            std::vector<double> ys;
            for (std::size_t l = 0; l < lambdas.size(); ++l) {
                used = used && !degenerate[c][l] && ratio[c][l][k] > 0;
                ys.push_back(std::log(ratio[c][l][k]));
                R.add_point("oscillation ratio " + corpus[c].name + tag, lambdas[l], ratio[c][l][k]);
            }
            if (!used) continue;
            for (std::size_t l = 0; l < lambdas.size(); ++l) env[l] = std::max(env[l], ratio[c][l][k]);
            R.check_le("case slope <= -0.7 p " + corpus[c].name + tag, {{"theta", thetas[k]}, {"p", p}, {"log_ratios", ys}},
                       fit_slope(xs, ys), -0.7 * p, 0.0, 0.0, BoundSource::Theory);
        }
        std::vector<double> ys;
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            ys.push_back(std::log(env[l]));
            R.add_point("oscillation envelope" + tag, lambdas[l], env[l]);
        }
        const double slope = fit_slope(xs, ys);
        R.check_le("envelope log-log slope <= -0.7 p" + tag,
                   {{"theta", thetas[k]}, {"p", p}, {"alpha", thetas[k] - d + p}, {"lambdas", lambdas}, {"envelope", env}},
                   slope, -0.7 * p, 0.0, 0.0, BoundSource::Theory)
            .note = "threshold is 70% of the theoretical exponent -p";
        R.summary["slope" + tag] = slope;
    }

    // degenerate fields: u = x (filtered) and u = x^2 + 2t (no oscillation)
    {
        const double lam = lambdas.front();
        LocalSolveOptions o2 = opt;
        const LocalSolveResult Lin = homogeneous_local_solve(
            heat, [](double, std::span<const double> x, std::span<double> o) { o[0] = x[0]; }, LocalBox{t0, a, {}, r, lam}, o2);
        const NodeField lx = derivative(Lin.u, {2});
        double den_lin = 0.0;
        ratios_for(lx, lam, [&](std::size_t, double, double den) { den_lin = std::max(den_lin, den); });
        const double L = a + lam * r;
        R.check_true("u = x filtered by the minimum denominator", {{"lambda", lam}},
                     !(den_lin > 1e-24 * std::pow(Lin.u.max_abs() / (L * L), p)), den_lin, 0.0, BoundSource::Exact);
        const LocalSolveResult Q = homogeneous_local_solve(
            heat, [](double t, std::span<const double> x, std::span<double> o) { o[0] = x[0] * x[0] + 2 * t; },
            LocalBox{t0, a, {}, r, lam}, o2);
        const NodeField qx = derivative(Q.u, {2});
        double worst = 0.0;
        ratios_for(qx, lam, [&](std::size_t, double num, double den) { worst = std::max(worst, num / den); });
        R.check_le("u = x^2 + 2t has no oscillation", {{"lambda", lam}}, worst, 1e-12, 0, 0, BoundSource::Exact);
    }
    R.summary["max_scheme_residual"] = worst_residual;
    return R;
}

namespace {
double bump4(double s) { return std::fabs(s) < 1 ? std::pow(std::cos(kPi * s / 2), 4) : 0.0; }

struct Forcing {
    std::string name;
    double x_c, x_w, t_c, t_w;  // in units of the base scale
};

struct SharpSweep {
    double N[2] = {0.0, 0.0};  // eps = 0.5, 0.1
    int boxes = 0;
    int zero_boxes = 0;
    int infeasible = 0;
};

// Minimal N with osc_q(Q) <= eps M(|u_xx|^q) + N M(|f|^q) at every cell of every box of the sweep.
SharpSweep sharp_sweep(double p, double theta, double c, int n, const Forcing& F, const std::vector<double>& r0s,
                       const std::vector<double>& a0s, const std::vector<double>& eps) {
    const double q = theta - 1 + p, alpha = q;
    const double L = 4.0 * c, T = c * c;
    const int cells = static_cast<int>(std::lround(4.0 * c)) << n;
    const int steps = static_cast<int>(std::lround(c * c * std::ldexp(1.0, 2 * n)));
    const GridSpec g = make_grid(1, L, {}, {cells}, T, steps);
    const NodeField f = sample([&](double t, std::span<const double> x, std::span<double> o) {
        o[0] = bump4((x[0] / c - F.x_c) / F.x_w) * bump4((t / (c * c) - F.t_c) / F.t_w);
    }, g);
    const NodeField u = solve_parabolic(SystemCoefficients::heat(1, 1), f, {}).u;
    const NodeField uxx = derivative(u, {2});
    NodeField au = uxx, af = f;
    for (double& v : au.values()) v = std::pow(std::fabs(v), q);
    for (double& v : af.values()) v = std::pow(std::fabs(v), q);
    const WeightParams w(alpha);
    const CellField U = to_cellfield(au, n, w), Fq = to_cellfield(af, n, w), V = to_cellfield(uxx, n, w);
    // radii up to the domain scale
    const int m_coarse = -static_cast<int>(std::ceil(std::log2(L)));
    const auto radii = dyadic_ladder(n + 1, m_coarse);
    const CellField MU = maximal_family(U, radii), MF = maximal_family(Fq, radii);
    const double h = std::ldexp(1.0, -n), ht = std::ldexp(1.0, -2 * n);
    SharpSweep out;
    std::int64_t ii[1];
    for (double r0 : r0s)
        for (double a0 : a0s) {
            if (a0 < r0) continue;
            const double r = r0 * c, a = a0 * c;
            for (double t0 = r * r; t0 <= T + 1e-12; t0 += r * r / 4) {
                const std::int64_t jl = std::llround((t0 - r * r) / ht), jh = std::llround(t0 / ht);
                const std::int64_t il = std::llround((a - r) / h), ih = std::llround((a + r) / h);
                double m = 0.0, s = 0.0;
                for (auto j = jl; j < jh; ++j)
                    for (auto i = il; i < ih; ++i) {
                        ii[0] = i;
                        const auto cell = V.cell_of(j, ii);
                        if (cell == V.num_cells()) throw std::logic_error("sharp-estimate: box leaves the window");
                        m += V.cell_mass(cell);
                        s += V.cell_mass(cell) * V.value(cell, 0);
                    }
                const double mean = s / m;
                double osc = 0.0;
                for (auto j = jl; j < jh; ++j)
                    for (auto i = il; i < ih; ++i) {
                        ii[0] = i;
                        const auto cell = V.cell_of(j, ii);
                        osc += V.cell_mass(cell) * std::pow(std::fabs(V.value(cell, 0) - mean), q);
                    }
                osc /= m;
                ++out.boxes;
                bool zero = true;
                for (std::size_t k = 0; k < eps.size(); ++k) {
                    double NQ = 0.0;
                    for (auto j = jl; j < jh; ++j)
                        for (auto i = il; i < ih; ++i) {
                            ii[0] = i;
                            const auto cell = V.cell_of(j, ii);
                            const double need = osc - eps[k] * MU.value(cell, 0);
                            if (need <= 0.0) continue;
                            if (!(MF.value(cell, 0) > 0.0)) {
                                ++out.infeasible;
                                NQ = INFINITY;
                                continue;
                            }
                            NQ = std::max(NQ, need / MF.value(cell, 0));
                        }
                    out.N[k] = std::max(out.N[k], NQ);
                    zero = zero && NQ == 0.0;
                }
                out.zero_boxes += zero ? 1 : 0;
            }
        }
    return out;
}
}  // namespace

SuiteReport sharp_estimate(const json& cfg) {
    SuiteReport R("sharp-estimate");
    const int n = get(cfg, "n_max", 5);
    const auto scales = get(cfg, "scales", std::vector<double>{0.5, 1.0, 2.0});
    const auto r0s = get(cfg, "r", std::vector<double>{0.125, 0.25, 0.5});
    const auto a0s = get(cfg, "a", std::vector<double>{0.125, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0});
    const std::vector<double> eps = {0.5, 0.1};
    std::vector<std::pair<double, double>> ptheta = {{2.0, 1.0}, {4.0, 1.0}, {1.5, 0.75}};
    if (cfg.contains("p_theta")) ptheta = get(cfg, "p_theta", ptheta);
    for (const auto& [p, theta] : ptheta) {
        const bool ok = p > 2 ? (theta > 0 && theta <= 1) : (p > 1 && theta > 2 - p && theta <= 1);
        if (!ok) throw ConfigError("sharp-estimate: (p, theta) outside the admissible range");
    }
    for (double c : scales)
        if (!(c > 0) || c != std::ldexp(1.0, std::ilogb(c)))
            throw ConfigError("sharp-estimate: scales must be powers of two");
    const std::vector<Forcing> forcings = {{"interior bump", 1.0, 0.5, 0.4, 0.25}, {"near-boundary bump", 0.5, 0.4, 0.5, 0.3}};
    R.environment = environment(0, {{"n_max", n}, {"scales", scales}, {"r", r0s}, {"a", a0s}, {"eps", eps}});

    struct Job {
        std::size_t pt, fo, sc;
    };
    std::vector<Job> jobs;
    for (std::size_t pt = 0; pt < ptheta.size(); ++pt)
        for (std::size_t fo = 0; fo < forcings.size(); ++fo)
            for (std::size_t sc = 0; sc < scales.size(); ++sc) jobs.push_back({pt, fo, sc});
    std::vector<SharpSweep> res(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const Job& J = jobs[j];
        res[j] = sharp_sweep(ptheta[J.pt].first, ptheta[J.pt].second, scales[J.sc], n, forcings[J.fo], r0s, a0s, eps);
    });
    for (std::size_t pt = 0; pt < ptheta.size(); ++pt)
        for (std::size_t fo = 0; fo < forcings.size(); ++fo) {
            const auto [p, theta] = ptheta[pt];
            const double q = theta - 1 + p;
            const std::string tag = " p=" + std::to_string(p) + " theta=" + std::to_string(theta) + " " + forcings[fo].name;
            std::vector<std::array<double, 2>> Ns;
            int boxes = 0, zero = 0, infeasible = 0;
            for (std::size_t j = 0; j < jobs.size(); ++j)
                if (jobs[j].pt == pt && jobs[j].fo == fo) {
                    Ns.push_back({res[j].N[0], res[j].N[1]});
                    boxes += res[j].boxes;
                    zero += res[j].zero_boxes;
                    infeasible += res[j].infeasible;
                }
            for (std::size_t k = 0; k < eps.size(); ++k) {
                double lo = INFINITY, hi = 0.0;
                json per_scale = json::array();
                for (std::size_t s = 0; s < Ns.size(); ++s) {
                    lo = std::min(lo, Ns[s][k]);
                    hi = std::max(hi, Ns[s][k]);
                    per_scale.push_back(number(Ns[s][k]));
                    R.add_point("N(eps=" + std::to_string(eps[k]) + ")" + tag, scales[s], Ns[s][k]);
                }
                const json P = {{"p", p}, {"theta", theta}, {"q", q}, {"eps", eps[k]}, {"scales", scales}, {"N", per_scale}};
                R.check_true("N(eps) finite eps=" + std::to_string(eps[k]) + tag, P, std::isfinite(hi), hi, 0.0,
                             BoundSource::Measured);
                const double spread = hi == 0.0 ? 0.0 : (lo > 0.0 ? hi / lo - 1.0 : INFINITY);
                R.check_le("N(eps) stable across dilations eps=" + std::to_string(eps[k]) + tag, P, spread, 0.25, 0,
                           0, BoundSource::Measured)
                    .note = "spread = max/min - 1 over dilated copies (r, a) -> (c r, c a)";
                R.summary["N(eps=" + std::to_string(eps[k]) + ")" + tag] = number(hi);
            }
            bool mono = true;
            for (const auto& v : Ns) mono = mono && v[1] >= v[0];
            R.check_true("N(0.1) >= N(0.5)" + tag, {{"p", p}, {"theta", theta}}, mono, Ns.empty() ? 0.0 : Ns[0][1],
                         Ns.empty() ? 0.0 : Ns[0][0], BoundSource::Exact);
            R.describe("boxes where the eps term alone suffices" + tag, {{"boxes", boxes}, {"infeasible_cells", infeasible}},
                       zero, boxes);
        }
    return R;
}

SuiteReport theta_boundary(const json& cfg) {
    SuiteReport R("theta-boundary");
    const double p = get(cfg, "p", 2.0);
    const int d = 1;
    auto thetas = get(cfg, "thetas", std::vector<double>{-0.5, 0.0, 0.25, 0.5, 1.0, 1.5, 1.75, 2.0, 2.5, 3.0});
    std::sort(thetas.begin(), thetas.end());
    const std::vector<int> grids = get(cfg, "cells", std::vector<int>{64, 128, 256});
    R.environment = environment(0, {{"cells", grids}, {"p", p}, {"domain", {3.0, 0.25}}});
    const auto heat = SystemCoefficients::heat(1, 1);
    std::vector<NodeField> us, fs;
    for (int cells : grids) {
        const GridSpec g = make_grid(1, 3.0, {}, {cells}, 0.25, cells);
        fs.push_back(sample([](double t, std::span<const double> x, std::span<double> o) {
            const double s = (x[0] - 1.0) / 0.4;
            o[0] = std::fabs(s) < 1 ? std::pow(std::cos(kPi * s / 2), 4) * (1 + t) : 0.0;
        }, g));
        us.push_back(solve_parabolic(heat, fs.back(), {Scheme::CrankNicolson, {}}).u);
    }
    for (double theta : thetas) {
        std::vector<double> ratios;
        for (std::size_t k = 0; k < grids.size(); ++k) {
            double v = INFINITY;
            try {
                v = apriori_ratio_parabolic(us[k], fs[k], {p, theta, 0, 0}).ratio;
            } catch (const std::exception&) {
                // weight not integrable at x1 = 0 on the grid
            }
            ratios.push_back(v);
        }
        // a weight that is not integrable at x1 = 0 makes every ratio infinite
        const double growth = std::isinf(ratios.front()) ? INFINITY : ratios.back() / ratios.front();
        for (std::size_t k = 0; k < grids.size(); ++k)
            R.add_point("apriori ratio theta=" + std::to_string(theta), grids[k], ratios[k]);
        R.add_point("theta growth factor", theta, growth);
        const json P = {{"theta", theta}, {"p", p}, {"ratios", {number(ratios[0]), number(ratios[1]), number(ratios[2])}},
                        {"admissible", theta_admissible(d, p, theta)}};
        if (theta_admissible(d, p, theta)) {
            double change = 0.0;
            for (std::size_t k = 1; k < ratios.size(); ++k) change = std::max(change, std::fabs(ratios[k] / ratios[k - 1] - 1));
            R.check_le("inside range: ratio change under refinement theta=" + std::to_string(theta), P, change, 0.2, 0, 0,
                       BoundSource::Measured);
        } else {
            R.describe("outside range: growth factor theta=" + std::to_string(theta), P, growth, 1.0);
        }
    }
    return R;
}

}  // namespace wlab::verify
