#include <cmath>
#include <functional>
#include <numbers>

#include "verify_common.hpp"
#include "wlab/pd_system_solver.hpp"

namespace wlab::verify {
using namespace detail;

namespace {
const double kPi = std::numbers::pi;

Eigen::MatrixXd mat2(double a, double b, double c, double e) {
    Eigen::MatrixXd M(2, 2);
    M << a, b, c, e;
    return M;
}

// discrete L2 error at the last time node, trapezoid weights in space
double l2_error_last(const NodeField& u, const PointFunction& exact) {
    const int j = u.nt() - 1, d = u.d();
    std::vector<int> idx(d);
    std::vector<double> x(d), e(u.d1());
    double s = 0.0;
    for (std::size_t n = 0; n < u.num_space_nodes(); ++n) {
        u.node_indices(n, idx);
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            x[a] = u.x(a, idx[a]);
            w *= (idx[a] == 0 || idx[a] == u.spec().n_nodes[a] - 1 ? 0.5 : 1.0) * u.spec().step[a];
        }
        exact(u.t(j), x, e);
        for (int k = 0; k < u.d1(); ++k) s += w * (u.at(j, n, k) - e[k]) * (u.at(j, n, k) - e[k]);
    }
    return std::sqrt(s);
}

struct Manufactured {
    std::string name;
    SystemCoefficients A;
    PointFunction exact, forcing;
    std::function<GridSpec(int)> grid;
    bool parabolic;
};

std::vector<Manufactured> manufactured_corpus() {
    std::vector<Manufactured> out;
    const auto heat = SystemCoefficients::heat(1, 1);
    const auto coupled = SystemCoefficients::constant(1, 2, {mat2(1, 0.2, 0, 1)});
    out.push_back({"parabolic scalar", heat,
                   [](double t, std::span<const double> x, std::span<double> o) { o[0] = std::exp(-t) * std::sin(kPi * x[0]); },
                   [](double t, std::span<const double> x, std::span<double> o) {
                       o[0] = (kPi * kPi - 1) * std::exp(-t) * std::sin(kPi * x[0]);
                   },
                   [](int c) { return make_grid(1, 1.0, {}, {c}, 0.5, c); }, true});
    out.push_back({"parabolic coupled d1=2", coupled,
                   [](double t, std::span<const double> x, std::span<double> o) {
                       o[0] = std::exp(-t) * std::sin(kPi * x[0]);
                       o[1] = std::exp(-t) * std::sin(2 * kPi * x[0]);
                   },
                   [](double t, std::span<const double> x, std::span<double> o) {
                       const double e = std::exp(-t), s1 = std::sin(kPi * x[0]), s2 = std::sin(2 * kPi * x[0]);
                       o[0] = -e * s1 + kPi * kPi * e * s1 + 0.8 * kPi * kPi * e * s2;
                       o[1] = -e * s2 + 4 * kPi * kPi * e * s2;
                   },
                   [](int c) { return make_grid(2, 1.0, {}, {c}, 0.5, c); }, true});
    {
        std::vector<Eigen::MatrixXd> B(4, Eigen::MatrixXd::Identity(1, 1));
        B[1](0, 0) = 0.3;
        B[2](0, 0) = 0.3;
        out.push_back({"parabolic d=2 mixed", SystemCoefficients::constant(2, 1, B),
                       [](double t, std::span<const double> x, std::span<double> o) {
                           o[0] = std::exp(-t) * std::sin(kPi * x[0]) * std::sin(kPi * (x[1] + 1) / 2);
                       },
                       [](double t, std::span<const double> x, std::span<double> o) {
                           const double e = std::exp(-t), a = kPi * x[0], b = kPi * (x[1] + 1) / 2;
                           const double u = e * std::sin(a) * std::sin(b);
                           const double uxy = e * kPi * std::cos(a) * kPi / 2 * std::cos(b);
                           o[0] = -u + kPi * kPi * u + kPi * kPi / 4 * u - 0.6 * uxy;
                       },
                       [](int c) { return make_grid(1, 1.0, {1.0}, {c / 2, c}, 0.25, c / 2); }, true});
    }
    out.push_back({"elliptic scalar", heat,
                   [](double, std::span<const double> x, std::span<double> o) { o[0] = std::sin(kPi * x[0]); },
                   [](double, std::span<const double> x, std::span<double> o) { o[0] = -kPi * kPi * std::sin(kPi * x[0]); },
                   [](int c) { return make_grid(1, 1.0, {}, {c}, 0.0, 0); }, false});
    out.push_back({"elliptic coupled d1=2", coupled,
                   [](double, std::span<const double> x, std::span<double> o) {
                       o[0] = std::sin(kPi * x[0]);
                       o[1] = x[0] * (1 - x[0]) * std::exp(x[0]);
                   },
                   [](double, std::span<const double> x, std::span<double> o) {
                       const double X = x[0], v2 = std::exp(X) * (-X * X - 3 * X);
                       o[0] = -kPi * kPi * std::sin(kPi * X) + 0.2 * v2;
                       o[1] = v2;
                   },
                   [](int c) { return make_grid(2, 1.0, {}, {c}, 0.0, 0); }, false});
    return out;
}

// bump forcing around x1 = 1 on [0, 3]
void forcing_bump(double t, std::span<const double> x, std::span<double> o) {
    const double s = (x[0] - 1.0) / 0.4;
    o[0] = std::fabs(s) < 1 ? std::pow(std::cos(kPi * s / 2), 4) * (1 + t) : 0.0;
}
}  // namespace

SuiteReport solver_convergence(const json& cfg, bool parabolic) {
    SuiteReport R(parabolic ? "solver-convergence-parabolic" : "solver-convergence-elliptic");
    const std::vector<int> grids = get(cfg, "cells", std::vector<int>{16, 32, 64});
    if (grids.size() < 3) throw ConfigError("solver convergence needs three grids");
    R.environment = environment(0, {{"cells", grids}, {"scheme", "crank-nicolson"}});
    for (const auto& M : manufactured_corpus()) {
        if (M.parabolic != parabolic) continue;
        std::vector<double> err;
        double residual = 0.0;
        for (int cells : grids) {
            const GridSpec g = M.grid(cells);
            const NodeField f = sample(M.forcing, g);
            if (parabolic) {
                ParabolicData data;
                data.u0 = sample(M.exact, g).time_slice(0);
                const ParabolicSolution S = solve_parabolic(M.A, f, {Scheme::CrankNicolson, {}}, data);
                residual = std::max(residual, S.residual);
                err.push_back(l2_error_last(S.u, M.exact));
            } else {
                const EllipticSolution S = solve_elliptic(M.A, f, {});
                residual = std::max(residual, S.residual);
                err.push_back(l2_error_last(S.u, M.exact));
            }
        }
        for (std::size_t k = 0; k < err.size(); ++k) R.add_point("L2 error " + M.name, grids[k], err[k]);
        for (std::size_t k = 1; k < err.size(); ++k) {
            const double order = std::log2(err[k - 1] / err[k]);
            R.check_ge(M.name + " order " + std::to_string(grids[k - 1]) + "->" + std::to_string(grids[k]),
                       {{"cells", {grids[k - 1], grids[k]}}, {"errors", {err[k - 1], err[k]}}}, order, 1.8, 0, 0,
                       BoundSource::Measured);
        }
        R.check_le(M.name + " scheme residual", {{"cells", grids}}, residual, 1e-8, 0, 0, BoundSource::Measured);
    }
    return R;
}

namespace {
struct AprioriSetup {
    double L = 3.0, T = 0.25;
    int steps_per_cell = 1;  // time steps = cells * steps_per_cell / 4
};

double apriori_ratio_on(bool parabolic, const NormSpec& spec, double c, int cells, int steps, const AprioriSetup& S) {
    // u_c(t, x) = u(c^2 t, c x) solves the problem with forcing c^2 f(c^2 t, c x) on [0, L/c] x [0, T/c^2]
    const auto heat = SystemCoefficients::heat(1, 1);
    const PointFunction fc = [c](double t, std::span<const double> x, std::span<double> o) {
        const double y[1] = {c * x[0]};
        forcing_bump(c * c * t, y, o);
        o[0] *= c * c;
    };
    if (parabolic) {
        const GridSpec g = make_grid(1, S.L / c, {}, {cells}, S.T / (c * c), steps);
        const NodeField f = sample(fc, g);
        return apriori_ratio_parabolic(solve_parabolic(heat, f, {Scheme::CrankNicolson, spec}).u, f, spec).ratio;
    }
    const GridSpec g = make_grid(1, S.L / c, {}, {cells}, 0.0, 0);
    const NodeField f = sample(fc, g);
    return apriori_ratio_elliptic(solve_elliptic(heat, f, {Scheme::ImplicitEuler, spec}).u, f, spec).ratio;
}
}  // namespace

SuiteReport apriori_stability(const json& cfg, bool parabolic) {
    SuiteReport R(parabolic ? "apriori-parabolic" : "apriori-elliptic");
    const std::vector<int> grids = get(cfg, "cells", std::vector<int>{64, 128, 256});
    AprioriSetup S;
    S.steps_per_cell = get(cfg, "steps_per_cell", 4);
    const std::vector<std::pair<double, std::vector<double>>> cases = {{2.0, {0.5, 1.0, 1.5}}, {4.0, {0.5, 1.0, 1.5}}};
    R.environment = environment(0, {{"cells", grids},
                                    {"time_steps", parabolic ? json(std::to_string(S.steps_per_cell) + " * cells / 4") : json(0)},
                                    {"domain", {S.L, S.T}},
                                    {"dilation", "re-solve at the finest step sizes"}});
    for (const auto& [p, thetas] : cases)
        for (double theta : thetas) {
            if (!theta_admissible(1, p, theta)) throw ConfigError("apriori: theta outside the admissible range");
            const NormSpec spec{p, theta, 0, 0};
            std::vector<double> ratios;
            for (int cells : grids) ratios.push_back(apriori_ratio_on(parabolic, spec, 1.0, cells, cells * S.steps_per_cell / 4, S));
            const std::string tag = " p=" + std::to_string(p) + " theta=" + std::to_string(theta);
            for (std::size_t k = 0; k < ratios.size(); ++k) R.add_point("apriori ratio" + tag, grids[k], ratios[k]);
            for (std::size_t k = 1; k < ratios.size(); ++k)
                R.check_le("refinement change" + tag + " " + std::to_string(grids[k - 1]) + "->" + std::to_string(grids[k]),
                           {{"p", p}, {"theta", theta}, {"ratios", {ratios[k - 1], ratios[k]}}},
                           std::fabs(ratios[k] / ratios[k - 1] - 1), 0.2, 0, 0, BoundSource::Measured);
            // dilated problem re-solved with the same step sizes as the finest grid: fewer cells, so the
            // discretisation differs while the continuum ratio is scale invariant
            for (double c : {2.0, 4.0}) {
                const int cells = grids.back() / static_cast<int>(c);
                const int steps = grids.back() * S.steps_per_cell / 4 / static_cast<int>(c * c);
                const double rc = apriori_ratio_on(parabolic, spec, c, cells, steps, S);
                R.check_le("dilation change c=" + std::to_string(c) + tag,
                           {{"p", p}, {"theta", theta}, {"c", c}, {"cells", cells}, {"time_steps", steps}, {"ratio", rc}, {"reference", ratios.back()}},
                           std::fabs(rc / ratios.back() - 1), 0.1, 0, 0, BoundSource::Measured);
            }
        }
    return R;
}

}  // namespace wlab::verify
