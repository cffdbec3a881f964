#include <cmath>

#include "verify_common.hpp"
#include "wlab/kernel_rep.hpp"

namespace wlab::verify {
using namespace detail;

namespace {
double bump(double y) {
    const double s = (y - 1.25) / 0.75;
    return std::fabs(s) < 1 ? std::pow(1 - s * s, 3) : 0.0;
}

double mean_se(const std::vector<double>& v, double& se) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    se = std::sqrt(s / (v.size() - 1) / v.size());
    return m;
}
}  // namespace

SuiteReport kernel_checks(const json& cfg) {
    SuiteReport R("kernel");
    const std::uint64_t seed = seed_of(cfg, 10);
    const int law_paths = get(cfg, "law_paths", 100000);
    const int grid_paths = get(cfg, "grid_paths", 4000);
    const double step = get(cfg, "step", 1e-3), T_max = get(cfg, "T_max", 20.0);
    const int cells = get(cfg, "cells", 32);
    R.environment = environment(seed, {{"law_paths", law_paths},
                                       {"grid_paths", grid_paths},
                                       {"step", step},
                                       {"T_max", T_max},
                                       {"cells", cells},
                                       {"batches", 20}});

    // exact laws of the first coordinate and of eta
    {
        BatchSpec spec{seed, law_paths, step, 1.0, 20};
        const double x[2] = {1.5, 0.0};
        const std::vector<double> times = {0.1, 0.25};
        const SigmaSamples S = simulate_sigma(x, spec, times);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double t = times[k];
            std::vector<double> v(S.n_paths);
            for (int p = 0; p < S.n_paths; ++p) v[p] = S.x1[p * times.size() + k];
            double se = 0.0;
            const double m = mean_se(v, se);
            R.check_close("E (sigma_t x)^1 = x1 e^{3t} at t=" + std::to_string(t), {{"t", t}, {"paths", law_paths}, {"se", se}},
                          m, 1.5 * std::exp(3 * t), 0.0, 3 * se, BoundSource::Exact);
        }
        const double t = 0.25;
        std::vector<double> e(S.n_paths), e2(S.n_paths);
        for (int p = 0; p < S.n_paths; ++p) e[p] = S.eta[p * times.size() + 1];
        double se_m = 0.0;
        const double me = mean_se(e, se_m);
        for (int p = 0; p < S.n_paths; ++p) e2[p] = (e[p] - me) * (e[p] - me);
        double se = 0.0;
        const double var = mean_se(e2, se) * S.n_paths / (S.n_paths - 1.0);
        R.check_close("Var eta_t = (e^{8t} - 1)/4 at t=0.25", {{"t", t}, {"paths", law_paths}, {"se", se}}, var,
                      (std::exp(8 * t) - 1) / 4, 0.0, 5 * se, BoundSource::Exact);
    }

    // weak residuals against three test functions, and the divergence form
    const GridSpec g = make_grid(1, 4.0, {}, {cells}, 1.0, 1);
    const BatchSpec spec{seed + 1, grid_paths, step, T_max, 20};
    const CompactFunction f1{[](std::span<const double> y) { return bump(y[0]); }, {0.5}, {2.0}, 1.0};
    const EfGrid E = estimate_Ef_grid(f1, g, spec);
    const NodeField f = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = bump(x[0]); }, g);
    std::vector<double> xs;
    for (int i = 0; i <= cells; ++i) xs.push_back(i * 4.0 / cells);
    const auto ref = trapezoid_Ef_1d(bump, 0.5, 2.0, xs, step, T_max);
    NodeField Rf(g);
    for (int i = 0; i <= cells; ++i) Rf.at(0, i, 0) = ref[i];
    std::vector<NodeField> tests;
    const std::vector<double> centers = {1.0, 1.5, 2.2};
    for (double c : centers)
        tests.push_back(sample([c](double, std::span<const double> x, std::span<double> o) {
            const double s = (x[0] - c) / 0.8;
            o[0] = std::fabs(s) < 1 ? std::pow(1 - s * s, 4) : 0.0;
        }, g));
    const auto res = weak_residual(E, f, tests);
    for (std::size_t k = 0; k < tests.size(); ++k) {
        const double disc = std::fabs(weak_residual(Rf, f, tests[k]));
        // the truncation at T_max moves <Ef, L^T phi> by at most sup|f| e^{-T_max} ||L^T phi||_1
        const NodeField Lt = apply_L_adjoint(tests[k]);
        double l1 = 0.0;
        for (double v : Lt.values()) l1 += std::fabs(v) * g.step[0];
        const double tail = E.tail_budget * l1;
        auto& c = R.check_le("weak residual phi centre " + std::to_string(centers[k]),
                             {{"centre", centers[k]}, {"paths", grid_paths}, {"se", res[k].std_error},
                              {"discretization_budget", disc}, {"tail_budget", tail}},
                             std::fabs(res[k].value), disc + tail, 0.0, 3 * res[k].std_error, BoundSource::Measured);
        c.note = "rhs = reference residual of the discrete estimator plus truncation tail; budget = 3 SE";
        R.add_point("weak residual", centers[k], res[k].value);
    }
    const Divergence D = divergence_decomposition(E, f);
    const Divergence Dref = divergence_decomposition(Rf, f);
    R.check_le("divergence reconstruction ||M D_i f^i - f||", {{"se", D.reconstruction_std_error},
                                                                {"discretization_budget", Dref.reconstruction_error}},
               D.reconstruction_error, Dref.reconstruction_error, 0.0, 3 * D.reconstruction_std_error, BoundSource::Measured);
    R.describe("sum ||f^i|| / ||f||", {{"p", 2.0}}, D.ratio, Dref.ratio);
    R.summary["tail_budget"] = E.tail_budget;

    // point estimates against the deterministic expectation of the estimator
    {
        BatchSpec ps{seed + 2, 2000, 2e-3, 12.0, 20};
        for (double xv : {0.3, 1.0, 1.7, 3.0}) {
            const double p[1] = {xv};
            const Estimate Ep = estimate_Ef(f1, p, ps);
            const double refp = trapezoid_Ef_1d(bump, 0.5, 2.0, std::vector<double>{xv}, ps.step, ps.T_max)[0];
            R.check_close("E f(x) at x=" + std::to_string(xv) + " vs discrete-estimator expectation",
                          {{"x", xv}, {"se", Ep.std_error}, {"exact_kernel", exact_Ef_1d(bump, 0.5, 2.0, xv)}}, Ep.value, refp,
                          0.0, 3.5 * Ep.std_error + Ep.tail_budget, BoundSource::Measured);
        }
    }
    return R;
}

}  // namespace wlab::verify
