#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "wlab/kernel_rep.hpp"

using namespace wlab;

namespace {
double bump(double y) {
    const double s = (y - 1.25) / 0.75;
    return std::fabs(s) < 1 ? std::pow(1 - s * s, 3) : 0.0;
}

CompactFunction bump1() {
    return {[](std::span<const double> y) { return bump(y[0]); }, {0.5}, {2.0}, 1.0};
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}
}  // namespace

TEST_CASE("simulate_sigma: determinism and degenerate boundary") {
    BatchSpec spec{7, 50, 1e-3, 1.0, 10};
    const double x[2] = {1.0, 0.3};
    const SigmaSamples a = simulate_sigma(x, spec, {0.1, 0.25}), b = simulate_sigma(x, spec, {0.25, 0.1});
    CHECK(a.x1 == b.x1);
    CHECK(a.xprime == b.xprime);
    CHECK(a.x1[0] != a.x1[2]);
    const double z[2] = {0.0, 0.3};
    const SigmaSamples c = simulate_sigma(z, spec, {0.1, 0.25});
    for (double v : c.x1) CHECK(v == 0.0);
    for (double v : c.xprime) CHECK(v == 0.3);
}

TEST_CASE("simulate_sigma: exact laws") {
    const int N = 40000;
    BatchSpec spec{11, N, 1e-3, 1.0, 20};
    const double x[2] = {1.5, 0.0};
    const double t = 0.25;
    const SigmaSamples S = simulate_sigma(x, spec, {t});
    // E (sigma_t x)^1 = x1 e^{3t}
    const double m = mean_of(S.x1);
    double v = 0.0;
    for (double y : S.x1) v += (y - m) * (y - m);
    const double se = std::sqrt(v / (N - 1) / N);
    CHECK(std::fabs(m - 1.5 * std::exp(3 * t)) <= 3 * se);
    // xi increments: mean 2t, variance 2t
    const double mx = mean_of(S.xi);
    double vx = 0.0;
    for (double y : S.xi) vx += (y - mx) * (y - mx);
    vx /= N - 1;
    CHECK(std::fabs(mx - 2 * t) / std::sqrt(2 * t / N) < 4);
    CHECK(std::fabs(vx - 2 * t) / (2 * t * std::sqrt(2.0 / N)) < 4);
    // Var eta_t = (e^{8t} - 1) / 4
    std::vector<double> e2;
    for (double y : S.eta) e2.push_back(y * y);
    const double me = mean_of(e2);
    double ve = 0.0;
    for (double y : e2) ve += (y - me) * (y - me);
    CHECK(std::fabs(me - (std::exp(8 * t) - 1) / 4) <= 5 * std::sqrt(ve / (N - 1) / N));
    // median of (sigma_t x)^1 is x1 e^{2t}: order statistic interval at 3 sigma
    std::vector<double> sorted = S.x1;
    std::sort(sorted.begin(), sorted.end());
    const int lo = static_cast<int>(N / 2 - 3 * std::sqrt(N) / 2), hi = static_cast<int>(N / 2 + 3 * std::sqrt(N) / 2);
    CHECK(sorted[lo] <= 1.5 * std::exp(2 * t));
    CHECK(sorted[hi] >= 1.5 * std::exp(2 * t));
}

TEST_CASE("estimate_Ef: trivial cases and oracle agreement") {
    BatchSpec spec{3, 2000, 2e-3, 12.0, 20};
    const CompactFunction zero{[](std::span<const double>) { return 0.0; }, {0.5}, {2.0}, 0.0};
    const double x[1] = {1.0};
    CHECK(estimate_Ef(zero, x, spec).value == 0.0);
    const double x0[1] = {0.0};
    CHECK(estimate_Ef(bump1(), x0, spec).value == 0.0);
    for (double xv : {0.3, 1.0, 1.7, 3.0}) {
        const double p[1] = {xv};
        const Estimate E = estimate_Ef(bump1(), p, spec);
        const double ref = trapezoid_Ef_1d(bump, 0.5, 2.0, std::vector<double>{xv}, spec.step, spec.T_max)[0];
        const double ex = exact_Ef_1d(bump, 0.5, 2.0, xv);
        CHECK(std::fabs(E.value - ref) <= 3.5 * E.std_error);
        CHECK(std::fabs(ref - ex) <= 5e-3 * std::fabs(ex) + 1e-6);
        CHECK(E.tail_budget == doctest::Approx(std::exp(-12.0)));
    }
}

TEST_CASE("estimate_Ef: standard error scales as n^{-1/2}") {
    const double p[1] = {1.0};
    BatchSpec a{5, 1000, 4e-3, 8.0, 100}, b{6, 4000, 4e-3, 8.0, 100};
    const double r = estimate_Ef(bump1(), p, a).std_error / estimate_Ef(bump1(), p, b).std_error;
    CHECK(r > 2 * 0.8);
    CHECK(r < 2 * 1.2);
}

TEST_CASE("trapezoid reference agrees with the exact kernel") {
    const std::vector<double> xs = {0.4, 1.0, 2.5};
    const auto r = trapezoid_Ef_1d(bump, 0.5, 2.0, xs, 4e-3, 15.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double ex = exact_Ef_1d(bump, 0.5, 2.0, xs[i]);
        CHECK(std::fabs(r[i] - ex) < 1e-4 * std::fabs(ex));
    }
    // below the support E f is the constant (1/2) int f(y)/y dy
    const double c = exact_Ef_1d(bump, 0.5, 2.0, 0.1), c2 = exact_Ef_1d(bump, 0.5, 2.0, 0.2);
    CHECK(c == doctest::Approx(c2).epsilon(1e-12));
}

TEST_CASE("apply_L: documented images and adjoint") {
    const GridSpec g = make_grid(1, 2.0, {1.0}, {16, 8}, 1.0, 1);
    auto check = [&](auto fn, auto image) {
        const NodeField u = sample([&](double, std::span<const double> x, std::span<double> o) { o[0] = fn(x[0], x[1]); }, g);
        const NodeField Lu = apply_L(u);
        std::vector<int> idx(2);
        for (std::size_t n = 0; n < u.num_space_nodes(); ++n) {
            u.node_indices(n, idx);
            if (idx[0] == 0 || idx[0] == 16 || idx[1] == 0 || idx[1] == 8) continue;
            CHECK(Lu.at(0, n, 0) == doctest::Approx(image(u.x(0, idx[0]), u.x(1, idx[1]))).epsilon(1e-10));
        }
    };
    check([](double, double) { return 4.0; }, [](double, double) { return 0.0; });
    check([](double x, double) { return x; }, [](double x, double) { return 3 * x; });
    check([](double x, double) { return x * x; }, [](double x, double) { return 8 * x * x; });
    check([](double x, double y) { return y * y; }, [](double x, double) { return 2 * x * x; });
    // <L u, phi> = <u, L^T phi>
    const NodeField u = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = std::sin(x[0]) + x[1]; }, g);
    const NodeField phi = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = std::cos(x[0] * x[1]); }, g);
    const NodeField Lu = apply_L(u), Ltphi = apply_L_adjoint(phi);
    double a = 0.0, b = 0.0;
    for (std::size_t n = 0; n < u.num_space_nodes(); ++n) {
        a += Lu.at(0, n, 0) * phi.at(0, n, 0);
        b += u.at(0, n, 0) * Ltphi.at(0, n, 0);
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("weak residual and divergence with the exact kernel") {
    std::vector<double> err, rec;
    for (int cells : {64, 128}) {
        const GridSpec g = make_grid(1, 4.0, {}, {cells}, 1.0, 1);
        const NodeField f = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = bump(x[0]); }, g);
        const NodeField E = sample([](double, std::span<const double> x, std::span<double> o) {
            o[0] = exact_Ef_1d(bump, 0.5, 2.0, x[0]);
        }, g);
        const NodeField phi = sample([](double, std::span<const double> x, std::span<double> o) {
            const double s = (x[0] - 1.5) / 0.8;
            o[0] = std::fabs(s) < 1 ? std::pow(1 - s * s, 4) : 0.0;
        }, g);
        err.push_back(std::fabs(weak_residual(E, f, phi)));
        rec.push_back(divergence_decomposition(E, f).reconstruction_error);
        CHECK(weak_residual(NodeField(g), NodeField(g), phi) == 0.0);
    }
    CHECK(err[1] < 0.35 * err[0]);
    CHECK(rec[1] < 0.35 * rec[0]);
    CHECK(rec[1] < 1e-2);
}

TEST_CASE("weak residual: Monte Carlo, linearity under common random numbers") {
    const GridSpec g = make_grid(1, 4.0, {}, {32}, 1.0, 1);
    BatchSpec spec{9, 400, 4e-3, 10.0, 20};
    const CompactFunction f1 = bump1();
    const CompactFunction f2{[](std::span<const double> y) { return 2 * bump(y[0]) * y[0]; }, {0.5}, {2.0}, 4.0};
    const CompactFunction f12{[](std::span<const double> y) { return bump(y[0]) * (1 + 2 * y[0]); }, {0.5}, {2.0}, 5.0};
    const auto E = estimate_Ef_grid({f1, f2, f12}, g, spec);
    const NodeField phi = sample([](double, std::span<const double> x, std::span<double> o) {
        const double s = (x[0] - 1.5) / 0.8;
        o[0] = std::fabs(s) < 1 ? std::pow(1 - s * s, 4) : 0.0;
    }, g);
    auto fld = [&](const CompactFunction& c) {
        return sample([&](double, std::span<const double> x, std::span<double> o) { o[0] = c.in_support(x) ? c.fn(x) : 0.0; }, g);
    };
    const auto r1 = weak_residual(E[0], fld(f1), {phi}), r2 = weak_residual(E[1], fld(f2), {phi}), r12 = weak_residual(E[2], fld(f12), {phi});
    CHECK(r12[0].value == doctest::Approx(r1[0].value + r2[0].value).epsilon(1e-9));
    CHECK(r1[0].std_error > 0.0);
    const auto zero = estimate_Ef_grid(CompactFunction{[](std::span<const double>) { return 0.0; }, {0.5}, {2.0}, 0.0}, g, spec);
    CHECK(weak_residual(zero, NodeField(g), {phi})[0].value == 0.0);
    const Divergence D0 = divergence_decomposition(zero, NodeField(g));
    CHECK(D0.reconstruction.max_abs() == 0.0);
    // MC residual against the deterministic expectation of the estimator
    std::vector<double> xs;
    for (int i = 0; i <= 32; ++i) xs.push_back(i * 4.0 / 32);
    const auto ref = trapezoid_Ef_1d(bump, 0.5, 2.0, xs, spec.step, spec.T_max);
    NodeField R(g);
    for (int i = 0; i <= 32; ++i) R.at(0, i, 0) = ref[i];
    const double res_ref = weak_residual(R, fld(f1), phi);
    CHECK(std::fabs(r1[0].value) <= std::fabs(res_ref) + 3 * r1[0].std_error);
    const Divergence D = divergence_decomposition(E[0], fld(f1));
    const Divergence Dref = divergence_decomposition(R, fld(f1));
    CHECK(D.reconstruction_error <= Dref.reconstruction_error + 3 * D.reconstruction_std_error);
    CHECK(std::isfinite(D.ratio));
}
