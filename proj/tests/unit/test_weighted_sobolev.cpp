#include <cmath>
#include <numbers>
#include <array>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "wlab/weighted_sobolev.hpp"

using namespace wlab;

namespace {
const double kPi = std::numbers::pi;

struct Trig {
    double a[3], b[3], c[3];
    void operator()(double, std::span<const double> x, std::span<double> out) const {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += a[k] * std::sin(b[k] * x[0] + c[k] * (x.size() > 1 ? x[1] : 0.0) + k);
        out[0] = s;
    }
};

Trig random_trig(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-3, 3);
    Trig f;
    for (int k = 0; k < 3; ++k) {
        f.a[k] = U(rng);
        f.b[k] = U(rng);
        f.c[k] = U(rng);
    }
    return f;
}

// w supported in (0.5, 1.5) in x1, times a transverse factor
void bump_field(double, std::span<const double> x, std::span<double> out) {
    const double s = x[0] - 1.0;
    double v = std::fabs(s) < 0.5 ? std::pow(std::cos(kPi * s), 4) : 0.0;
    if (x.size() > 1) v *= std::fabs(x[1]) < 0.5 ? std::pow(std::cos(kPi * x[1]), 4) : 0.0;
    out[0] = v;
}
}  // namespace

TEST_CASE("weighted_lp_norm: theta = d is the trapezoid Lp norm") {
    std::mt19937_64 rng(5);
    for (int d : {1, 2}) {
        std::vector<double> tr(d - 1, 1.0);
        std::vector<int> cells(d, 24);
        const GridSpec g = make_grid(1, 2.0, tr, cells, 1.0, 1);
        const NodeField u = sample(random_trig(rng), g);
        const double p = 3.0;
        // product trapezoid oracle
        double s = 0.0;
        std::vector<int> idx(d);
        for (std::size_t n = 0; n < u.num_space_nodes(); ++n) {
            u.node_indices(n, idx);
            double w = 1.0;
            for (int a = 0; a < d; ++a) w *= (idx[a] == 0 || idx[a] == cells[a] ? 0.5 : 1.0) * g.step[a];
            s += w * std::pow(std::fabs(u.at(0, n, 0)), p);
        }
        NormSpec spec{p, static_cast<double>(d), 0, 0};
        CHECK(weighted_lp_norm(u, spec) == doctest::Approx(std::pow(s, 1 / p)).epsilon(1e-10));
    }
}

TEST_CASE("weighted_lp_norm: documented examples") {
    GridSpec g;
    g.origin = {1.0};
    g.step = {0.25};
    g.n_nodes = {5};
    const NodeField one = sample([](double, std::span<const double>, std::span<double> o) { o[0] = 1.0; }, g);
    CHECK(weighted_lp_norm(one, NormSpec{2.0, 2.0, 0, 0}) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
    CHECK(weighted_lp_norm(-3.0 * one, NormSpec{2.0, 2.0, 0, 0}) == doctest::Approx(3 * std::sqrt(1.5)).epsilon(1e-14));
    CHECK_THROWS_AS(weighted_lp_norm(one, NormSpec{1.0, 2.0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_lp_norm(one, NormSpec{2.0, 2.0, 3, 0}), std::invalid_argument);
}

TEST_CASE("weighted_lp_norm: homogeneity and triangle inequality") {
    std::mt19937_64 rng(11);
    const GridSpec g = make_grid(1, 2.0, {1.0}, {16, 16}, 1.0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const NodeField u = sample(random_trig(rng), g), v = sample(random_trig(rng), g);
        std::uniform_real_distribution<double> U(0.5, 3.5);
        NormSpec spec{1.1 + U(rng), 0.0, 0, trial % 3};
        spec.theta = 1.5 + 0.1 * trial;  // theta - d > -1: weight integrable at 0
        const double nu = weighted_lp_norm(u, spec), nv = weighted_lp_norm(v, spec);
        CHECK(weighted_lp_norm(u + v, spec) <= (nu + nv) * (1 + 1e-10));
        CHECK(weighted_lp_norm(-2.5 * u, spec) == doctest::Approx(2.5 * nu).epsilon(1e-10));
    }
}

TEST_CASE("weighted_lp_norm: divergent weight") {
    const GridSpec g = make_grid(1, 1.0, {}, {8}, 1.0, 1);
    const NodeField one = sample([](double, std::span<const double>, std::span<double> o) { o[0] = 1.0; }, g);
    CHECK(std::isinf(weighted_lp_norm(one, NormSpec{2.0, -0.5, 0, 0})));
    const NodeField z = sample(bump_field, g);
    CHECK(std::isfinite(weighted_lp_norm(z, NormSpec{2.0, -0.5, 0, 0})));
}

TEST_CASE("sobolev_norm_integer: reduction and monotonicity") {
    std::mt19937_64 rng(3);
    const GridSpec g = make_grid(1, 2.0, {1.0}, {20, 20}, 1.0, 1);
    const NodeField u = sample(random_trig(rng), g);
    NormSpec s0{2.5, 2.3, 0, 0};
    CHECK(sobolev_norm_integer(u, s0) == doctest::Approx(weighted_lp_norm(u, s0)).epsilon(1e-14));
    NormSpec s1 = s0, s2 = s0;
    s1.gamma = 1;
    s2.gamma = 2;
    const double n0 = sobolev_norm_integer(u, s0), n1 = sobolev_norm_integer(u, s1), n2 = sobolev_norm_integer(u, s2);
    CHECK(n1 >= n0);
    CHECK(n2 >= n1);
    const NodeField c = sample([](double, std::span<const double>, std::span<double> o) { o[0] = 2.0; }, g);
    CHECK(sobolev_norm_integer(c, s1) == doctest::Approx(sobolev_norm_integer(c, s0)).epsilon(1e-10));
}

TEST_CASE("sobolev_norm_integer: matches the hand sum in 1D") {
    const GridSpec g = make_grid(1, 2.0, {}, {64}, 1.0, 1);
    const NodeField u = sample(bump_field, g);
    const NormSpec s{2.0, 1.0, 2, 0};
    const double a = weighted_lp_norm(u, {2.0, 1.0, 0, 0});
    const double b = weighted_lp_norm(derivative(u, {1}), {2.0, 1.0, 0, 1});
    const double c = weighted_lp_norm(derivative(u, {2}), {2.0, 1.0, 0, 2});
    CHECK(sobolev_norm_integer(u, s) == doctest::Approx(std::sqrt(a * a + b * b + c * c)).epsilon(1e-12));
}

TEST_CASE("equiv_triple: zero, linearity, dilation covariance") {
    for (int d : {1, 2}) {
        std::vector<double> tr(d - 1, 1.0);
        std::vector<int> cells(d, d == 1 ? 128 : 48);
        const GridSpec g = make_grid(1, 2.0, tr, cells, 1.0, 1);
        const NodeField w = sample(bump_field, g);
        const NormSpec spec{3.0, d + 0.5, 0, 0};
        const EquivTriple z = equiv_triple(0.0 * w, spec);
        CHECK(z.a == 0.0);
        CHECK(z.b == 0.0);
        CHECK(z.c == 0.0);
        const EquivTriple T = equiv_triple(w, spec), T3 = equiv_triple(3.0 * w, spec);
        CHECK(T3.a == doctest::Approx(3 * T.a).epsilon(1e-12));
        CHECK(T3.b == doctest::Approx(3 * T.b).epsilon(1e-12));
        CHECK(T3.c == doctest::Approx(3 * T.c).epsilon(1e-12));
        // every term of w(c x) scales by c^{1 - theta/p}
        for (double c : {2.0, 0.5, 3.0}) {
            const EquivTriple D = equiv_triple(dilate(w, c), spec);
            const double k = std::pow(c, 1.0 - spec.theta / spec.p);
            CHECK(D.a == doctest::Approx(k * T.a).epsilon(1e-10));
            CHECK(D.b == doctest::Approx(k * T.b).epsilon(1e-10));
            CHECK(D.c == doctest::Approx(k * T.c).epsilon(1e-10));
        }
    }
}

TEST_CASE("equiv_triple: continuum values in 1D") {
    // w = cos^4(pi (x - 1)) on (0.5, 1.5), p = 2, theta = 1: plain L2 norms with M^{-1}, 1, M
    const GridSpec g = make_grid(1, 2.0, {}, {1024}, 1.0, 1);
    const NodeField w = sample(bump_field, g);
    const EquivTriple T = equiv_triple(w, {2.0, 1.0, 0, 0});
    const int n = 20000;
    double a = 0, b = 0, c = 0;
    for (int i = 0; i < n; ++i) {
        const double x = 0.5 + (i + 0.5) / n, s = x - 1.0;
        const double cs = std::cos(kPi * s), sn = std::sin(kPi * s);
        const double v = std::pow(cs, 4), v1 = -4 * kPi * std::pow(cs, 3) * sn;
        const double v2 = 4 * kPi * kPi * (3 * cs * cs * sn * sn - std::pow(cs, 4));
        a += v * v / (x * x) / n;
        b += v1 * v1 / n;
        c += x * x * v2 * v2 / n;
    }
    CHECK(T.a == doctest::Approx(std::sqrt(a)).epsilon(1e-4));
    CHECK(T.b == doctest::Approx(std::sqrt(b)).epsilon(1e-4));
    CHECK(T.c == doctest::Approx(std::sqrt(c)).epsilon(1e-3));
}

TEST_CASE("poincare_check: closed form for u = x") {
    const double a = 2.0, r = 0.75;
    const GridSpec g = poincare_grid(1, 1, r, a, 256);
    const NodeField u = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = x[0]; }, g);
    const PoincareResult R = poincare_check(u, r, a, 2.0, 0.0);
    CHECK(R.lhs == doctest::Approx(std::pow(2 * r, 4) / 6).epsilon(1e-4));
    CHECK(R.bound == doctest::Approx(4 * std::pow(2 * r, 4)).epsilon(1e-12));
    CHECK(R.lhs / R.bound == doctest::Approx(1.0 / 24).epsilon(1e-4));
    const NodeField c = sample([](double, std::span<const double>, std::span<double> o) { o[0] = 1.0; }, g);
    CHECK(poincare_check(c, r, a, 2.0, 0.0).lhs == 0.0);
    CHECK_THROWS_AS(poincare_check(u, r, a, 2.0, -0.5), std::domain_error);
    CHECK_THROWS_AS(poincare_check(u, r, a + 0.1, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("poincare_check: random trigonometric fields") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0, 1);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int d = trial % 5 == 4 ? 2 : 1;
        const double alpha = std::array<double, 3>{0.0, 1.0, 2.5}[trial % 3];
        const double a = 0.5 + 2 * U(rng), r = a * (0.1 + 0.9 * U(rng)), p = 1.2 + 3 * U(rng);
        const Trig f = random_trig(rng);
        const int n = d == 1 ? 128 : 16;
        const NodeField u = sample(f, poincare_grid(d, 1, r, a, n));
        const NodeField u2 = sample(f, poincare_grid(d, 1, r, a, 2 * n));
        const PoincareResult R = poincare_check(u, r, a, p, alpha), R2 = poincare_check(u2, r, a, p, alpha);
        const double budget = std::fabs(R.lhs - R2.lhs) / R2.lhs + std::fabs(R.bound - R2.bound) / R2.bound;
        CHECK(R2.lhs <= R2.bound * (1 + 1e-6 + budget));
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("bump_zeta: documented properties") {
    const double psi0 = mollifier(0.0);
    const Bump z0 = bump_zeta(1.0, 0.5, 0.0);
    CHECK(z0.sup_constant() == doctest::Approx(2 * psi0).epsilon(1e-10));
    CHECK_THROWS_AS(bump_zeta(1.0, 1.5, 0.0), std::domain_error);
    for (double alpha : {0.0, 1.0, 2.5, -0.5}) {
        for (double rho : {0.05, 0.5, 1.0}) {
            const double a = 1.7, r = rho * a;
            const Bump z = bump_zeta(a, r, alpha);
            CHECK(z(a - 0.5 * r - 1e-12) == 0.0);
            CHECK(z(a + 0.5 * r + 1e-12) == 0.0);
            // int zeta x^alpha dx by Simpson on the support
            const int n = 20000;
            const double lo = a - 0.5 * r, h = r / n;
            double s = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double x = lo + i * h, c = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
                s += c * z(x) * std::pow(x, alpha);
            }
            CHECK(s * h / 3 == doctest::Approx(1.0).epsilon(1e-8));
            const double x = a + 0.1 * r, e = 1e-6 * r;
            CHECK(z.derivative(x) == doctest::Approx((z(x + e) - z(x - e)) / (2 * e)).epsilon(1e-6));
            const BumpCalibration cal = bump_calibration(alpha);
            CHECK(z.sup_constant() <= cal.sup_constant);
            CHECK(z.derivative_constant() <= cal.derivative_constant);
        }
    }
}

TEST_CASE("holder_quotients") {
    const GridSpec g = make_grid(1, 1.0, {}, {16}, 1.0, 8);
    const NodeField zero = sample([](double, std::span<const double>, std::span<double> o) { o[0] = 0.0; }, g);
    const HolderQuotients Z = holder_quotients(zero, 0.5, 8.0);
    CHECK(Z.space == 0.0);
    CHECK(Z.time == 0.0);
    const NodeField lin = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = x[0]; }, g);
    const HolderQuotients L = holder_quotients(lin, 0.5, 8.0);
    CHECK(L.space == doctest::Approx(1.0).epsilon(1e-12));  // max |x - y|^{1/2} = diam^{1/2}
    CHECK(L.time == 0.0);
    CHECK_THROWS_AS(holder_quotients(lin, 0.5, 3.0), std::domain_error);
    CHECK_THROWS_AS(holder_quotients(lin, 0.7, 8.0), std::domain_error);
}
