#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "wlab/pd_system_solver.hpp"

using namespace wlab;

namespace {
const double kPi = std::numbers::pi;

Eigen::MatrixXd mat2(double a, double b, double c, double e) {
    Eigen::MatrixXd M(2, 2);
    M << a, b, c, e;
    return M;
}

// discrete L2 error at the last time node (trapezoid in space)
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

double order_of(const std::vector<double>& err) { return std::log2(err[err.size() - 2] / err.back()); }
}  // namespace

TEST_CASE("validate_ellipticity") {
    const EllipticityReport I = validate_ellipticity(SystemCoefficients::heat(2, 3));
    CHECK(I.delta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(I.sample_min >= I.delta - 1e-12);
    SystemCoefficients neg = SystemCoefficients::heat(1, 1);
    neg.pieces[0][0] *= -1.0;
    CHECK_THROWS_AS(validate_ellipticity(neg), std::domain_error);
    const auto A = SystemCoefficients::constant(1, 2, {mat2(1, 0.2, 0, 1)});
    const EllipticityReport R = validate_ellipticity(A);
    CHECK(R.delta == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(R.sample_min == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(R.sample_min >= R.delta - 1e-12);
    // off-diagonal A^{12} couples xi^1 and xi^2
    std::vector<Eigen::MatrixXd> B(4, Eigen::MatrixXd::Zero(1, 1));
    B[0](0, 0) = 1;
    B[3](0, 0) = 1;
    B[1](0, 0) = 0.6;
    CHECK(validate_ellipticity(SystemCoefficients::constant(2, 1, B)).delta == doctest::Approx(0.7).epsilon(1e-12));
    SystemCoefficients bad = SystemCoefficients::heat(1, 1);
    bad.K = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("solve_parabolic: zero data") {
    const GridSpec g = make_grid(2, 1.0, {}, {16}, 0.5, 8);
    const ParabolicSolution S = solve_parabolic(SystemCoefficients::constant(1, 2, {mat2(1, 0.2, 0, 1)}), NodeField(g), {});
    CHECK(S.u.max_abs() == 0.0);
}

TEST_CASE("solve_parabolic: manufactured scalar solution, second order in h") {
    auto exact = [](double t, std::span<const double> x, std::span<double> o) { o[0] = std::exp(-t) * std::sin(kPi * x[0]); };
    std::vector<double> err;
    for (int cells : {16, 32, 64}) {
        const GridSpec g = make_grid(1, 1.0, {}, {cells}, 0.5, cells);
        const NodeField f = sample([](double t, std::span<const double> x, std::span<double> o) {
            o[0] = (kPi * kPi - 1) * std::exp(-t) * std::sin(kPi * x[0]);
        }, g);
        ParabolicData data;
        data.u0 = sample(exact, g).time_slice(0);
        const ParabolicSolution S = solve_parabolic(SystemCoefficients::heat(1, 1), f, {Scheme::CrankNicolson, {}}, data);
        CHECK(S.residual < 1e-8);
        err.push_back(l2_error_last(S.u, exact));
    }
    CHECK(order_of(err) >= 1.8);
    CHECK(std::log2(err[0] / err[1]) >= 1.8);
}

TEST_CASE("solve_parabolic: manufactured coupled solution") {
    const auto A = SystemCoefficients::constant(1, 2, {mat2(1, 0.2, 0, 1)});
    auto exact = [](double t, std::span<const double> x, std::span<double> o) {
        o[0] = std::exp(-t) * std::sin(kPi * x[0]);
        o[1] = std::exp(-t) * std::sin(2 * kPi * x[0]);
    };
    std::vector<double> err;
    for (int cells : {16, 32, 64}) {
        const GridSpec g = make_grid(2, 1.0, {}, {cells}, 0.5, cells);
        // f = u_t - A u_xx
        const NodeField f = sample([](double t, std::span<const double> x, std::span<double> o) {
            const double e = std::exp(-t), s1 = std::sin(kPi * x[0]), s2 = std::sin(2 * kPi * x[0]);
            o[0] = -e * s1 + kPi * kPi * e * s1 + 0.2 * 4 * kPi * kPi * e * s2;
            o[1] = -e * s2 + 4 * kPi * kPi * e * s2;
        }, g);
        ParabolicData data;
        data.u0 = sample(exact, g).time_slice(0);
        const ParabolicSolution S = solve_parabolic(A, f, {Scheme::CrankNicolson, {}}, data);
        err.push_back(l2_error_last(S.u, exact));
    }
    CHECK(order_of(err) >= 1.8);
}

TEST_CASE("solve_parabolic: 2D heat with mixed coefficients") {
    std::vector<Eigen::MatrixXd> B(4, Eigen::MatrixXd::Identity(1, 1));
    B[1](0, 0) = 0.3;
    B[2](0, 0) = 0.3;
    const auto A = SystemCoefficients::constant(2, 1, B);
    // u = e^{-t} sin(pi x) sin(pi (y + 1) / 2) on [0,1] x [-1,1]
    auto exact = [](double t, std::span<const double> x, std::span<double> o) {
        o[0] = std::exp(-t) * std::sin(kPi * x[0]) * std::sin(kPi * (x[1] + 1) / 2);
    };
    std::vector<double> err;
    for (int cells : {8, 16, 32}) {
        const GridSpec g = make_grid(1, 1.0, {1.0}, {cells, 2 * cells}, 0.25, cells);
        const NodeField f = sample([](double t, std::span<const double> x, std::span<double> o) {
            const double e = std::exp(-t), a = kPi * x[0], b = kPi * (x[1] + 1) / 2;
            const double u = e * std::sin(a) * std::sin(b);
            const double uxx = -kPi * kPi * u, uyy = -kPi * kPi / 4 * u;
            const double uxy = e * kPi * std::cos(a) * kPi / 2 * std::cos(b);
            o[0] = -u - (uxx + uyy + 2 * 0.3 * uxy);
        }, g);
        ParabolicData data;
        data.u0 = sample(exact, g).time_slice(0);
        err.push_back(l2_error_last(solve_parabolic(A, f, {Scheme::CrankNicolson, {}}, data).u, exact));
    }
    CHECK(order_of(err) >= 1.8);
}

TEST_CASE("solve_parabolic: piecewise constant coefficients and boundary data") {
    // u = x^2 + 2 t solves u_t = u_xx; with A = 2 on t >= 0.25, u = x^2 + 2t for t < .25, then + 4 (t - .25)
    SystemCoefficients A;
    A.d = 1;
    A.d1 = 1;
    A.breakpoints = {0.25};
    A.pieces = {{Eigen::MatrixXd::Constant(1, 1, 1.0)}, {Eigen::MatrixXd::Constant(1, 1, 2.0)}};
    A.K = 2.0;
    auto exact = [](double t, std::span<const double> x, std::span<double> o) {
        o[0] = t < 0.25 ? x[0] * x[0] + 2 * t : x[0] * x[0] + 0.5 + 4 * (t - 0.25);
    };
    const GridSpec g = make_grid(1, 1.0, {}, {8}, 0.5, 8);
    ParabolicData data;
    data.boundary = sample(exact, g);
    data.u0 = data.boundary->time_slice(0);
    const ParabolicSolution S = solve_parabolic(A, NodeField(g), {}, data);
    CHECK(l2_error_last(S.u, exact) < 1e-12);
}

TEST_CASE("solve_elliptic: zero, manufactured, linearity") {
    const auto heat = SystemCoefficients::heat(1, 1);
    const GridSpec g0 = make_grid(1, 1.0, {}, {16}, 0.0, 0);
    CHECK(solve_elliptic(heat, NodeField(g0), {}).u.max_abs() == 0.0);
    auto exact = [](double, std::span<const double> x, std::span<double> o) { o[0] = std::sin(kPi * x[0]); };
    std::vector<double> err;
    for (int cells : {16, 32, 64}) {
        const GridSpec g = make_grid(1, 1.0, {}, {cells}, 0.0, 0);
        const NodeField f = sample([](double, std::span<const double> x, std::span<double> o) {
            o[0] = -kPi * kPi * std::sin(kPi * x[0]);
        }, g);
        err.push_back(l2_error_last(solve_elliptic(heat, f, {}).u, exact));
    }
    CHECK(order_of(err) >= 1.8);

    const auto A = SystemCoefficients::constant(1, 2, {mat2(1, 0.2, 0, 1)});
    const GridSpec g = make_grid(2, 1.0, {}, {32}, 0.0, 0);
    const NodeField f1 = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = x[0]; o[1] = 1; }, g);
    const NodeField f2 = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = std::cos(x[0]); o[1] = -x[0]; }, g);
    const NodeField s1 = solve_elliptic(A, f1, {}).u, s2 = solve_elliptic(A, f2, {}).u, s12 = solve_elliptic(A, f1 + f2, {}).u;
    for (std::size_t e = 0; e < s1.values().size(); ++e)
        CHECK(s12.values()[e] == doctest::Approx(s1.values()[e] + s2.values()[e]).epsilon(1e-10));
}

TEST_CASE("solve_elliptic: coupled manufactured") {
    const auto A = SystemCoefficients::constant(1, 2, {mat2(1, 0.2, 0, 1)});
    auto exact = [](double, std::span<const double> x, std::span<double> o) {
        o[0] = std::sin(kPi * x[0]);
        o[1] = x[0] * (1 - x[0]) * std::exp(x[0]);
    };
    std::vector<double> err;
    for (int cells : {16, 32, 64}) {
        const GridSpec g = make_grid(2, 1.0, {}, {cells}, 0.0, 0);
        const NodeField f = sample([](double, std::span<const double> x, std::span<double> o) {
            const double X = x[0], e = std::exp(X);
            const double v2 = e * (-X * X - 3 * X);  // (x - x^2) e^x differentiated twice
            o[0] = -kPi * kPi * std::sin(kPi * X) + 0.2 * v2;
            o[1] = v2;
        }, g);
        err.push_back(l2_error_last(solve_elliptic(A, f, {}).u, exact));
    }
    CHECK(order_of(err) >= 1.8);
}

TEST_CASE("apriori ratios: zero convention, refinement and dilation") {
    const GridSpec g0 = make_grid(1, 1.0, {}, {8}, 0.5, 4);
    CHECK(apriori_ratio_parabolic(NodeField(g0), NodeField(g0), {2.0, 1.0, 0, 0}).ratio == 0.0);
    auto bump = [](double t, std::span<const double> x, std::span<double> o) {
        const double s = (x[0] - 1.0) / 0.4;
        o[0] = std::fabs(s) < 1 ? std::pow(std::cos(kPi * s / 2), 4) * (1 + t) : 0.0;
    };
    const auto heat = SystemCoefficients::heat(1, 1);
    for (double p : {2.0, 4.0}) {
        const NormSpec spec{p, 1.0, 0, 0};
        std::vector<double> ratios;
        for (int cells : {64, 128}) {
            const GridSpec g = make_grid(1, 3.0, {}, {cells}, 0.25, cells / 4);
            const NodeField f = sample(bump, g);
            const ParabolicSolution S = solve_parabolic(heat, f, {Scheme::CrankNicolson, {}});
            ratios.push_back(apriori_ratio_parabolic(S.u, f, spec).ratio);
            if (cells == 64) {
                for (double c : {2.0, 4.0}) {
                    const NodeField fc = (c * c) * dilate(f, c);
                    const ParabolicSolution Sc = solve_parabolic(heat, fc, {Scheme::CrankNicolson, {}});
                    CHECK(apriori_ratio_parabolic(Sc.u, fc, spec).ratio == doctest::Approx(ratios[0]).epsilon(1e-8));
                }
            }
        }
        CHECK(std::isfinite(ratios[0]));
        CHECK(std::fabs(ratios[1] / ratios[0] - 1) < 0.2);

        const GridSpec ge = make_grid(1, 3.0, {}, {128}, 0.0, 0);
        const NodeField fe = sample(bump, ge);
        const double re = apriori_ratio_elliptic(solve_elliptic(heat, fe, {}).u, fe, spec).ratio;
        const NodeField fe2 = 4.0 * dilate(fe, 2.0);
        CHECK(apriori_ratio_elliptic(solve_elliptic(heat, fe2, {}).u, fe2, spec).ratio == doctest::Approx(re).epsilon(1e-8));
    }
    CHECK(theta_admissible(1, 2.0, 1.0));
    CHECK_FALSE(theta_admissible(1, 2.0, 0.0));
    CHECK(theta_admissible(2, 4.0, 1.5));
    CHECK_FALSE(theta_admissible(2, 1.5, 1.4));
}

TEST_CASE("caloric fields") {
    const auto heat = SystemCoefficients::heat(1, 1);
    const GridSpec g = make_grid(1, 1.0, {}, {8}, 0.5, 8);
    const NodeField lin = sample([](double, std::span<const double> x, std::span<double> o) { o[0] = x[0]; }, g);
    CHECK(caloric_residual(heat, lin) < 1e-12);
    const NodeField q = sample([](double t, std::span<const double> x, std::span<double> o) { o[0] = x[0] * x[0] + 2 * t; }, g);
    CHECK(caloric_residual(heat, q) < 1e-11);
    CHECK(apply_operator(heat, q).at(3, 4, 0) == doctest::Approx(2.0));

    LocalBox box{0.0, 1.0, {}, 1.0, 2.0};
    LocalSolveOptions opt;
    opt.cells_per_r = 4;
    const LocalSolveResult Z = homogeneous_local_solve(heat, [](double, std::span<const double>, std::span<double> o) { o[0] = 0; }, box, opt);
    CHECK(Z.u.max_abs() == 0.0);
    const LocalSolveResult Q = homogeneous_local_solve(heat, [](double t, std::span<const double> x, std::span<double> o) {
        o[0] = x[0] * x[0] + 2 * t;
    }, box, opt);
    CHECK(Q.compatible);
    double err = 0.0;
    for (int j = 0; j < Q.u.nt(); ++j)
        for (std::size_t n = 0; n < Q.u.num_space_nodes(); ++n) {
            const double x = Q.u.x(0, static_cast<int>(n));
            err = std::max(err, std::fabs(Q.u.at(j, n, 0) - (x * x + 2 * Q.u.t(j))));
        }
    CHECK(err < 1e-10);
    CHECK(Q.u.spec().origin[0] == 0.0);
    CHECK(Q.u.t(Q.u.nt() - 1) == doctest::Approx(0.0));
    const LocalSolveResult B = homogeneous_local_solve(heat, [](double, std::span<const double> x, std::span<double> o) {
        o[0] = x[0] * x[0];
    }, box, opt);
    CHECK_FALSE(B.compatible);
    CHECK_THROWS_AS(homogeneous_local_solve(heat, [](double, std::span<const double>, std::span<double> o) { o[0] = 0; },
                                            LocalBox{0.0, 1.0, {}, 1.0, 1.5}, opt),
                    std::domain_error);
}
