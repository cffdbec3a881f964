#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "wlab/dyadic_grid.hpp"

using namespace wlab;

namespace {

CellWindow win(std::int64_t t_lo, std::int64_t t_hi, std::vector<std::int64_t> lo, std::vector<std::int64_t> hi) {
    return CellWindow{t_lo, t_hi, std::move(lo), std::move(hi)};
}

// 8 on the level-0 cube [0,1) x [0,1), zero elsewhere in [0,16) x [0,4)
CellField spike(double alpha = 0.0) {
    CellField f(1, WeightParams(alpha), 0, win(0, 16, {0}, {4}));
    const std::int64_t i[1] = {0};
    f.value(f.cell_of(0, i), 0) = 8.0;
    return f;
}

double at(const CellField& f, std::int64_t i0, std::int64_t i1, int k = 0) {
    const std::int64_t i[1] = {i1};
    return f.value(f.cell_of(i0, i), k);
}

// Brute-force level-n average of a window cell: sum over all window cells inside the ancestor.
std::vector<double> brute_average(const CellField& f, std::size_t cell, int n) {
    const ParabolicCube C = ancestor(f.cube(cell), n);
    std::vector<double> s(f.d1(), 0.0);
    for (std::size_t c = 0; c < f.num_cells(); ++c)
        if (contains(C, f.cube(c)))
            for (int k = 0; k < f.d1(); ++k) s[k] += f.cell_mass(c) * f.value(c, k);
    for (double& v : s) v /= cube_measure(C, f.weight());
    return s;
}

std::vector<double> brute_oscillation(const CellField& f, std::size_t cell, int n) {
    const ParabolicCube C = ancestor(f.cube(cell), n);
    const auto a = brute_average(f, cell, n);
    std::vector<double> s(f.d1(), 0.0);
    double inside = 0.0;
    for (std::size_t c = 0; c < f.num_cells(); ++c)
        if (contains(C, f.cube(c))) {
            inside += f.cell_mass(c);
            for (int k = 0; k < f.d1(); ++k) s[k] += f.cell_mass(c) * std::fabs(f.value(c, k) - a[k]);
        }
    const double mu = cube_measure(C, f.weight());
    for (int k = 0; k < f.d1(); ++k) s[k] = (s[k] + std::fabs(a[k]) * (mu - inside)) / mu;
    return s;
}

CellField random_field(std::mt19937_64& rng, int d, int d1, double alpha, int n_max, bool nonneg) {
    std::uniform_int_distribution<int> ext(1, 3);
    CellWindow W;
    W.t_lo = std::uniform_int_distribution<int>(-3, 3)(rng);
    W.t_hi = W.t_lo + ext(rng) + 1;
    for (int k = 0; k < d; ++k) {
        const std::int64_t lo = k == 0 ? std::uniform_int_distribution<int>(0, 3)(rng) : std::uniform_int_distribution<int>(-2, 2)(rng);
        W.lo.push_back(lo);
        W.hi.push_back(lo + ext(rng) + (d == 1 ? 2 : 0));
    }
    CellField f(d1, WeightParams(alpha), n_max, W);
    std::uniform_real_distribution<double> U(nonneg ? 0.0 : -1.0, 1.0);
    for (double& v : f.values()) v = U(rng) * (U(rng) > 0.2 ? 1.0 : 5.0);
    return f;
}

}  // namespace

TEST_CASE("locate_cube examples") {
    const double x0[1] = {0.2};
    auto c = locate_cube(0, 0.5, x0);
    CHECK(c.i0 == 0);
    CHECK(c.i[0] == 0);
    const double x1[1] = {0.6};
    c = locate_cube(1, 0.3, x1);
    CHECK(c.i0 == 1);  // time side 4^{-1}: floor(0.3 * 4)
    CHECK(c.i[0] == 1);
    const double x2[1] = {0.5};
    c = locate_cube(-1, -1.0, x2);
    CHECK(c.i0 == -1);
    CHECK(c.i[0] == 0);
    const double bad[1] = {-0.1};
    CHECK_THROWS_AS(locate_cube(0, 0.0, bad), std::domain_error);
    // half-open faces
    const double face[2] = {1.0, -0.5};
    c = locate_cube(0, 1.0, face);
    CHECK(c.i0 == 1);
    CHECK(c.i[0] == 1);
    CHECK(c.i[1] == -1);
}

TEST_CASE("parent examples") {
    CHECK(parent(ParabolicCube{0, 0, {0}}) == ParabolicCube{-1, 0, {0}});
    CHECK(parent(ParabolicCube{0, 5, {3}}) == ParabolicCube{-1, 1, {1}});
    CHECK(parent(ParabolicCube{1, -1, {0, 2}}) == ParabolicCube{0, -1, {0, 1}});
    CHECK(parent(SpatialCell{2, {5, -3}}) == SpatialCell{1, {2, -2}});
}

TEST_CASE("cube measure and parent ratio examples") {
    CHECK(cube_measure(ParabolicCube{0, 0, {0}}, WeightParams(1)) == doctest::Approx(0.5));
    CHECK(cube_measure(ParabolicCube{0, 0, {0}}, WeightParams(0)) == doctest::Approx(1.0));
    CHECK(cube_measure(ParabolicCube{-1, 0, {0}}, WeightParams(1)) == doctest::Approx(8.0));
    CHECK(parent_ratio(ParabolicCube{0, 0, {0}}, WeightParams(1)) == doctest::Approx(16.0));
    CHECK(parent_ratio_bound(1.0, 1) == doctest::Approx(16.0));
    for (std::int64_t i1 : {0, 1, 7, 100})
        CHECK(parent_ratio(ParabolicCube{3, -5, {i1}}, WeightParams(0)) == doctest::Approx(8.0));
    const double r = parent_ratio(ParabolicCube{0, 0, {1 << 20, 3}}, WeightParams(1));
    CHECK(r == doctest::Approx(16.0).epsilon(1e-5));
    CHECK(r <= parent_ratio_bound(1.0, 2));
    CHECK(cell_measure(SpatialCell{0, {0}}, WeightParams(1)) == doctest::Approx(0.5));
    CHECK(parent_ratio(SpatialCell{0, {0}}, WeightParams(1)) == doctest::Approx(4.0));
}

TEST_CASE("negative alpha bound is attained by the odd child next to the boundary") {
    const double a = -0.5;
    const double q = std::pow(2.0, a + 1);
    // child [1,2) inside parent [0,2): ratio_x = q / (q - 1)
    const double expect = 4.0 * q / (q - 1.0);
    CHECK(parent_ratio(ParabolicCube{0, 0, {1}}, WeightParams(a)) == doctest::Approx(expect));
    CHECK(parent_ratio(ParabolicCube{0, 0, {1}}, WeightParams(a)) <= parent_ratio_bound(a, 1));
}

TEST_CASE("filtration nesting") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-10, 10), P(0, 10);
    for (int k = 0; k < 200; ++k) {
        const double x[2] = {P(rng), U(rng)};
        const double t = U(rng);
        const int n = std::uniform_int_distribution<int>(-4, 6)(rng);
        const auto fine = locate_cube(n, t, x);
        for (int m = n - 4; m <= n; ++m) {
            const auto coarse = locate_cube(m, t, x);
            CHECK(ancestor(fine, m) == coarse);
            CHECK(contains(coarse, fine));
        }
        // a cube at the same level but different index does not contain it
        auto other = fine;
        other.i0 += 1;
        CHECK_FALSE(contains(other, fine));
    }
}

TEST_CASE("window root level") {
    CHECK(spike().root_level() == -2);
    CellField g(1, WeightParams(0), 3, win(0, 64, {0}, {8}));
    CHECK(g.root_level() == 0);
    CellField h(1, WeightParams(0), 3, win(1, 5, {0}, {8}));
    CHECK(h.root_level() == 3);
}

TEST_CASE("conditional average example") {
    const CellField f = spike();
    const CellField a = conditional_average(f, -1);
    for (int t = 0; t < 16; ++t)
        for (int x = 0; x < 4; ++x) {
            const double expect = (t < 4 && x < 2) ? 1.0 : 0.0;
            CHECK(at(a, t, x) == doctest::Approx(expect));
        }
    CHECK(at(conditional_average(f, 0), 0, 0) == 8.0);
    CHECK_THROWS_AS(conditional_average(f, 1), std::invalid_argument);
    CellField c(2, WeightParams(1.5), 2, win(0, 16, {0}, {4}));
    for (std::size_t i = 0; i < c.num_cells(); ++i) {
        c.value(i, 0) = 3.5;
        c.value(i, 1) = -1.0;
    }
    const CellField ca = conditional_average(c, 1);
    for (std::size_t i = 0; i < c.num_cells(); ++i) {
        CHECK(ca.value(i, 0) == doctest::Approx(3.5));
        CHECK(ca.value(i, 1) == doctest::Approx(-1.0));
    }
}

TEST_CASE("stopping time examples") {
    const CellField g = spike();
    const auto t1 = build_stopping_time(g, 1.0);
    CHECK_FALSE(t1.truncated);
    CHECK(t1.is_measurable(g));
    for (std::size_t c = 0; c < g.num_cells(); ++c) CHECK(t1.tau[c] == (c == g.cell_of(0, std::vector<std::int64_t>{0}) ? 0 : kNeverStopped));
    const auto t2 = build_stopping_time(g, 0.5);
    CHECK(t2.is_measurable(g));
    for (int t = 0; t < 16; ++t)
        for (int x = 0; x < 4; ++x) {
            const std::int64_t i[1] = {x};
            CHECK(t2.tau[g.cell_of(t, i)] == ((t < 4 && x < 2) ? -1 : kNeverStopped));
        }
    CellField z(1, WeightParams(0), 0, win(0, 16, {0}, {4}));
    for (int v : build_stopping_time(z, 0.1).tau) CHECK(v == kNeverStopped);
    CHECK(build_stopping_time(g, 0.1).truncated);
}

TEST_CASE("stopped field and CZ examples") {
    const CellField g = spike();
    const double total = g.integral()[0];
    const auto e1 = stopped_field(g, build_stopping_time(g, 1.0));
    CHECK(at(e1, 0, 0) == 8.0);
    CHECK(e1.integral()[0] == doctest::Approx(total));
    const auto e2 = stopped_field(g, build_stopping_time(g, 0.5));
    for (int t = 0; t < 16; ++t)
        for (int x = 0; x < 4; ++x) CHECK(at(e2, t, x) == doctest::Approx((t < 4 && x < 2) ? 1.0 : 0.0));
    CHECK(e2.integral()[0] == doctest::Approx(8.0));

    const auto cz = cz_decompose(g, 1.0);
    CHECK(at(cz.eta, 0, 0) == doctest::Approx(parent_ratio_bound(0.0, 1) * 1.0));
    for (double v : cz.xi.values()) CHECK(v == 0.0);
    const auto big = cz_decompose(g, 9.0);
    for (std::size_t i = 0; i < g.num_cells(); ++i) CHECK(big.eta.values()[i] == g.values()[i]);
}

TEST_CASE("CZ postconditions on random 16-cell fields") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 40; ++rep) {
        const double alpha = std::vector<double>{-0.5, 0.0, 1.0, 2.7}[rep % 4];
        CellField g(1, WeightParams(alpha), 1, win(0, 4, {0}, {4}));  // 16 cells, root level 0
        std::uniform_real_distribution<double> U(0.0, 10.0);
        for (double& v : g.values()) v = U(rng) * U(rng);
        std::vector<double> sorted(g.values().begin(), g.values().end());
        std::sort(sorted.begin(), sorted.end());
        const double lambda = 0.5 * (sorted[7] + sorted[8]);
        const auto cz = cz_decompose(g, lambda);
        if (cz.tau.truncated) continue;
        const double total = g.integral()[0];
        for (std::size_t i = 0; i < g.num_cells(); ++i) {
            CHECK(cz.xi.values()[i] + cz.eta.values()[i] == doctest::Approx(g.values()[i]).epsilon(1e-14));
            // eta on stopped cells: average over the stop cube, enumerated directly
            if (cz.tau.tau[i] != kNeverStopped) {
                CHECK(cz.eta.values()[i] == doctest::Approx(brute_average(g, i, cz.tau.tau[i])[0]).epsilon(1e-12));
                CHECK(cz.eta.values()[i] <= parent_ratio_bound(alpha, 1) * lambda * (1 + 1e-12));
            }
        }
        CHECK(cz.eta.integral()[0] == doctest::Approx(total).epsilon(1e-12));
        CHECK(support_measure(cz.xi, 1e-12 * sorted.back()) <= total / lambda * (1 + 1e-12));
        const auto xs = stopped_field(cz.xi, cz.tau);
        for (std::size_t i = 0; i < g.num_cells(); ++i)
            if (cz.tau.tau[i] != kNeverStopped) CHECK(std::fabs(xs.values()[i]) <= 1e-12 * sorted.back());
        CHECK(cz.tau.is_measurable(g));
    }
}

TEST_CASE("dyadic maximal and sharp examples") {
    const CellField f = spike();
    const CellField M = dyadic_maximal(f);
    const CellField S = dyadic_sharp(f);
    for (int t = 0; t < 16; ++t)
        for (int x = 0; x < 4; ++x) {
            const bool cell = t == 0 && x == 0, near = t < 4 && x < 2;
            CHECK(at(M, t, x) == doctest::Approx(cell ? 8.0 : near ? 1.0 : 0.125));
            // level -2 oscillation 2 (8 - 1/8) / 64
            CHECK(at(S, t, x) == doctest::Approx(near ? 1.75 : 2.0 * (8.0 - 0.125) / 64.0));
        }
    CellField c(1, WeightParams(1.0), 2, win(0, 16, {0}, {4}));
    for (double& v : c.values()) v = 3.0;
    const CellField Mc = dyadic_maximal(c);
    for (double v : Mc.values()) CHECK(v == doctest::Approx(3.0));
}

TEST_CASE("maximal and sharp agree with brute-force ancestor enumeration") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 12; ++rep) {
        const int d = 1 + rep % 2, d1 = 1 + (rep / 2) % 2;
        const double alpha = std::vector<double>{-0.5, 0.0, 1.5}[rep % 3];
        const CellField f = random_field(rng, d, d1, alpha, 1, false);
        const CellField M = dyadic_maximal(f), S = dyadic_sharp(f);
        CellField absf = f;
        for (double& v : absf.values()) v = std::fabs(v);
        for (std::size_t cell = 0; cell < f.num_cells(); ++cell) {
            std::vector<double> bm(d1, 0.0), bs(d1, 0.0);
            for (int n = f.n_max(); n >= f.n_max() - 40; --n) {
                const auto a = brute_average(absf, cell, n);
                const auto o = brute_oscillation(f, cell, n);
                for (int k = 0; k < d1; ++k) {
                    bm[k] = std::max(bm[k], a[k]);
                    bs[k] = std::max(bs[k], o[k]);
                }
            }
            for (int k = 0; k < d1; ++k) {
                CHECK(M.value(cell, k) == doctest::Approx(bm[k]).epsilon(1e-12));
                CHECK(S.value(cell, k) == doctest::Approx(bs[k]).epsilon(1e-12));
                CHECK(M.value(cell, k) >= std::fabs(f.value(cell, k)));
                CHECK(S.value(cell, k) <= 2.0 * M.value(cell, k) * (1 + 1e-14));
            }
        }
        // positive homogeneity
        CellField g = f;
        for (double& v : g.values()) v *= -2.5;
        const CellField Mg = dyadic_maximal(g), Sg = dyadic_sharp(g);
        for (std::size_t i = 0; i < f.values().size(); ++i) {
            CHECK(Mg.values()[i] == doctest::Approx(2.5 * M.values()[i]).epsilon(1e-12));
            CHECK(Sg.values()[i] == doctest::Approx(2.5 * S.values()[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("full-space norms of the spike match the closed-form level series") {
    const CellField f = spike();
    for (double p : {1.5, 2.0, 4.0}) {
        const auto N = dyadic_lp_norms(f, p);
        // window: cell 8, seven cells at 1, 56 cells at 1/8
        const double mwin = std::pow(8.0, p) + 7.0 + 56.0 * std::pow(0.125, p);
        const double osc2 = 2.0 * (8.0 - 0.125) / 64.0;
        const double swin = 8.0 * std::pow(1.75, p) + 56.0 * std::pow(osc2, p);
        double mext = 0.0, sext = 0.0;
        for (int k = 3; k < 200; ++k) {
            const double mu = std::pow(8.0, k);
            mext += std::pow(8.0 / mu, p) * mu * 7.0 / 8.0;
            sext += std::pow(16.0 * (1.0 - 1.0 / mu) / mu, p) * mu * 7.0 / 8.0;
        }
        CHECK(N.f == doctest::Approx(8.0));
        CHECK(N.maximal_window == doctest::Approx(std::pow(mwin, 1.0 / p)).epsilon(1e-13));
        CHECK(N.sharp_window == doctest::Approx(std::pow(swin, 1.0 / p)).epsilon(1e-13));
        CHECK(N.maximal == doctest::Approx(std::pow(mwin + mext, 1.0 / p)).epsilon(1e-12));
        CHECK(N.sharp == doctest::Approx(std::pow(swin + sext, 1.0 / p)).epsilon(1e-12));
    }
}
