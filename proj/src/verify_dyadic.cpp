#include <cmath>
#include <array>
#include <random>

#include "verify_common.hpp"
#include "wlab/cube_operators.hpp"
#include "wlab/weighted_measure.hpp"

namespace wlab::verify {
using namespace detail;

namespace {
const std::vector<double> kAlphas = {-0.9, -0.5, 0.0, 0.5, 1.0, 2.7, 5.0};

double root_max_average(const CellField& g) {
    const CellField a = conditional_average(g, g.root_level());
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, v);
    return m;
}

CellWindow root_window(std::mt19937_64& rng, int d, int n_max) {
    std::uniform_int_distribution<int> ext(1, 2), off(0, 2);
    CellWindow W;
    W.t_lo = off(rng) - 1;
    W.t_hi = W.t_lo + ext(rng);
    for (int k = 0; k < d; ++k) {
        const int lo = k == 0 ? off(rng) : off(rng) - 1;
        W.lo.push_back(lo);
        W.hi.push_back(lo + ext(rng));
    }
    return refine_window(W, n_max);
}
}  // namespace

SuiteReport parent_ratio_sweep(const json& cfg) {
    SuiteReport R("parent-ratio");
    const int n_lo = get(cfg, "n_min", -8), n_hi = get(cfg, "n_max", 8);
    const std::int64_t i1_hi = get<std::int64_t>(cfg, "i1_max", 4096);
    const auto alphas = get(cfg, "alphas", kAlphas);
    R.environment = environment(0, {{"n", {n_lo, n_hi}}, {"i1_max", i1_hi}, {"i0", {-3, 3}}});
    for (int d = 1; d <= 3; ++d)
        for (double alpha : alphas) {
            const WeightParams w(alpha);
            ParabolicCube c;
            c.i.assign(d, 0);
            double worst = 0.0;
            std::size_t count = 0;
            for (int n = n_lo; n <= n_hi; ++n) {
                c.level = n;
                for (std::int64_t i0 = -3; i0 <= 3; ++i0) {
                    c.i0 = i0;
                    for (std::int64_t i1 = 0; i1 <= i1_hi; ++i1) {
                        c.i[0] = i1;
                        worst = std::max(worst, parent_ratio(c, w));
                        ++count;
                    }
                }
            }
            R.check_le("parent_ratio d=" + std::to_string(d) + " alpha=" + std::to_string(alpha),
                       {{"d", d}, {"alpha", alpha}, {"cubes", count}}, worst, parent_ratio_bound(alpha, d), 1e-12, 0.0,
                       BoundSource::Theory);
        }
    ParabolicCube witness{0, 0, {0}};
    R.check_close("parent_ratio witness d=1 alpha=1 i1=0", {{"d", 1}, {"alpha", 1.0}, {"i1", 0}},
                  parent_ratio(witness, WeightParams(1.0)), 16.0, 1e-12, 0.0, BoundSource::Exact);
    return R;
}

SuiteReport phi_ratio_sweep(const json& cfg) {
    SuiteReport R("phi-ratio");
    const std::uint64_t seed = seed_of(cfg, 2);
    const int points = get(cfg, "points", 10000);
    R.environment = environment(seed, {{"points", points}});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    json arg_worst;
    for (int k = 0; k < points; ++k) {
        const double alpha = k % 2 == 0 ? kAlphas[(k / 2) % kAlphas.size()] : -0.99 + 7.0 * U(rng);
        // (0, 100]^2 on a log scale; one in ten x hugs the boundary relative to r
        const double r = std::pow(10.0, -6.0 + 8.0 * U(rng));
        const double x = U(rng) < 0.1 ? r * 1e-12 : std::pow(10.0, -6.0 + 8.0 * U(rng));
        const double q = phi_ratio(x, r, WeightParams(alpha)) / std::pow(2.0, alpha + 1.0);
        if (q > worst) {
            worst = q;
            arg_worst = {{"x", x}, {"r", r}, {"alpha", alpha}};
        }
    }
    R.check_le("phi_ratio / 2^(alpha+1)", {{"points", points}, {"worst", arg_worst}}, worst, 1.0, 1e-12, 0.0,
               BoundSource::Theory);

    // additivity of nu over adjacent intervals and the product form of mu
    double add_err = 0.0, prod_err = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const WeightParams w(-0.95 + 6.0 * U(rng));
        const double a = U(rng) < 0.2 ? 0.0 : 4.0 * U(rng);
        const double b = a + 2.0 * U(rng), c = b + 2.0 * U(rng);
        const double whole = interval_weight(HalfLineInterval(a, c), w);
        if (whole > 0.0) {
            const double parts = interval_weight(HalfLineInterval(a, b), w) + interval_weight(HalfLineInterval(b, c), w);
            add_err = std::max(add_err, std::fabs(parts - whole) / whole);
        }
        const double T = U(rng), V = U(rng);
        const double mu = box_measure_mu(T, HalfLineInterval(a, c), V, w);
        if (mu > 0.0) prod_err = std::max(prod_err, std::fabs(mu - T * V * whole) / mu);
    }
    R.check_le("nu additivity (relative error)", {{"trials", 1000}}, add_err, 1e-12, 0.0, 0.0, BoundSource::Exact);
    R.check_le("mu product form (relative error)", {{"trials", 1000}}, prod_err, 1e-14, 0.0, 0.0, BoundSource::Exact);
    return R;
}

SuiteReport cz_identities(const json& cfg) {
    SuiteReport R("cz");
    const std::uint64_t seed = seed_of(cfg, 3);
    const int fields = get(cfg, "fields", 200);
    R.environment = environment(seed, {{"fields", fields}, {"n_max", {{"d1", 2}, {"d2", 1}}}});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const std::vector<double> alphas = {-0.5, 0.0, 1.0, 2.7};
    double integral_err = 0.0, eta_ratio = 0.0, support_ratio = 0.0, xi_stop = 0.0, split_err = 0.0;
    int truncated = 0, unmeasurable = 0;
    for (int k = 0; k < fields; ++k) {
        const int d = 1 + k % 2;
        const double alpha = alphas[(k / 2) % alphas.size()];
        const int n_max = d == 1 ? 2 : 1;
        CellField g(1, WeightParams(alpha), n_max, root_window(rng, d, n_max));
        // sparse spikes on a small background so that stopping happens at several levels
        for (double& v : g.values()) v = U(rng) < 0.15 ? 20.0 * U(rng) : 0.5 * U(rng);
        double gmax = 0.0;
        for (double v : g.values()) gmax = std::max(gmax, v);
        const double root = root_max_average(g);
        const double lambda = root + (0.1 + 0.8 * U(rng)) * (gmax - root);
        const CZDecomposition cz = cz_decompose(g, lambda);
        if (cz.tau.truncated) ++truncated;
        if (!cz.tau.is_measurable(g)) ++unmeasurable;
        const double total = g.integral()[0];
        const CellField stopped = stopped_field(g, cz.tau);
        integral_err = std::max(integral_err, std::fabs(stopped.integral()[0] - total) / total);
        const double N0 = parent_ratio_bound(alpha, d);
        for (std::size_t c = 0; c < g.num_cells(); ++c) {
            eta_ratio = std::max(eta_ratio, cz.eta.values()[c] / (N0 * lambda));
            split_err = std::max(split_err, std::fabs(cz.xi.values()[c] + cz.eta.values()[c] - g.values()[c]) / gmax);
        }
        support_ratio = std::max(support_ratio, support_measure(cz.xi, 1e-12 * gmax) * lambda / total);
        const CellField xs = stopped_field(cz.xi, cz.tau);
        for (double v : xs.values()) xi_stop = std::max(xi_stop, std::fabs(v) / gmax);
    }
    const json P = {{"fields", fields}};
    R.check_true("stopping times not truncated and measurable", P, truncated == 0 && unmeasurable == 0, truncated,
                 unmeasurable, BoundSource::Exact);
    R.check_le("|int g_tau - int g| / int g", P, integral_err, 1e-10, 0.0, 0.0, BoundSource::Exact);
    R.check_le("max eta / (N0 lambda)", P, eta_ratio, 1.0, 1e-12, 0.0, BoundSource::Theory).note =
        "tolerance is floating-point roundoff only";
    R.check_le("mu{xi != 0} lambda / int g", P, support_ratio, 1.0, 1e-12, 0.0, BoundSource::Theory);
    R.check_le("max |xi_tau| / max g", P, xi_stop, 1e-12, 0.0, 0.0, BoundSource::Exact).note =
        "xi_tau vanishes up to cancellation roundoff in the cube averages";
    R.check_le("max |xi + eta - g| / max g", P, split_err, 1e-14, 0.0, 0.0, BoundSource::Exact);
    return R;
}

SuiteReport martingale_convergence(const json& cfg) {
    SuiteReport R("martingale");
    const std::uint64_t seed = seed_of(cfg, 4);
    const int fields = get(cfg, "fields", 24);
    R.environment = environment(seed, {{"fields", fields}, {"n_max", 4}});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    std::vector<double> level_err(8, 0.0);
    for (int k = 0; k < fields; ++k) {
        const int d = 1 + k % 2;
        const int n_max = d == 1 ? 4 : 3;
        const double alpha = std::vector<double>{-0.5, 0.0, 1.5}[k % 3];
        CellWindow W{0, 1, std::vector<std::int64_t>(d, 0), std::vector<std::int64_t>(d, 1)};
        W.lo[0] = k % 3;
        W.hi[0] = W.lo[0] + 1;
        W = refine_window(W, n_max);
        // F = sum a_j sin(b_j . (t, x) + c_j) + s |x1 - x_c| is Lipschitz with L = sum |a_j| |b_j| + s
        const int terms = 3;
        std::vector<double> a(terms), c(terms);
        std::vector<std::vector<double>> b(terms, std::vector<double>(d + 1));
        double L = 0.0;
        for (int j = 0; j < terms; ++j) {
            a[j] = -1.0 + 2.0 * U(rng);
            c[j] = 6.0 * U(rng);
            double nb = 0.0;
            for (double& v : b[j]) {
                v = -4.0 + 8.0 * U(rng);
                nb += v * v;
            }
            L += std::fabs(a[j]) * std::sqrt(nb);
        }
        const double s = U(rng), xc = W.lo[0] * std::ldexp(1.0, -n_max) + 0.5;
        L += s;
        CellField f(1, WeightParams(alpha), n_max, W);
        std::vector<std::int64_t> idx(d + 1);
        const double h = std::ldexp(1.0, -n_max), ht = h * h;
        for (std::size_t cell = 0; cell < f.num_cells(); ++cell) {
            f.cell_indices(cell, idx);
            std::vector<double> p(d + 1);
            p[0] = (idx[0] + 0.5) * ht;
            for (int q = 0; q < d; ++q) p[q + 1] = (idx[q + 1] + 0.5) * h;
            double v = s * std::fabs(p[1] - xc);
            for (int j = 0; j < terms; ++j) {
                double arg = c[j];
                for (int q = 0; q <= d; ++q) arg += b[j][q] * p[q];
                v += a[j] * std::sin(arg);
            }
            f.value(cell, 0) = v;
        }
        for (int n = n_max; n >= f.root_level(); --n) {
            const CellField fn = conditional_average(f, n);
            for (std::size_t cell = 0; cell < f.num_cells(); ++cell) {
                const double diam = cube_diameter(ancestor(f.cube(cell), n));
                const double e = std::fabs(fn.values()[cell] - f.values()[cell]);
                worst = std::max(worst, e / (L * diam));
                level_err[n_max - n] = std::max(level_err[n_max - n], e / L);
            }
        }
    }
    for (std::size_t j = 0; j < level_err.size(); ++j)
        if (level_err[j] > 0.0) R.add_point("martingale max|f_n - f|/L vs levels below n_max", j, level_err[j]);
    R.check_le("max |f_Cn - f| / (L diam C_n)", {{"fields", fields}}, worst, 1.0, 1e-12, 0.0, BoundSource::Theory);
    return R;
}

SuiteReport maximal_fs(const json& cfg) {
    SuiteReport R("maximal-fs");
    const std::uint64_t seed = seed_of(cfg, 5);
    const int per_alpha = get(cfg, "fields_per_alpha", 36);
    const std::vector<double> alphas = {0.0, 0.5, 1.5}, ps = {1.5, 2.0, 4.0};
    R.environment = environment(seed, {{"fields_per_alpha", per_alpha}, {"n_max", {{"d1", {2, 3}}, {"d2", {1, 2}}}}});
    std::mt19937_64 rng(seed);
    struct Job {
        double alpha;
        int d;
        CellWindow W0;  // root-cube units
        SmoothCorpusFunction F;
    };
    std::vector<Job> jobs;
    for (double alpha : alphas)
        for (int k = 0; k < per_alpha; ++k) {
            const int d = 1 + k % 2;
            CellWindow W0 = root_window(rng, d, 0);
            const int n0 = d == 1 ? 2 : 1;
            jobs.push_back({alpha, d, W0, random_smooth(rng, refine_window(W0, n0), n0, k % 3 == 0)});
        }
    // [job][res][p] -> (M ratio, FS ratio)
    std::vector<std::array<std::array<std::array<double, 2>, 3>, 2>> out(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const Job& J = jobs[j];
        const int n0 = J.d == 1 ? 2 : 1;
        for (int res = 0; res < 2; ++res) {
            const int n = n0 + res;
            const CellField f = sample_cells(J.F, 1, J.alpha, n, refine_window(J.W0, n));
            for (std::size_t q = 0; q < ps.size(); ++q) {
                const DyadicLpNorms N = dyadic_lp_norms(f, ps[q]);
                out[j][res][q] = {N.maximal / N.f, N.f / N.sharp};
            }
        }
    });
    for (std::size_t a = 0; a < alphas.size(); ++a)
        for (std::size_t q = 0; q < ps.size(); ++q)
            for (int kind = 0; kind < 2; ++kind) {
                double m[2] = {0.0, 0.0};
                for (std::size_t j = 0; j < jobs.size(); ++j)
                    if (jobs[j].alpha == alphas[a])
                        for (int res = 0; res < 2; ++res) m[res] = std::max(m[res], out[j][res][q][kind]);
                const std::string what = kind == 0 ? "||Mf||/||f||" : "||f||/||f#||";
                const json P = {{"alpha", alphas[a]}, {"p", ps[q]}, {"max_coarse", number(m[0])}, {"max_fine", number(m[1])}};
                R.check_true(what + " finite alpha=" + std::to_string(alphas[a]) + " p=" + std::to_string(ps[q]), P,
                             std::isfinite(m[0]) && std::isfinite(m[1]), m[1], m[0], BoundSource::Measured);
                R.check_le(what + " growth under doubling alpha=" + std::to_string(alphas[a]) + " p=" + std::to_string(ps[q]),
                           P, m[1] / m[0], 1.1, 0.0, 0.0, BoundSource::Measured);
                R.add_point(what + " alpha=" + std::to_string(alphas[a]), ps[q], m[1]);
            }
    return R;
}

namespace {
// 2 sup mass(Q_(n)) / mass(C) over the cubes meeting the window at levels n_max .. n_coarse
double comparison_constant(const CellField& f, int n_coarse) {
    double worst = 0.0;
    const int d = f.d();
    for (int n = f.n_max(); n >= n_coarse; --n) {
        const std::int64_t lo = floor_shift(f.window().lo[0], f.n_max() - n);
        const std::int64_t hi = floor_shift(f.window().hi[0] - 1, f.n_max() - n);
        for (std::int64_t i1 = lo; i1 <= hi; ++i1) {
            ParabolicCube c{n, 0, std::vector<std::int64_t>(d, 0)};
            c.i[0] = i1;
            worst = std::max(worst, box_mass(comparison_box(c), f.weight()) / cube_measure(c, f.weight()));
        }
    }
    return 2.0 * worst;
}
}  // namespace

SuiteReport sharp_comparison(const json& cfg) {
    SuiteReport R("sharp-comparison");
    const std::uint64_t seed = seed_of(cfg, 6);
    const int fields = get(cfg, "fields", 24);
    const std::vector<double> alphas = {-0.5, 0.0, 0.5, 1.5};
    R.environment = environment(seed, {{"fields", fields}, {"n_max", {{"d1", {2, 3}}, {"d2", {1, 2}}}}});
    std::mt19937_64 rng(seed);
    struct Out {
        double measured[2] = {0.0, 0.0};
        double excess = 0.0;  // max f# / (N_theory f^sharp)
        int zero_sharp = 0;
    };
    struct Job {
        double alpha;
        int d;
        CellWindow W0;
        SmoothCorpusFunction F;
    };
    std::vector<Job> jobs;
    for (int k = 0; k < fields; ++k) {
        const int d = 1 + k % 2;
        const CellWindow W0 = root_window(rng, d, 0);
        const int n0 = d == 1 ? 2 : 1;
        jobs.push_back({alphas[k % alphas.size()], d, W0, random_smooth(rng, refine_window(W0, n0), n0, k % 3 == 0)});
    }
    std::vector<Out> out(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const Job& J = jobs[j];
        const int n0 = J.d == 1 ? 2 : 1;
        const int shift = J.d == 1 ? 0 : 1;  // log2 d
        for (int res = 0; res < 2; ++res) {
            const int n = n0 + res;
            const CellField f = sample_cells(J.F, 1, J.alpha, n, refine_window(J.W0, n));
            const int coarsest = dyadic_lp_norms(f, 2.0).coarsest_level;
            const CellField S = dyadic_sharp(f);
            const CellField Sf = sharp_family(f, dyadic_ladder(n + 1, coarsest - shift));
            const double Nth = comparison_constant(f, coarsest);
            for (std::size_t c = 0; c < f.num_cells(); ++c) {
                const double a = S.values()[c], b = Sf.values()[c];
                if (b == 0.0) {
                    if (a > 0.0) ++out[j].zero_sharp;
                    continue;
                }
                out[j].measured[res] = std::max(out[j].measured[res], a / b);
                out[j].excess = std::max(out[j].excess, a / (Nth * b));
            }
        }
    });
    double Nm[2] = {0.0, 0.0}, excess = 0.0;
    int zero = 0;
    for (const auto& o : out) {
        for (int r = 0; r < 2; ++r) Nm[r] = std::max(Nm[r], o.measured[r]);
        excess = std::max(excess, o.excess);
        zero += o.zero_sharp;
    }
    const json P = {{"fields", fields}, {"N_coarse", Nm[0]}, {"N_fine", Nm[1]}};
    R.check_true("f# > 0 only where the family sharp function is positive", P, zero == 0, zero, 0, BoundSource::Exact);
    R.check_le("f# <= N_cmp f^sharp cellwise (N_cmp = 2 mass(Q_(n))/mass(C))", P, excess, 1.0, 1e-12, 0.0,
               BoundSource::Theory);
    R.check_le("measured N stable under refinement |N_fine/N_coarse - 1|", P, std::fabs(Nm[1] / Nm[0] - 1.0), 0.1, 0.0,
               0.0, BoundSource::Measured);
    R.summary["measured_N"] = {Nm[0], Nm[1]};

    // clipped expansion over the family (alpha >= 0)
    for (int d = 1; d <= 3; ++d)
        for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.7, 5.0}) {
            const WeightParams w(alpha);
            double worst = 0.0;
            for (int m = -3; m <= 6; ++m) {
                const double r = std::ldexp(1.0, -m);
                for (int s = 0; s <= 64; ++s) {
                    ParabolicBox Q;
                    Q.t = 0.0;
                    Q.r = r;
                    Q.x1 = r + s * r / 2;
                    Q.xprime.assign(d - 1, 0.0);
                    worst = std::max(worst, expand_clip(Q, w).ratio);
                }
            }
            R.check_le("mass(3Q cap Omega)/mass(Q) d=" + std::to_string(d) + " alpha=" + std::to_string(alpha),
                       {{"d", d}, {"alpha", alpha}}, worst, expansion_bound(alpha, d), 1e-9, 0.0, BoundSource::Theory);
        }
    return R;
}

}  // namespace wlab::verify
