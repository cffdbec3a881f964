// Conditional averages, stopping times, CZ decomposition, dyadic maximal and sharp functions.
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wlab/dyadic_grid.hpp"

namespace wlab {

namespace {

std::vector<double> cube_sums(const CellField& f, const LevelGrid& G, bool absolute) {
    const int d1 = f.d1();
    std::vector<double> s(G.num_cubes * d1, 0.0);
    for (std::size_t cell = 0; cell < f.num_cells(); ++cell) {
        const double m = f.cell_mass(cell);
        const std::size_t c = G.cell_to_cube[cell];
        for (int k = 0; k < d1; ++k) {
            const double v = f.value(cell, k);
            s[c * d1 + k] += m * (absolute ? std::fabs(v) : v);
        }
    }
    return s;
}

// Mean oscillation of each cube, f taken as zero outside the window.
std::vector<double> cube_oscillations(const CellField& f, const LevelGrid& G, const std::vector<double>& avg) {
    const int d1 = f.d1();
    std::vector<double> o(G.num_cubes * d1, 0.0);
    for (std::size_t cell = 0; cell < f.num_cells(); ++cell) {
        const double m = f.cell_mass(cell);
        const std::size_t c = G.cell_to_cube[cell];
        for (int k = 0; k < d1; ++k) o[c * d1 + k] += m * std::fabs(f.value(cell, k) - avg[c * d1 + k]);
    }
    for (std::size_t c = 0; c < G.num_cubes; ++c) {
        const double outside = std::max(0.0, G.cube_mu[c] - G.mass_in_window[c]);
        for (int k = 0; k < d1; ++k)
            o[c * d1 + k] = (o[c * d1 + k] + std::fabs(avg[c * d1 + k]) * outside) / G.cube_mu[c];
    }
    return o;
}

std::vector<std::size_t> parent_map(const LevelGrid& fine, const LevelGrid& coarse) {
    std::vector<std::size_t> p(fine.num_cubes);
    for (std::size_t c = 0; c < fine.num_cubes; ++c) {
        p[c] = coarse.cube_index(parent(fine.cube(c)));
        if (p[c] == coarse.num_cubes) throw std::logic_error("level grids are not nested");
    }
    return p;
}

struct CoarseLevel {
    std::vector<double> term_max, term_sharp;  // per cube * d1
    std::vector<double> ext_mass;              // cube measure outside the finer grid
    std::vector<std::size_t> to_parent;        // index into the next coarser level
};

struct SweepResult {
    std::vector<double> maximal, sharp;  // window values, cell * d1
    double ext_max_p = 0.0, ext_sharp_p = 0.0;
    int coarsest = 0;
};

// Scans levels from n_max downwards. Window values are exact; with p > 0 the
// exterior contributions to the p-th power norms are accumulated until the
// remaining tail is below 1e-15 of the window part.
SweepResult sweep(const CellField& f, double p) {
    const int d1 = f.d1();
    const int d = f.d();
    const std::size_t nc = f.num_cells();
    SweepResult R;
    std::vector<double> fine_max(nc * d1, 0.0), fine_sharp(nc * d1, 0.0);
    for (std::size_t i = 0; i < nc * d1; ++i) fine_max[i] = std::fabs(f.values()[i]);

    std::vector<double> total(d1, 0.0);
    for (std::size_t cell = 0; cell < nc; ++cell)
        for (int k = 0; k < d1; ++k) total[k] += f.cell_mass(cell) * std::fabs(f.value(cell, k));

    const int n_root = f.root_level();
    LevelGrid G;
    for (int n = f.n_max(); n >= n_root; --n) {
        G = make_level_grid(f, n);
        auto sabs = cube_sums(f, G, true);
        auto s = cube_sums(f, G, false);
        for (std::size_t c = 0; c < G.num_cubes; ++c)
            for (int k = 0; k < d1; ++k) {
                sabs[c * d1 + k] /= G.cube_mu[c];
                s[c * d1 + k] /= G.cube_mu[c];
            }
        auto osc = cube_oscillations(f, G, s);
        for (std::size_t cell = 0; cell < nc; ++cell) {
            const std::size_t c = G.cell_to_cube[cell];
            for (int k = 0; k < d1; ++k) {
                fine_max[cell * d1 + k] = std::max(fine_max[cell * d1 + k], sabs[c * d1 + k]);
                fine_sharp[cell * d1 + k] = std::max(fine_sharp[cell * d1 + k], osc[c * d1 + k]);
            }
        }
    }
    // G is now the root grid; every root cube lies inside the window.
    const LevelGrid root = G;
    std::vector<double> minfine_max(root.num_cubes * d1, std::numeric_limits<double>::infinity());
    std::vector<double> minfine_sharp = minfine_max;
    for (std::size_t cell = 0; cell < nc; ++cell) {
        const std::size_t r = root.cell_to_cube[cell];
        for (int k = 0; k < d1; ++k) {
            minfine_max[r * d1 + k] = std::min(minfine_max[r * d1 + k], fine_max[cell * d1 + k]);
            minfine_sharp[r * d1 + k] = std::min(minfine_sharp[r * d1 + k], fine_sharp[cell * d1 + k]);
        }
    }

    // reference size for the exterior tail cutoff
    double window_p = 0.0;
    if (p > 0.0) {
        double wm = 0.0, ws = 0.0;
        for (std::size_t cell = 0; cell < nc; ++cell)
            for (int k = 0; k < d1; ++k) {
                wm += f.cell_mass(cell) * std::pow(fine_max[cell * d1 + k], p);
                ws += f.cell_mass(cell) * std::pow(fine_sharp[cell * d1 + k], p);
            }
        window_p = ws > 0.0 ? std::min(wm, ws) : wm;
    }
    const double q = p > 1.0 ? std::pow(2.0, (d + 1) * (1.0 - p)) : 1.0;

    std::vector<CoarseLevel> levels;
    std::vector<double> rootmax_max(root.num_cubes * d1, 0.0), rootmax_sharp(root.num_cubes * d1, 0.0);
    std::vector<std::size_t> root_to_cur(root.num_cubes);
    for (std::size_t r = 0; r < root.num_cubes; ++r) root_to_cur[r] = r;
    LevelGrid prev = root;
    bool interior_done = false;
    int extra = 0;
    std::vector<double> frozen_min_max(d1, 0.0), frozen_min_sharp(d1, 0.0);
    const int max_levels = 400;
    for (int n = n_root - 1;; --n) {
        if (n_root - n > max_levels) throw std::runtime_error("dyadic sweep did not converge");
        LevelGrid C = make_level_grid(f, n);
        auto up = parent_map(prev, C);
        CoarseLevel L;
        auto sabs = cube_sums(f, C, true);
        auto s = cube_sums(f, C, false);
        L.term_max.resize(C.num_cubes * d1);
        for (std::size_t c = 0; c < C.num_cubes; ++c)
            for (int k = 0; k < d1; ++k) {
                L.term_max[c * d1 + k] = sabs[c * d1 + k] / C.cube_mu[c];
                s[c * d1 + k] /= C.cube_mu[c];
            }
        L.term_sharp = cube_oscillations(f, C, s);
        L.ext_mass = C.cube_mu;
        for (std::size_t c = 0; c < prev.num_cubes; ++c) L.ext_mass[up[c]] -= prev.cube_mu[c];
        for (auto& e : L.ext_mass) e = std::max(0.0, e);
        if (levels.empty()) levels.emplace_back();  // placeholder for the root->first map
        levels.back().to_parent = up;
        levels.push_back(std::move(L));
        const CoarseLevel& cur = levels.back();

        for (std::size_t r = 0; r < root.num_cubes; ++r) {
            root_to_cur[r] = up[root_to_cur[r]];
            const std::size_t c = root_to_cur[r];
            for (int k = 0; k < d1; ++k) {
                if (interior_done) {
                    if (cur.term_max[c * d1 + k] > frozen_min_max[k] * (1 + 1e-12) + 1e-300 ||
                        cur.term_sharp[c * d1 + k] > frozen_min_sharp[k] * (1 + 1e-12) + 1e-300)
                        throw std::logic_error("dyadic sweep: coarse level improved after the stop bound");
                }
                rootmax_max[r * d1 + k] = std::max(rootmax_max[r * d1 + k], cur.term_max[c * d1 + k]);
                rootmax_sharp[r * d1 + k] = std::max(rootmax_sharp[r * d1 + k], cur.term_sharp[c * d1 + k]);
            }
        }
        prev = std::move(C);

        double mu_min = std::numeric_limits<double>::infinity();
        for (double m : prev.cube_mu) mu_min = std::min(mu_min, m);
        if (!interior_done) {
            bool ok = true;
            for (int k = 0; k < d1 && ok; ++k) {
                double mm = std::numeric_limits<double>::infinity(), ms = mm;
                for (std::size_t r = 0; r < root.num_cubes; ++r) {
                    mm = std::min(mm, std::max(minfine_max[r * d1 + k], rootmax_max[r * d1 + k]));
                    ms = std::min(ms, std::max(minfine_sharp[r * d1 + k], rootmax_sharp[r * d1 + k]));
                }
                if (total[k] / mu_min > mm || 2.0 * total[k] / mu_min > ms) ok = false;
                frozen_min_max[k] = mm;
                frozen_min_sharp[k] = ms;
            }
            interior_done = ok;
        } else {
            ++extra;
        }
        bool exterior_done = true;
        if (p > 0.0) {
            double tail = 0.0;
            for (double m : prev.cube_mu)
                for (int k = 0; k < d1; ++k)
                    if (total[k] > 0.0) tail += std::pow(2.0 * total[k], p) * std::pow(m, 1.0 - p);
            const double rest = q < 1.0 ? tail * q / (1.0 - q) : std::numeric_limits<double>::infinity();
            exterior_done = rest <= 1e-15 * window_p || window_p == 0.0;
        }
        if (interior_done && extra >= 3 && exterior_done) {
            R.coarsest = n;
            break;
        }
    }

    // levels[0] is a placeholder holding the root->level(n_root-1) map; levels[j], j >= 1,
    // is level n_root - j. Propagate running sups from coarse to fine.
    const std::size_t nl = levels.size();
    std::vector<std::vector<double>> S_max(nl), S_sharp(nl);
    for (std::size_t j = nl - 1; j >= 1; --j) {
        const CoarseLevel& L = levels[j];
        S_max[j] = L.term_max;
        S_sharp[j] = L.term_sharp;
        if (j + 1 < nl) {
            for (std::size_t c = 0; c < L.ext_mass.size(); ++c) {
                const std::size_t pc = L.to_parent[c];
                for (int k = 0; k < d1; ++k) {
                    S_max[j][c * d1 + k] = std::max(S_max[j][c * d1 + k], S_max[j + 1][pc * d1 + k]);
                    S_sharp[j][c * d1 + k] = std::max(S_sharp[j][c * d1 + k], S_sharp[j + 1][pc * d1 + k]);
                }
            }
        }
        if (p > 0.0)
            for (std::size_t c = 0; c < L.ext_mass.size(); ++c)
                for (int k = 0; k < d1; ++k) {
                    R.ext_max_p += std::pow(S_max[j][c * d1 + k], p) * L.ext_mass[c];
                    R.ext_sharp_p += std::pow(S_sharp[j][c * d1 + k], p) * L.ext_mass[c];
                }
    }
    R.maximal = std::move(fine_max);
    R.sharp = std::move(fine_sharp);
    if (nl >= 2) {
        const auto& up = levels[0].to_parent;
        for (std::size_t cell = 0; cell < nc; ++cell) {
            const std::size_t pc = up[root.cell_to_cube[cell]];
            for (int k = 0; k < d1; ++k) {
                R.maximal[cell * d1 + k] = std::max(R.maximal[cell * d1 + k], S_max[1][pc * d1 + k]);
                R.sharp[cell * d1 + k] = std::max(R.sharp[cell * d1 + k], S_sharp[1][pc * d1 + k]);
            }
        }
    }
    return R;
}

CellField with_values(const CellField& like, std::vector<double> v) {
    CellField out(like.d1(), like.weight(), like.n_max(), like.window());
    std::copy(v.begin(), v.end(), out.values().begin());
    return out;
}

}  // namespace

CellField conditional_average(const CellField& f, int n) {
    if (n > f.n_max()) throw std::invalid_argument("conditional_average: n exceeds n_max");
    const LevelGrid G = make_level_grid(f, n);
    auto s = cube_sums(f, G, false);
    CellField out(f.d1(), f.weight(), f.n_max(), f.window());
    for (std::size_t cell = 0; cell < f.num_cells(); ++cell) {
        const std::size_t c = G.cell_to_cube[cell];
        for (int k = 0; k < f.d1(); ++k) out.value(cell, k) = s[c * f.d1() + k] / G.cube_mu[c];
    }
    return out;
}

StoppingTimeMap build_stopping_time(const CellField& g, double lambda) {
    if (g.d1() != 1) throw std::invalid_argument("build_stopping_time: scalar field required");
    if (!(lambda > 0.0)) throw std::invalid_argument("build_stopping_time: lambda must be positive");
    for (double v : g.values())
        if (v < 0.0) throw std::domain_error("build_stopping_time: g must be nonnegative");
    StoppingTimeMap T;
    T.n_max = g.n_max();
    T.window = g.window();
    T.n_floor = g.root_level();
    T.tau.assign(g.num_cells(), kNeverStopped);
    for (int n = T.n_floor; n <= g.n_max(); ++n) {
        const LevelGrid G = make_level_grid(g, n);
        auto s = cube_sums(g, G, false);
        for (std::size_t cell = 0; cell < g.num_cells(); ++cell) {
            if (T.tau[cell] != kNeverStopped) continue;
            const std::size_t c = G.cell_to_cube[cell];
            if (s[c] / G.cube_mu[c] > lambda) {
                T.tau[cell] = n;
                if (n == T.n_floor) T.truncated = true;
            }
        }
    }
    return T;
}

bool StoppingTimeMap::is_measurable(const CellField& grid) const {
    if (grid.window() != window || grid.n_max() != n_max || tau.size() != grid.num_cells()) return false;
    for (int n = n_floor; n <= n_max; ++n) {
        const LevelGrid G = make_level_grid(grid, n);
        std::vector<int> seen(G.num_cubes, 0);  // bit 1: some cell has tau == n, bit 2: some does not
        for (std::size_t cell = 0; cell < tau.size(); ++cell)
            seen[G.cell_to_cube[cell]] |= (tau[cell] == n) ? 1 : 2;
        for (int s : seen)
            if (s == 3) return false;
    }
    return true;
}

CellField stopped_field(const CellField& g, const StoppingTimeMap& tau) {
    if (g.window() != tau.window || g.n_max() != tau.n_max || tau.tau.size() != g.num_cells())
        throw std::invalid_argument("stopped_field: mismatched windows");
    CellField out = g;
    const int d1 = g.d1();
    int lo = kNeverStopped, hi = std::numeric_limits<int>::min();
    for (int t : tau.tau)
        if (t != kNeverStopped) {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
    for (int n = lo; lo != kNeverStopped && n <= hi; ++n) {
        const LevelGrid G = make_level_grid(g, n);
        auto s = cube_sums(g, G, false);
        for (std::size_t cell = 0; cell < g.num_cells(); ++cell) {
            if (tau.tau[cell] != n) continue;
            const std::size_t c = G.cell_to_cube[cell];
            for (int k = 0; k < d1; ++k) out.value(cell, k) = s[c * d1 + k] / G.cube_mu[c];
        }
    }
    return out;
}

CZDecomposition cz_decompose(const CellField& g, double lambda) {
    StoppingTimeMap tau = build_stopping_time(g, lambda);
    CellField eta = stopped_field(g, tau);
    CellField xi = g;
    for (std::size_t i = 0; i < xi.values().size(); ++i) xi.values()[i] -= eta.values()[i];
    return {std::move(xi), std::move(eta), std::move(tau)};
}

CellField dyadic_maximal(const CellField& f) { return with_values(f, sweep(f, 0.0).maximal); }

CellField dyadic_sharp(const CellField& f) { return with_values(f, sweep(f, 0.0).sharp); }

DyadicLpNorms dyadic_lp_norms(const CellField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("dyadic_lp_norms: p >= 1");
    SweepResult R = sweep(f, p);
    DyadicLpNorms N;
    double sf = 0.0, sm = 0.0, ss = 0.0;
    for (std::size_t cell = 0; cell < f.num_cells(); ++cell) {
        const double m = f.cell_mass(cell);
        for (int k = 0; k < f.d1(); ++k) {
            sf += m * std::pow(std::fabs(f.value(cell, k)), p);
            sm += m * std::pow(R.maximal[cell * f.d1() + k], p);
            ss += m * std::pow(R.sharp[cell * f.d1() + k], p);
        }
    }
    N.f = std::pow(sf, 1.0 / p);
    N.maximal_window = std::pow(sm, 1.0 / p);
    N.sharp_window = std::pow(ss, 1.0 / p);
    N.maximal = std::pow(sm + R.ext_max_p, 1.0 / p);
    N.sharp = std::pow(ss + R.ext_sharp_p, 1.0 / p);
    N.coarsest_level = R.coarsest;
    return N;
}

double support_measure(const CellField& f, double tol) {
    double s = 0.0;
    for (std::size_t cell = 0; cell < f.num_cells(); ++cell)
        for (int k = 0; k < f.d1(); ++k)
            if (std::fabs(f.value(cell, k)) > tol) {
                s += f.cell_mass(cell);
                break;
            }
    return s;
}

}  // namespace wlab
