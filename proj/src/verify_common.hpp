#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "wlab/dyadic_grid.hpp"
#include "wlab/verify.hpp"

#ifndef WLAB_VERSION
#define WLAB_VERSION "0.0.0"
#endif

namespace wlab::verify::detail {

template <class T>
T get(const json& cfg, const char* key, T fallback) {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

inline std::uint64_t seed_of(const json& cfg, std::uint64_t fallback) { return get<std::uint64_t>(cfg, "seed", fallback); }

inline json environment(std::uint64_t seed, json resolutions) {
    return {{"seed", seed},
            {"resolutions", std::move(resolutions)},
            {"versions", {{"wlab", WLAB_VERSION}, {"compiler", __VERSION__}, {"cxx", __cplusplus}}}};
}

// Runs fn(i) for i < n on a few workers; callers write to slot i only, so results
// do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    for (auto& t : pool) t.join();
}

// Smooth test function on space-time: a few Gaussian bumps plus a coarse block pattern,
// so that resampling at a finer level describes the same function.
struct SmoothCorpusFunction {
    struct Bump {
        double amp, t, width_t;
        std::vector<double> x;
        double width;
    };
    std::vector<Bump> bumps;
    double block_amp = 0.0;
    bool nonneg = false;

    double operator()(double t, const std::vector<double>& x) const {
        double v = 0.0;
        for (const auto& b : bumps) {
            double s = (t - b.t) * (t - b.t) / (b.width_t * b.width_t);
            for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - b.x[k]) * (x[k] - b.x[k]) / (b.width * b.width);
            v += b.amp * std::exp(-s);
        }
        // constant on level-0 cubes
        std::int64_t parity = static_cast<std::int64_t>(std::floor(t));
        for (double xk : x) parity += static_cast<std::int64_t>(std::floor(xk));
        v += block_amp * ((parity % 2 + 2) % 2 == 0 ? 1.0 : 0.25);
        return nonneg ? std::fabs(v) : v;
    }
};

inline SmoothCorpusFunction random_smooth(std::mt19937_64& rng, const CellWindow& W, int n_max, bool nonneg) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    SmoothCorpusFunction F;
    F.nonneg = nonneg;
    const double ht = std::ldexp(1.0, -2 * n_max), h = std::ldexp(1.0, -n_max);
    const int nb = 1 + static_cast<int>(U(rng) * 4);
    for (int b = 0; b < nb; ++b) {
        SmoothCorpusFunction::Bump B;
        B.amp = (nonneg ? 1.0 : (U(rng) < 0.5 ? -1.0 : 1.0)) * (0.2 + 2.0 * U(rng));
        B.t = (W.t_lo + U(rng) * (W.t_hi - W.t_lo)) * ht;
        B.width_t = (0.05 + 0.5 * U(rng)) * (W.t_hi - W.t_lo) * ht;
        for (int k = 0; k < W.d(); ++k) B.x.push_back((W.lo[k] + U(rng) * (W.hi[k] - W.lo[k])) * h);
        B.width = (0.05 + 0.5 * U(rng)) * (W.hi[0] - W.lo[0]) * h;
        F.bumps.push_back(std::move(B));
    }
    F.block_amp = U(rng) < 0.5 ? 0.0 : 0.5 * U(rng);
    return F;
}

// Cell values = F at cell centres.
inline CellField sample_cells(const SmoothCorpusFunction& F, int d1, double alpha, int n_max, const CellWindow& W) {
    CellField f(d1, WeightParams(alpha), n_max, W);
    const double ht = std::ldexp(1.0, -2 * n_max), h = std::ldexp(1.0, -n_max);
    std::vector<std::int64_t> idx(W.d() + 1);
    std::vector<double> x(W.d());
    for (std::size_t c = 0; c < f.num_cells(); ++c) {
        f.cell_indices(c, idx);
        for (int k = 0; k < W.d(); ++k) x[k] = (static_cast<double>(idx[k + 1]) + 0.5) * h;
        const double t = (static_cast<double>(idx[0]) + 0.5) * ht;
        for (int comp = 0; comp < d1; ++comp) f.value(c, comp) = (comp + 1) * F(t, x);
    }
    return f;
}

// The same window expressed in level-n cells, given in level-n0 cells.
inline CellWindow refine_window(const CellWindow& W, int levels) {
    CellWindow R;
    R.t_lo = W.t_lo << (2 * levels);
    R.t_hi = W.t_hi << (2 * levels);
    for (int k = 0; k < W.d(); ++k) {
        R.lo.push_back(W.lo[k] << levels);
        R.hi.push_back(W.hi[k] << levels);
    }
    return R;
}

inline double max_of(const std::vector<double>& v) {
    double m = -INFINITY;
    for (double x : v) m = std::max(m, x);
    return m;
}

}  // namespace wlab::verify::detail
