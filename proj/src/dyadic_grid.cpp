#include "wlab/dyadic_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wlab {

std::int64_t floor_shift(std::int64_t v, int s) {
    if (s < 0) throw std::invalid_argument("floor_shift: negative shift");
    if (s >= 63) return v < 0 ? -1 : 0;
    return v >> s;  // arithmetic shift is floor division in C++20
}

namespace {

std::int64_t floor_index(double v) {
    const double f = std::floor(v);
    if (!(std::fabs(f) < 9.0e18)) throw std::domain_error("cube index out of range");
    return static_cast<std::int64_t>(f);
}

double spatial_side(int n) { return std::ldexp(1.0, -n); }
double time_side(int n) { return std::ldexp(1.0, -2 * n); }

double x1_interval_weight(int n, std::int64_t i1, const WeightParams& w) {
    const double h = spatial_side(n);
    const double lo = static_cast<double>(i1) * h;
    return interval_weight(HalfLineInterval(lo, lo + h), w);
}

void check_cube(const ParabolicCube& c) {
    if (c.i.empty()) throw std::invalid_argument("cube needs d >= 1");
    if (c.i[0] < 0) throw std::domain_error("cube must lie in the closed half space (i1 >= 0)");
}

}  // namespace

ParabolicCube locate_cube(int n, double t, std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("locate_cube: empty point");
    if (x[0] < 0.0) throw std::domain_error("locate_cube: x1 must be nonnegative");
    ParabolicCube c;
    c.level = n;
    c.i0 = floor_index(std::ldexp(t, 2 * n));
    c.i.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) c.i[k] = floor_index(std::ldexp(x[k], n));
    return c;
}

ParabolicCube parent(const ParabolicCube& c) { return ancestor(c, c.level - 1); }

ParabolicCube ancestor(const ParabolicCube& c, int level) {
    if (level > c.level) throw std::invalid_argument("ancestor: level finer than cube");
    const int s = c.level - level;
    ParabolicCube a;
    a.level = level;
    a.i0 = floor_shift(c.i0, 2 * s);
    a.i.resize(c.i.size());
    for (std::size_t k = 0; k < c.i.size(); ++k) a.i[k] = floor_shift(c.i[k], s);
    return a;
}

bool contains(const ParabolicCube& outer, const ParabolicCube& inner) {
    if (outer.level > inner.level || outer.d() != inner.d()) return false;
    return ancestor(inner, outer.level) == outer;
}

double cube_measure(const ParabolicCube& c, const WeightParams& w) {
    check_cube(c);
    const int d = c.d();
    return time_side(c.level) * std::pow(spatial_side(c.level), d - 1) *
           x1_interval_weight(c.level, c.i[0], w);
}

double parent_ratio(const ParabolicCube& c, const WeightParams& w) {
    return cube_measure(parent(c), w) / cube_measure(c, w);
}

double cube_diameter(const ParabolicCube& c) {
    const double ht = time_side(c.level), h = spatial_side(c.level);
    return std::sqrt(ht * ht + c.d() * h * h);
}

SpatialCell locate_cell(int n, std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("locate_cell: empty point");
    if (x[0] < 0.0) throw std::domain_error("locate_cell: x1 must be nonnegative");
    SpatialCell c;
    c.level = n;
    c.i.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) c.i[k] = floor_index(std::ldexp(x[k], n));
    return c;
}

SpatialCell parent(const SpatialCell& c) {
    SpatialCell p;
    p.level = c.level - 1;
    p.i.resize(c.i.size());
    for (std::size_t k = 0; k < c.i.size(); ++k) p.i[k] = floor_shift(c.i[k], 1);
    return p;
}

double cell_measure(const SpatialCell& c, const WeightParams& w) {
    if (c.i.empty() || c.i[0] < 0) throw std::domain_error("cell must lie in the closed half space");
    return std::pow(spatial_side(c.level), c.d() - 1) * x1_interval_weight(c.level, c.i[0], w);
}

double parent_ratio(const SpatialCell& c, const WeightParams& w) {
    return cell_measure(parent(c), w) / cell_measure(c, w);
}

double parent_ratio_bound(double alpha, int d) {
    WeightParams w(alpha);  // validates alpha
    if (d < 1) throw std::invalid_argument("parent_ratio_bound: d >= 1");
    if (alpha >= 0.0) return std::pow(2.0, alpha + d + 2);
    const double q = std::pow(2.0, alpha + 1.0);
    const double f = std::max({3.0, 1.0 + q / (q - 1.0), 1.0 + std::pow(2.0, 1.0 - alpha)});
    return std::pow(2.0, d + 1) * f;
}

// ---------------------------------------------------------------- CellField

CellField::CellField(int d1, WeightParams w, int n_max, CellWindow window)
    : d1_(d1), weight_(w), n_max_(n_max), window_(std::move(window)) {
    const int d = window_.d();
    if (d < 1 || window_.hi.size() != window_.lo.size())
        throw std::invalid_argument("CellField: window bounds must have length d >= 1");
    if (d1_ < 1) throw std::invalid_argument("CellField: d1 >= 1");
    if (window_.lo[0] < 0) throw std::domain_error("CellField: window must lie in x1 >= 0");
    if (window_.t_hi <= window_.t_lo) throw std::invalid_argument("CellField: empty time range");
    shape_.push_back(window_.t_hi - window_.t_lo);
    for (int k = 0; k < d; ++k) {
        if (window_.hi[k] <= window_.lo[k]) throw std::invalid_argument("CellField: empty window");
        shape_.push_back(window_.hi[k] - window_.lo[k]);
    }
    stride_.assign(d + 1, 1);
    for (int a = d - 1; a >= 0; --a) stride_[a] = stride_[a + 1] * static_cast<std::size_t>(shape_[a + 1]);
    num_cells_ = stride_[0] * static_cast<std::size_t>(shape_[0]);
    if (num_cells_ > (std::size_t{1} << 31)) throw std::invalid_argument("CellField: window too large");

    // largest k with every bound divisible by 4^k in time and 2^k in space
    int k = 0;
    auto aligned = [&](int kk) {
        auto div = [](std::int64_t v, int s) { return floor_shift(v, s) * (std::int64_t{1} << s) == v; };
        if (!div(window_.t_lo, 2 * kk) || !div(window_.t_hi, 2 * kk)) return false;
        for (int a = 0; a < d; ++a)
            if (!div(window_.lo[a], kk) || !div(window_.hi[a], kk)) return false;
        return true;
    };
    while (k < 30 && aligned(k + 1)) ++k;
    root_level_ = n_max_ - k;

    const double h = spatial_side(n_max_);
    const double base = time_side(n_max_) * std::pow(h, d - 1);
    mass_by_i1_.resize(static_cast<std::size_t>(shape_[1]));
    for (std::int64_t j = 0; j < shape_[1]; ++j)
        mass_by_i1_[j] = base * x1_interval_weight(n_max_, window_.lo[0] + j, weight_);
    values_.assign(num_cells_ * d1_, 0.0);
}

void CellField::cell_indices(std::size_t cell, std::span<std::int64_t> out) const {
    const int d = window_.d();
    out[0] = window_.t_lo + static_cast<std::int64_t>(cell / stride_[0]);
    for (int a = 1; a <= d; ++a)
        out[a] = window_.lo[a - 1] + static_cast<std::int64_t>((cell / stride_[a]) % shape_[a]);
}

ParabolicCube CellField::cube(std::size_t cell) const {
    std::vector<std::int64_t> idx(window_.d() + 1);
    cell_indices(cell, idx);
    ParabolicCube c;
    c.level = n_max_;
    c.i0 = idx[0];
    c.i.assign(idx.begin() + 1, idx.end());
    return c;
}

std::size_t CellField::cell_of(std::int64_t i0, std::span<const std::int64_t> i) const {
    if (i0 < window_.t_lo || i0 >= window_.t_hi) return num_cells_;
    std::size_t cell = static_cast<std::size_t>(i0 - window_.t_lo) * stride_[0];
    for (int a = 0; a < window_.d(); ++a) {
        if (i[a] < window_.lo[a] || i[a] >= window_.hi[a]) return num_cells_;
        cell += static_cast<std::size_t>(i[a] - window_.lo[a]) * stride_[a + 1];
    }
    return cell;
}

double CellField::cell_mass(std::size_t cell) const {
    return mass_by_i1_[(cell / stride_[1]) % shape_[1]];
}

std::vector<double> CellField::integral() const {
    std::vector<double> s(d1_, 0.0);
    for (std::size_t c = 0; c < num_cells_; ++c) {
        const double m = cell_mass(c);
        for (int k = 0; k < d1_; ++k) s[k] += m * values_[c * d1_ + k];
    }
    return s;
}

bool CellField::same_grid(const CellField& o) const {
    return d1_ == o.d1_ && n_max_ == o.n_max_ && window_ == o.window_ && weight_.alpha() == o.weight_.alpha();
}

// ---------------------------------------------------------------- LevelGrid

ParabolicCube LevelGrid::cube(std::size_t c) const {
    const int axes = static_cast<int>(c_n.size());
    std::vector<std::int64_t> idx(axes);
    for (int a = axes - 1; a >= 0; --a) {
        idx[a] = c_lo[a] + static_cast<std::int64_t>(c % static_cast<std::size_t>(c_n[a]));
        c /= static_cast<std::size_t>(c_n[a]);
    }
    ParabolicCube q;
    q.level = level;
    q.i0 = idx[0];
    q.i.assign(idx.begin() + 1, idx.end());
    return q;
}

std::size_t LevelGrid::cube_index(const ParabolicCube& q) const {
    if (q.level != level || q.i.size() + 1 != c_n.size()) return num_cubes;
    std::size_t c = 0;
    for (std::size_t a = 0; a < c_n.size(); ++a) {
        const std::int64_t v = (a == 0 ? q.i0 : q.i[a - 1]) - c_lo[a];
        if (v < 0 || v >= c_n[a]) return num_cubes;
        c = c * static_cast<std::size_t>(c_n[a]) + static_cast<std::size_t>(v);
    }
    return c;
}

LevelGrid make_level_grid(const CellField& f, int n) {
    if (n > f.n_max()) throw std::invalid_argument("level finer than the field resolution");
    const int d = f.d();
    const int s = f.n_max() - n;
    const CellWindow& W = f.window();
    LevelGrid G;
    G.level = n;
    G.c_lo.resize(d + 1);
    G.c_n.resize(d + 1);
    std::vector<std::vector<std::uint32_t>> axis_map(d + 1);
    for (int a = 0; a <= d; ++a) {
        const int sh = a == 0 ? 2 * s : s;
        const std::int64_t lo = a == 0 ? W.t_lo : W.lo[a - 1];
        const std::int64_t hi = a == 0 ? W.t_hi : W.hi[a - 1];
        G.c_lo[a] = floor_shift(lo, sh);
        G.c_n[a] = floor_shift(hi - 1, sh) - G.c_lo[a] + 1;
        axis_map[a].resize(static_cast<std::size_t>(hi - lo));
        for (std::int64_t v = lo; v < hi; ++v)
            axis_map[a][v - lo] = static_cast<std::uint32_t>(floor_shift(v, sh) - G.c_lo[a]);
    }
    G.num_cubes = 1;
    for (auto c : G.c_n) G.num_cubes *= static_cast<std::size_t>(c);

    const auto& shape = f.shape();
    G.cell_to_cube.resize(f.num_cells());
    std::vector<std::int64_t> idx(d + 1, 0);
    for (std::size_t cell = 0; cell < f.num_cells(); ++cell) {
        std::size_t c = 0;
        for (int a = 0; a <= d; ++a) c = c * static_cast<std::size_t>(G.c_n[a]) + axis_map[a][idx[a]];
        G.cell_to_cube[cell] = static_cast<std::uint32_t>(c);
        for (int a = d; a >= 0; --a) {
            if (++idx[a] < shape[a]) break;
            idx[a] = 0;
        }
    }

    G.cube_mu.resize(G.num_cubes);
    const double base = time_side(n) * std::pow(spatial_side(n), d - 1);
    std::size_t inner = 1;
    for (int a = 2; a <= d; ++a) inner *= static_cast<std::size_t>(G.c_n[a]);
    for (std::size_t c = 0; c < G.num_cubes; ++c) {
        const std::int64_t i1 = G.c_lo[1] + static_cast<std::int64_t>((c / inner) % G.c_n[1]);
        G.cube_mu[c] = base * x1_interval_weight(n, i1, f.weight());
    }
    G.mass_in_window.assign(G.num_cubes, 0.0);
    for (std::size_t cell = 0; cell < f.num_cells(); ++cell) G.mass_in_window[G.cell_to_cube[cell]] += f.cell_mass(cell);
    return G;
}

}  // namespace wlab
