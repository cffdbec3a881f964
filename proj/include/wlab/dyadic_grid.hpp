#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "wlab/weighted_measure.hpp"

namespace wlab {

// Half-open parabolic cube [i0/4^n, (i0+1)/4^n) x prod_k [i_k/2^n, (i_k+1)/2^n).
struct ParabolicCube {
    int level = 0;
    std::int64_t i0 = 0;
    std::vector<std::int64_t> i;

    int d() const { return static_cast<int>(i.size()); }
    bool operator==(const ParabolicCube&) const = default;
};

struct SpatialCell {
    int level = 0;
    std::vector<std::int64_t> i;

    int d() const { return static_cast<int>(i.size()); }
    bool operator==(const SpatialCell&) const = default;
};

// floor(v / 2^s) for any s >= 0
std::int64_t floor_shift(std::int64_t v, int s);

ParabolicCube locate_cube(int n, double t, std::span<const double> x);
ParabolicCube parent(const ParabolicCube& c);
ParabolicCube ancestor(const ParabolicCube& c, int level);
bool contains(const ParabolicCube& outer, const ParabolicCube& inner);
double cube_measure(const ParabolicCube& c, const WeightParams& w);
double parent_ratio(const ParabolicCube& c, const WeightParams& w);
// Euclidean diameter in (t, x).
double cube_diameter(const ParabolicCube& c);

SpatialCell locate_cell(int n, std::span<const double> x);
SpatialCell parent(const SpatialCell& c);
double cell_measure(const SpatialCell& c, const WeightParams& w);
double parent_ratio(const SpatialCell& c, const WeightParams& w);

// Certified bound N0 on parent_ratio for the given (alpha, d).
double parent_ratio_bound(double alpha, int d);

// Box of base-level cells, half-open index bounds; lo[0] >= 0.
struct CellWindow {
    std::int64_t t_lo = 0, t_hi = 0;
    std::vector<std::int64_t> lo, hi;

    int d() const { return static_cast<int>(lo.size()); }
    bool operator==(const CellWindow&) const = default;
};

// Piecewise constant field on the level-n_max cells of a window, zero outside.
class CellField {
public:
    CellField(int d1, WeightParams w, int n_max, CellWindow window);

    int d() const { return window_.d(); }
    int d1() const { return d1_; }
    int n_max() const { return n_max_; }
    const WeightParams& weight() const { return weight_; }
    const CellWindow& window() const { return window_; }
    // Coarsest level whose cubes tile the window exactly.
    int root_level() const { return root_level_; }

    std::size_t num_cells() const { return num_cells_; }
    // extents, time first
    const std::vector<std::int64_t>& shape() const { return shape_; }

    double value(std::size_t cell, int comp) const { return values_[cell * d1_ + comp]; }
    double& value(std::size_t cell, int comp) { return values_[cell * d1_ + comp]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    // Absolute cube indices (time first) of a cell.
    void cell_indices(std::size_t cell, std::span<std::int64_t> out) const;
    ParabolicCube cube(std::size_t cell) const;
    // Returns num_cells() if the cube is outside the window.
    std::size_t cell_of(std::int64_t i0, std::span<const std::int64_t> i) const;
    double cell_mass(std::size_t cell) const;

    // sum over cells of mass * value, per component
    std::vector<double> integral() const;
    bool same_grid(const CellField& other) const;

private:
    int d1_;
    WeightParams weight_;
    int n_max_;
    CellWindow window_;
    int root_level_;
    std::vector<std::int64_t> shape_;
    std::vector<std::size_t> stride_;
    std::size_t num_cells_;
    std::vector<double> mass_by_i1_;
    std::vector<double> values_;
};

// Partition of the window by the level-n cubes that meet it.
struct LevelGrid {
    int level = 0;
    std::vector<std::int64_t> c_lo;  // lowest coarse index per axis, time first
    std::vector<std::int64_t> c_n;   // number of coarse cubes per axis
    std::size_t num_cubes = 0;
    std::vector<std::uint32_t> cell_to_cube;
    std::vector<double> cube_mu;         // full measure of each cube
    std::vector<double> mass_in_window;  // measure of cube cap window

    ParabolicCube cube(std::size_t c) const;
    std::size_t cube_index(const ParabolicCube& c) const;  // num_cubes if absent
};

LevelGrid make_level_grid(const CellField& f, int n);

constexpr int kNeverStopped = std::numeric_limits<int>::max();

struct StoppingTimeMap {
    int n_max = 0;
    CellWindow window;
    int n_floor = 0;
    bool truncated = false;
    std::vector<int> tau;  // per base cell, kNeverStopped for infinity

    bool is_measurable(const CellField& grid) const;
};

// f_{|n}
CellField conditional_average(const CellField& f, int n);
StoppingTimeMap build_stopping_time(const CellField& g, double lambda);
CellField stopped_field(const CellField& g, const StoppingTimeMap& tau);

struct CZDecomposition {
    CellField xi;
    CellField eta;
    StoppingTimeMap tau;
};
CZDecomposition cz_decompose(const CellField& g, double lambda);

CellField dyadic_maximal(const CellField& f);
CellField dyadic_sharp(const CellField& f);

// L_p(Omega, mu) norms, componentwise p-sums. The maximal and sharp norms
// include the exterior of the window, summed level by level.
struct DyadicLpNorms {
    double f = 0.0;
    double maximal = 0.0;
    double sharp = 0.0;
    double maximal_window = 0.0;
    double sharp_window = 0.0;
    int coarsest_level = 0;
};
DyadicLpNorms dyadic_lp_norms(const CellField& f, double p);

// mu of {cells with any nonzero component}
double support_measure(const CellField& f, double tol = 0.0);

}  // namespace wlab
