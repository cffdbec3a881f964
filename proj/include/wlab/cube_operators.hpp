#pragma once

#include <vector>

#include "wlab/dyadic_grid.hpp"

namespace wlab {

// Axis-aligned box (t_lo, t_hi) x prod_k (lo_k, hi_k); its mass is taken over the part in x1 > 0.
struct SpaceTimeBox {
    double t_lo = 0.0, t_hi = 0.0;
    std::vector<double> lo, hi;

    int d() const { return static_cast<int>(lo.size()); }
};

// Q_r(t, x) = (t, t + r^2) x (x1 - r, x1 + r) x B'_r(x'), with B'_r the cube (-r, r)^{d-1} around x'.
struct ParabolicBox {
    double t = 0.0;
    double x1 = 0.0;
    std::vector<double> xprime;
    double r = 1.0;

    int d() const { return static_cast<int>(xprime.size()) + 1; }
    SpaceTimeBox extent() const;
    bool inside_half_space() const { return x1 - r >= 0.0; }
};

double box_mass(const SpaceTimeBox& Q, const WeightParams& w);
double box_mass(const ParabolicBox& Q, const WeightParams& w);

// Componentwise mu-average of f over Q cap Omega (f is zero outside its window).
std::vector<double> box_average(const CellField& f, const SpaceTimeBox& Q);
std::vector<double> box_average(const CellField& f, const ParabolicBox& Q);
// Componentwise mean oscillation over Q cap Omega.
std::vector<double> box_oscillation(const CellField& f, const SpaceTimeBox& Q);

// Radii 2^{-m} for m = m_fine down to m_coarse (m_fine <= n_max + 1).
std::vector<double> dyadic_ladder(int m_fine, int m_coarse);

// Sup of averages / mean oscillations over the declared family: boxes inside
// Omega with radius from the ladder, lower corner on the grid of spacing
// (max(r^2/4, h_t), max(r/2, h)), meeting the window.
CellField maximal_family(const CellField& f, const std::vector<double>& radii);
CellField sharp_family(const CellField& f, const std::vector<double>& radii);

struct FamilyValues {
    CellField maximal;
    CellField sharp;
};
FamilyValues family_operators(const CellField& f, const std::vector<double>& radii);

// Box of radius d/2^n with t* = i0/4^n, x* = ((i1 + d)/2^n, i_k/2^n); its closure contains c.
ParabolicBox comparison_box(const ParabolicCube& c);
bool closure_contains(const ParabolicBox& Q, const ParabolicCube& c);

// 3Q cap Omega: time tripled about its centre, radii tripled, clipped at x1 = 0.
struct ClippedBox {
    SpaceTimeBox box;
    double mass = 0.0;
    double ratio = 0.0;  // mass / mass(Q)
    bool clipped = false;
};
ClippedBox expand_clip(const ParabolicBox& Q, const WeightParams& w);

// 3^d (2 + 2^{alpha+1})
double expansion_bound(double alpha, int d);

}  // namespace wlab
