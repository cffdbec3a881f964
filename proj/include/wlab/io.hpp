#pragma once
#include <iosfwd>
#include <string>
#include <vector>

#include "wlab/dyadic_grid.hpp"
#include "wlab/fields.hpp"
#include "wlab/kernel_rep.hpp"
#include "wlab/pd_system_solver.hpp"
#include "wlab/report.hpp"

namespace wlab::io {

// One JSON header line {d, d1, alpha, n_max, window}, then rows "i0,i1,...,id,v1,...,vd1".
void write_cellfield(std::ostream& os, const CellField& f);
CellField read_cellfield(std::istream& is);

// One JSON header line {d, d1, steps, domain, T}, then rows "j,i1,...,id,v1,...,vd1".
void write_nodefield(std::ostream& os, const NodeField& u);
NodeField read_nodefield(std::istream& is);

// Point forcing: sum of amplitude[k] * bump(|x - center| / width) * (1 + t) per component.
struct ForcingSpec {
    std::vector<double> center;
    double width = 0.4;
    std::vector<double> amplitude;
};

struct SolveConfig {
    SystemCoefficients A;
    GridSpec grid;
    SolverConfig solver;
    ForcingSpec forcing;
};

// Flat JSON: d1, L, transverse, cells, T, time_steps, scheme, p, theta, A (d x d nested
// d1 x d1 arrays) or pieces + breakpoints, forcing {center, width, amplitude}.
SolveConfig parse_solve_config(const json& j, bool parabolic);
NodeField sample_forcing(const ForcingSpec& F, const GridSpec& g);

BatchSpec parse_batch_spec(const json& j);
// columns x, estimate, stderr, tail_budget
void write_estimates_csv(std::ostream& os, const std::vector<double>& x, const std::vector<Estimate>& est);

}  // namespace wlab::io
