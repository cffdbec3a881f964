#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "wlab/fields.hpp"

namespace wlab {

struct BatchSpec {
    std::uint64_t seed = 1;
    int n_paths = 1000;
    double step = 1e-3;
    double T_max = 20.0;
    int batches = 20;  // batch means for the standard error

    void validate() const;
};

// Independent generator for path `path` of a batch with `seed`.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);

// Samples of sigma_t x at the requested times (rounded to the step grid).
struct SigmaSamples {
    int d = 1;
    int n_paths = 0;
    std::vector<double> times;
    std::vector<double> x1;      // [path * nt + k]
    std::vector<double> xprime;  // [(path * nt + k) * (d - 1) + j]
    std::vector<double> xi;      // [path * nt + k]
    std::vector<double> eta;     // [(path * nt + k) * (d - 1) + j]
};

// (sigma_t x)^1 = e^{xi_t} x^1 with exact Gaussian increments of xi_t = sqrt2 w_t + 2t,
// (sigma_t x)' = x' + x^1 eta_t with eta by Euler-Maruyama on sqrt2 e^{xi_s} dw_s.
SigmaSamples simulate_sigma(std::span<const double> x, const BatchSpec& spec, std::vector<double> times);

// f with a support box in R^d_+ used to skip evaluations.
struct CompactFunction {
    std::function<double(std::span<const double>)> fn;
    std::vector<double> lo, hi;

    int d() const { return static_cast<int>(lo.size()); }
    bool in_support(std::span<const double> x) const;
    double sup_abs = 0.0;  // |f| bound for the tail budget
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    double tail_budget = 0.0;  // sup|f| e^{-T_max}
};

// E int_0^{T_max} f(sigma_t x) dt by the trapezoid rule on the step grid.
Estimate estimate_Ef(const CompactFunction& f, std::span<const double> x, const BatchSpec& spec);

struct EfGrid {
    NodeField mean;
    NodeField std_error;
    std::vector<NodeField> batch_means;
    double tail_budget = 0.0;
};

// Common random numbers: every node of `grid` reuses the same paths. Nodes outside `mask`
// (when given, one flag per spatial node) are left at zero.
EfGrid estimate_Ef_grid(const CompactFunction& f, const GridSpec& grid, const BatchSpec& spec,
                        const std::vector<char>* mask = nullptr);
// same paths for several f at once
std::vector<EfGrid> estimate_Ef_grid(const std::vector<CompactFunction>& fs, const GridSpec& grid, const BatchSpec& spec,
                                     const std::vector<char>* mask = nullptr);

// d = 1: exact value int g(z) f(x e^z) dz, g(z) = 1/2 for z >= 0 and e^{2z}/2 for z < 0
double exact_Ef_1d(const std::function<double(double)>& f, double lo, double hi, double x);
// d = 1: exact expectation of the discrete estimator (trapezoid in t, Gaussian law of xi_t) at each x,
// integrated in z on a grid of spacing dz
std::vector<double> trapezoid_Ef_1d(const std::function<double(double)>& f, double lo, double hi, std::span<const double> xs,
                                    double step, double T_max, double dz = 1e-3);

// Discrete L = M^2 Delta + 3 M D_1 with central stencils on interior rows (face rows are zero).
Eigen::SparseMatrix<double> assemble_L(const GridSpec& grid);
NodeField apply_L(const NodeField& u);
// the transpose of assemble_L applied to phi
NodeField apply_L_adjoint(const NodeField& phi);

struct WeakResidual {
    double value = 0.0;  // <Ef, L^T phi> + <f, phi>
    double std_error = 0.0;
};
// Lebesgue node sums h^d; MC error from the batch means of `Ef`.
std::vector<WeakResidual> weak_residual(const EfGrid& Ef, const NodeField& f, const std::vector<NodeField>& tests);
double weak_residual(const NodeField& Ef, const NodeField& f, const NodeField& phi);

struct Divergence {
    std::vector<NodeField> components;  // f^1 = -(M D_1 Ef + 2 Ef), f^j = -M D_j Ef
    NodeField reconstruction;           // M D_i f^i
    double reconstruction_error = 0.0;  // discrete Lp norm of M D_i f^i - f over nodes `inset` away from faces
    double reconstruction_std_error = 0.0;  // norm of the nodewise batch standard error of that residual
    double ratio = 0.0;                 // sum_i ||f^i||_p / ||f||_p on the same nodes
};
// Ef vanishes at x1 = 0 but not in the limit x1 -> 0+, and the composed stencils reach two nodes,
// so the default inset keeps that jump out of the error.
Divergence divergence_decomposition(const NodeField& Ef, const NodeField& f, double p = 2.0, int inset = 3);
Divergence divergence_decomposition(const EfGrid& Ef, const NodeField& f, double p = 2.0, int inset = 3);

}  // namespace wlab
