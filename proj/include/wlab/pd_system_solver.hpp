#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wlab/fields.hpp"
#include "wlab/weighted_sobolev.hpp"

namespace wlab {

// A^{ij}(t), i, j < d, each d1 x d1, piecewise constant in t.
struct SystemCoefficients {
    int d = 1;
    int d1 = 1;
    // piece q is used on [breakpoints[q-1], breakpoints[q]); breakpoints.size() == pieces.size() - 1
    std::vector<double> breakpoints;
    std::vector<std::vector<Eigen::MatrixXd>> pieces;  // pieces[q][i * d + j]
    double K = 0.0;

    static SystemCoefficients constant(int d, int d1, std::vector<Eigen::MatrixXd> A);
    // A^{ij} = delta^{ij} I
    static SystemCoefficients heat(int d, int d1);

    const std::vector<Eigen::MatrixXd>& at(double t) const;
    int piece_index(double t) const;
    // shapes, finiteness and |A^{ij}|_F <= K
    void validate() const;
};

struct EllipticityReport {
    double delta = 0.0;       // exact minimum of the form over unit xi
    double sample_min = 0.0;  // deterministic sample plus local refinement
    double K = 0.0;           // max Frobenius norm of the A^{ij}
};
// Minimum of sum_{ij} (xi^i)^T A^{ij} xi^j over |xi| = 1, xi in R^{d1 x d}; throws if not positive.
EllipticityReport validate_ellipticity(const SystemCoefficients& A, int samples = 2000);

enum class Scheme { ImplicitEuler, CrankNicolson };

struct SolverConfig {
    Scheme scheme = Scheme::ImplicitEuler;
    NormSpec norm;
};

// theta range in which the estimates are asserted
bool theta_admissible(int d, double p, double theta);

struct ParabolicData {
    std::optional<NodeField> u0;        // values at the first time node (default zero)
    std::optional<NodeField> boundary;  // Dirichlet values on the faces (default zero)
};

struct ParabolicSolution {
    NodeField u;
    double residual = 0.0;  // max |u_t - A u_xx - f| of the discrete scheme at interior nodes
    EllipticityReport ellipticity;
};

// u_t = A^{ij}(t) u_{x^i x^j} + f on the grid of f.
ParabolicSolution solve_parabolic(const SystemCoefficients& A, const NodeField& f, const SolverConfig& cfg,
                                  const ParabolicData& data = {});

struct EllipticSolution {
    NodeField u;
    double residual = 0.0;
    EllipticityReport ellipticity;
};

// A^{ij} u_{x^i x^j} = f on the grid of f (first time slice), A taken at t0.
EllipticSolution solve_elliptic(const SystemCoefficients& A, const NodeField& f, const SolverConfig& cfg,
                                const std::optional<NodeField>& boundary = std::nullopt);

// nodewise A^{ij}(t) D_ij u with central stencils (one-sided at faces)
NodeField apply_operator(const SystemCoefficients& A, const NodeField& u);
// max over interior nodes of |D_t u - A D_xx u| (second-order time differences)
double caloric_residual(const SystemCoefficients& A, const NodeField& u);

struct AprioriTerms {
    double inv_u = 0.0;  // ||M^{-1} u||
    double u_x = 0.0;    // ||u_x||
    double u_xx = 0.0;   // ||M u_xx||
    double u_t = 0.0;    // ||M u_t|| (parabolic only)
    double f = 0.0;      // ||M f||
    double ratio = 0.0;
};
// time-Lp aggregates over the trajectory; ratio = (inv_u + u_x + u_xx + u_t) / f, 0 when u = f = 0
AprioriTerms apriori_ratio_parabolic(const NodeField& u, const NodeField& f, const NormSpec& spec);
AprioriTerms apriori_ratio_elliptic(const NodeField& u, const NodeField& f, const NormSpec& spec);

// Q_{lambda r}(t0, a, x0') cap Omega in forward time: (t0 - (lambda r)^2, t0) x (max(a - lambda r, 0), a + lambda r) x ...
struct LocalBox {
    double t0 = 0.0;
    double a = 1.0;
    std::vector<double> x0prime;
    double r = 1.0;
    double lambda = 2.0;
};

struct LocalSolveOptions {
    int cells_per_r = 8;     // spatial step r / cells_per_r
    int steps_per_r2 = 64;   // time step r^2 / steps_per_r2
    int store_per_r2 = 16;   // stored time slices per r^2 (divides steps_per_r2)
    Scheme scheme = Scheme::ImplicitEuler;
    double corner_tolerance = 1e-6;
};

struct LocalSolveResult {
    NodeField u;                          // stored slices
    double corner_incompatibility = 0.0;  // max |g_t - A g_xx| at the bottom corner nodes
    bool compatible = true;
    double residual = 0.0;
};

// Caloric field u_t = A u_xx on the local box with Dirichlet data g on the parabolic boundary.
LocalSolveResult homogeneous_local_solve(const SystemCoefficients& A, const PointFunction& g, const LocalBox& box,
                                         const LocalSolveOptions& opt = {});

}  // namespace wlab
