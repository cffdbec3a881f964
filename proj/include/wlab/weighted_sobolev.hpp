#pragma once

#include <vector>

#include "wlab/fields.hpp"

namespace wlab {

struct NormSpec {
    double p = 2.0;
    double theta = 1.0;
    int gamma = 0;
    int m_power = 0;

    void validate() const;
};

// (sum_k int |(x1)^m u^k|^p (x1)^{theta-d} dx)^{1/p} on time slice j. The weight is
// integrated exactly per cell and |.|^p is averaged over the cell corners.
double weighted_lp_norm(const NodeField& u, const NormSpec& spec, int time_index = 0);
// weighted_lp_norm for every time node
std::vector<double> weighted_lp_norm_series(const NodeField& u, const NormSpec& spec);
// (int_0^T g(t)^p dt)^{1/p} by the trapezoid rule on the field's time nodes
double time_lp(const std::vector<double>& g, double ht, double p);

double sobolev_norm_integer(const NodeField& u, const NormSpec& spec, int time_index = 0);

struct EquivTriple {
    double a = 0.0;  // ||M^{-1} w||
    double b = 0.0;  // ||w_x||
    double c = 0.0;  // ||M w_xx||
};
EquivTriple equiv_triple(const NodeField& w, const NormSpec& spec, int time_index = 0);
std::vector<EquivTriple> equiv_triple_series(const NodeField& w, const NormSpec& spec);

struct PoincareResult {
    double lhs = 0.0;
    double bound = 0.0;
    double gradient_integral = 0.0;  // int |u_x|^p dnu
    double nu_D = 0.0;
};
// u must live on D_r(a) = (a - r, a + r) x (-r, r)^{d-1}, first time slice used.
PoincareResult poincare_check(const NodeField& u, double r, double a, double p, double alpha);
// grid covering D_r(a) with `cells` cells per axis
GridSpec poincare_grid(int d, int d1, double r, double a, int cells);

class Bump {
public:
    Bump(double a, double r, double alpha);
    double operator()(double x) const;
    double derivative(double x) const;
    double a() const { return a_; }
    double r() const { return r_; }
    // sup zeta * nu(B_r(a)) and sup |zeta'| * nu(B_r(a)) * r
    double sup_constant() const { return c0_; }
    double derivative_constant() const { return c1_; }

private:
    double a_, r_, alpha_;
    double c0_ = 0.0, c1_ = 0.0;
};

// normalised exponential bump on (-1/2, 1/2) and its derivative
double mollifier(double s);
double mollifier_derivative(double s);

struct BumpCalibration {
    double alpha;
    double sup_constant;
    double derivative_constant;
};
// sweep over rho = r/a in (0, 1], frozen per alpha with a 1e-3 margin
BumpCalibration bump_calibration(double alpha);

Bump bump_zeta(double a, double r, double alpha);

struct HolderQuotients {
    double space = 0.0;
    double time = 0.0;
};
HolderQuotients holder_quotients(const NodeField& traj, double kappa, double p);

}  // namespace wlab
