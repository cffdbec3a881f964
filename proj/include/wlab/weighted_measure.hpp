#pragma once

#include <cmath>

namespace wlab {

// Power weight (x^1)^alpha on the half line, alpha > -1.
class WeightParams {
public:
    explicit WeightParams(double alpha);
    double alpha() const { return alpha_; }
    double exponent() const { return alpha_ + 1.0; }

private:
    double alpha_;
};

struct HalfLineInterval {
    double lo;
    double hi;
    HalfLineInterval(double lo_, double hi_);
    double length() const { return hi - lo; }
};

// int_lo^hi x^e dx for 0 <= lo <= hi; lo must be > 0 when e <= -1.
double power_integral(double lo, double hi, double e);

// phi(x) = x^{alpha+1}, x > 0
double phi(double x, const WeightParams& w);

// nu_alpha(I) = int_I x^alpha dx
double interval_weight(const HalfLineInterval& I, const WeightParams& w);

double box_measure_nu(const HalfLineInterval& I, double transverse_volume, const WeightParams& w);
double box_measure_mu(double time_length, const HalfLineInterval& I, double transverse_volume,
                      const WeightParams& w);

// (phi(x+2r) - phi(x+r)) / (phi(x+r) - phi(x)), bounded by 2^{alpha+1}.
double phi_ratio(double x, double r, const WeightParams& w);

}  // namespace wlab
