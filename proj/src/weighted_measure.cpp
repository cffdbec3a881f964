#include "wlab/weighted_measure.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace wlab {

WeightParams::WeightParams(double alpha) : alpha_(alpha) {
    if (!std::isfinite(alpha) || alpha <= -1.0)
        throw std::invalid_argument("weight exponent must satisfy alpha > -1, got " + std::to_string(alpha));
}

HalfLineInterval::HalfLineInterval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi))
        throw std::domain_error("interval must satisfy 0 <= lo < hi < inf");
}

double power_integral(double lo, double hi, double e) {
    if (!(lo >= 0.0) || !(hi >= lo)) throw std::domain_error("power_integral: need 0 <= lo <= hi");
    if (hi == lo) return 0.0;
    if (e == 0.0) return hi - lo;
    const double s = e + 1.0;
    if (lo == 0.0) {
        if (s <= 0.0) return std::numeric_limits<double>::infinity();
        return std::pow(hi, s) / s;
    }
    // lo^s * expm1(s log(hi/lo)) / s stays accurate for hi ~ lo and for s ~ 0.
    const double L = std::log1p((hi - lo) / lo);
    if (s == 0.0) return L;
    return std::pow(lo, s) * std::expm1(s * L) / s;
}

double phi(double x, const WeightParams& w) {
    if (!(x > 0.0)) throw std::domain_error("phi: x must be positive");
    return std::pow(x, w.exponent());
}

double interval_weight(const HalfLineInterval& I, const WeightParams& w) {
    return power_integral(I.lo, I.hi, w.alpha());
}

double box_measure_nu(const HalfLineInterval& I, double transverse_volume, const WeightParams& w) {
    if (!(transverse_volume >= 0.0)) throw std::domain_error("negative transverse volume");
    return interval_weight(I, w) * transverse_volume;
}

double box_measure_mu(double time_length, const HalfLineInterval& I, double transverse_volume,
                      const WeightParams& w) {
    if (!(time_length >= 0.0)) throw std::domain_error("negative time length");
    return time_length * box_measure_nu(I, transverse_volume, w);
}

double phi_ratio(double x, double r, const WeightParams& w) {
    if (!(x > 0.0) || !(r > 0.0)) throw std::domain_error("phi_ratio: need x > 0, r > 0");
    // the 1/(alpha+1) factors cancel
    return power_integral(x + r, x + 2.0 * r, w.alpha()) / power_integral(x, x + r, w.alpha());
}

}  // namespace wlab
