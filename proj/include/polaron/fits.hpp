#pragma once

#include <span>
#include <vector>

#include "polaron/field.hpp"

namespace polaron {

struct DecayFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double goodness = 0.0;  // coefficient of determination of the log-log fit
    double window_lo = 0.0, window_hi = 0.0;
    std::size_t count = 0;
    bool reliable() const { return goodness >= 0.9; }
};

// least squares of log y against log x over (x, y), y > 0 entries only
DecayFit fit_loglog(std::span<const double> x, std::span<const double> y);

// shell-max |f| against log<r> over radial shells in [r_lo, r_hi]
DecayFit fit_spatial_decay(const ComplexField& f, double r_lo, double r_hi);

// log value against log(1 + t) over samples with t in [t_lo, t_hi]
DecayFit fit_temporal_decay(std::span<const double> t, std::span<const double> value,
                            double t_lo, double t_hi);

}  // namespace polaron
