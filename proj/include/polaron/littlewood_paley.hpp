#pragma once

#include "polaron/field.hpp"

namespace polaron {

// C-infinity transition: 0 for t <= 0, 1 for t >= 1
double smooth_step(double t);
// radial bump psi(r) = chi(r) - chi(2r), supported on [1/2, 2]; the dyadic
// family psi_k(xi) = psi(2^-k |xi|) telescopes to 1 on xi != 0
double lp_bump(double r);

// smallest/largest dyadic band resolvable on the grid
// (2^{k-1} >= 2*pi/L and 2^{k+1} <= xi_max)
int lp_min_band(const FourierGrid3& g);
int lp_max_band(const FourierGrid3& g);

ComplexField lp_project(const ComplexField& f, int k);

}  // namespace polaron
