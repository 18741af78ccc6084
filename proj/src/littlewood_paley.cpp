#include "polaron/littlewood_paley.hpp"

#include <cmath>
#include <stdexcept>

namespace polaron {

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double g0 = std::exp(-1.0 / t);
    double g1 = std::exp(-1.0 / (1.0 - t));
    return g0 / (g0 + g1);
}

namespace {
// chi: 1 on [0,1], 0 on [2,inf), smooth in between
double chi(double r) { return 1.0 - smooth_step(r - 1.0); }
}  // namespace

double lp_bump(double r) { return chi(r) - chi(2.0 * r); }

int lp_min_band(const FourierGrid3& g) {
    return int(std::ceil(std::log2(g.xi_spacing()) + 1.0));
}

int lp_max_band(const FourierGrid3& g) {
    return int(std::floor(std::log2(g.xi_max()) - 1.0));
}

ComplexField lp_project(const ComplexField& f, int k) {
    const auto& g = *f.grid();
    if (k < lp_min_band(g) || k > lp_max_band(g))
        throw std::invalid_argument("lp_project: band not resolvable on this grid");
    const double scale = std::pow(2.0, -k);
    ComplexField out = to_spectral(f);
    const int n = g.n();
    const auto& xi = g.axis_wavenumbers();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                double r = std::sqrt(xi[ix] * xi[ix] + xi[iy] * xi[iy] + xi[iz] * xi[iz]);
                out[idx] *= lp_bump(scale * r);
            }
    return out;
}

}  // namespace polaron
