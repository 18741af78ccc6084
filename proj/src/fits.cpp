#include "polaron/fits.hpp"

#include <cmath>
#include <stdexcept>

namespace polaron {

DecayFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] > 0.0 && x[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    DecayFit fit;
    fit.count = lx.size();
    if (lx.size() < 2) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = double(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
    }
    double den = n * sxx - sx * sx;
    fit.exponent = (n * sxy - sx * sy) / den;
    double intercept = (sy - fit.exponent * sx) / n;
    fit.prefactor = std::exp(intercept);
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        double r = ly[i] - (intercept + fit.exponent * lx[i]);
        ss_res += r * r;
    }
    fit.goodness = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

DecayFit fit_spatial_decay(const ComplexField& f, double r_lo, double r_hi) {
    ComplexField phys = to_physical(f);
    const auto& g = *phys.grid();
    if (!(r_lo > 0.0) || !(r_hi > r_lo) || r_hi > 0.5 * g.length())
        throw std::invalid_argument("fit_spatial_decay: window must lie in (0, L/2)");
    const double dr = g.spacing();
    const int nsh = int((r_hi - r_lo) / dr) + 1;
    std::vector<double> shell_max(nsh, 0.0);
    for (std::size_t i = 0; i < phys.size(); ++i) {
        double r = norm(g.position(i));
        if (r < r_lo || r >= r_hi) continue;
        int s = int((r - r_lo) / dr);
        shell_max[s] = std::max(shell_max[s], std::abs(phys[i]));
    }
    std::vector<double> xs, ys;
    for (int s = 0; s < nsh; ++s) {
        if (shell_max[s] <= 0.0) continue;
        double r = r_lo + (s + 0.5) * dr;
        xs.push_back(std::sqrt(1.0 + r * r));  // <r>
        ys.push_back(shell_max[s]);
    }
    DecayFit fit = fit_loglog(xs, ys);
    fit.window_lo = r_lo;
    fit.window_hi = r_hi;
    return fit;
}

DecayFit fit_temporal_decay(std::span<const double> t, std::span<const double> value,
                            double t_lo, double t_hi) {
    if (t.size() != value.size()) throw std::invalid_argument("fit_temporal_decay: size mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        xs.push_back(1.0 + t[i]);
        ys.push_back(value[i]);
    }
    if (xs.size() < 8) throw std::invalid_argument("fit_temporal_decay: need >= 8 samples in window");
    DecayFit fit = fit_loglog(xs, ys);
    fit.window_lo = t_lo;
    fit.window_hi = t_hi;
    return fit;
}

}  // namespace polaron
