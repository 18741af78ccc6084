/* Coupling potentials and their transforms. The Gaussian closed form is
 * What(rho) = A sigma^3 (2 pi)^{3/2} exp(-sigma^2 rho^2 / 2) under the
 * int f e^{-i x.xi} dx convention used by the field transforms. */

#include "polaron/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polaron {

namespace {
constexpr double two_pi_32 = 15.749609945722419;  // (2 pi)^{3/2}

double gauss(double r, double a, double s) { return a * std::exp(-r * r / (2.0 * s * s)); }
double gauss_ft(double rho, double a, double s) {
    return a * s * s * s * two_pi_32 * std::exp(-s * s * rho * rho / 2.0);
}

double tab_value(const PotentialSpec& p, double r) {
    if (p.radii.empty()) return 0.0;
    if (r <= p.radii.front()) return p.values.front();
    if (r >= p.radii.back()) return 0.0;
    auto it = std::upper_bound(p.radii.begin(), p.radii.end(), r);
    std::size_t i = std::size_t(it - p.radii.begin());
    double r0 = p.radii[i - 1], r1 = p.radii[i];
    double t = (r - r0) / (r1 - r0);
    return (1.0 - t) * p.values[i - 1] + t * p.values[i];
}

// What(rho) = 4 pi / rho * int_0^R W(r) r sin(rho r) dr, Simpson on a fine grid
double tab_fourier(const PotentialSpec& p, double rho) {
    if (p.radii.empty()) return 0.0;
    const double R = p.radii.back();
    const int n = 4001;
    const double dr = R / (n - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = i * dr;
        double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double f = tab_value(p, r);
        double kern = rho < 1e-12 ? r * r : r * std::sin(rho * r) / rho;
        acc += w * f * kern;
    }
    return 4.0 * FourierGrid3::pi * acc * dr / 3.0;
}
}  // namespace

double PotentialSpec::value(double r) const {
    switch (kind) {
        case Kind::Gaussian: return gauss(r, amplitude, width);
        case Kind::GaussianDiff:
            return gauss(r, amplitude, width) - gauss(r, amplitude2, width2);
        case Kind::TabulatedRadial: return tab_value(*this, r);
    }
    return 0.0;
}

double PotentialSpec::fourier_radial(double rho) const {
    switch (kind) {
        case Kind::Gaussian: return gauss_ft(rho, amplitude, width);
        case Kind::GaussianDiff:
            return gauss_ft(rho, amplitude, width) - gauss_ft(rho, amplitude2, width2);
        case Kind::TabulatedRadial: return tab_fourier(*this, rho);
    }
    return 0.0;
}

ComplexField eval_W(const PotentialSpec& spec, const GridPtr& grid) {
    double sig = std::max(spec.width, spec.kind == PotentialSpec::Kind::GaussianDiff
                                          ? spec.width2
                                          : spec.width);
    if (spec.kind == PotentialSpec::Kind::TabulatedRadial && !spec.radii.empty())
        sig = spec.radii.back() / 4.0;
    if (sig > grid->length() / 8.0)
        throw std::invalid_argument("eval_W: potential too wide for the box (sigma > L/8)");
    ComplexField out(grid, Representation::Physical);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cplx(spec.value(norm(grid->position(i))), 0.0);
    return out;
}

ComplexField spectral_W(const PotentialSpec& spec, const GridPtr& grid) {
    ComplexField out(grid, Representation::Spectral);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cplx(spec.fourier_radial(norm(grid->wavevector(i))), 0.0);
    return out;
}

double weighted_norm(const ComplexField& f, int N) {
    ComplexField phys = to_physical(f);
    const auto& g = *phys.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < phys.size(); ++i) {
        double r2 = dot(g.position(i), g.position(i));
        acc += std::pow(1.0 + r2, N) * std::norm(phys[i]);
    }
    return std::sqrt(acc * g.cell_volume());
}

HypothesisReport check_hypotheses(const PotentialSpec& spec, const Vec3& v,
                                  const GridPtr& grid) {
    HypothesisReport rep;
    rep.spherically_symmetric = true;  // all supported kinds are radial
    double mn = std::abs(spec.fourier_radial(0.0));
    for (std::size_t i = 0; i < grid->size(); ++i)
        mn = std::min(mn, std::abs(spec.fourier_radial(norm(grid->wavevector(i)))));
    rep.min_abs_fourier = mn;
    rep.fourier_nonvanishing = mn > 1e-12;
    rep.weighted_norm_w6 = weighted_norm(eval_W(spec, grid), 6);
    rep.weighted_norm_finite = std::isfinite(rep.weighted_norm_w6);
    rep.speed = norm(v);
    rep.subsonic = rep.speed < 1.0;
    rep.all_pass = rep.spherically_symmetric && rep.fourier_nonvanishing &&
                   rep.weighted_norm_finite && rep.subsonic;
    return rep;
}

}  // namespace polaron
