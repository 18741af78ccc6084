#pragma once

// Independent oracles used to freeze expected values: 1-D radial quadrature
// against closed-form transforms, and brute-force (FFT-free) mode sums.

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "polaron/field.hpp"
#include "polaron/grid.hpp"

namespace oracles {

using polaron::cplx;
using polaron::Vec3;

inline constexpr double pi = 3.14159265358979323846;

// composite Simpson on [a, b] with n intervals (n even)
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// closed-form transform of A e^{-|x|^2 / (2 sigma^2)}
inline double gaussian_fourier(double rho, double A, double sigma) {
    return A * sigma * sigma * sigma * std::pow(2.0 * pi, 1.5) *
           std::exp(-sigma * sigma * rho * rho / 2.0);
}

// || <r>^N A e^{-r^2/(2 sigma^2)} ||_L2 over R^3 by radial quadrature
inline double weighted_norm_radial(int N, double A, double sigma, double r_max = 30.0) {
    auto f = [&](double r) {
        double g = A * std::exp(-r * r / (2.0 * sigma * sigma));
        return std::pow(1.0 + r * r, N) * g * g * r * r;
    };
    return std::sqrt(4.0 * pi * simpson(f, 0.0, r_max, 60000));
}

// brute-force inverse mode sum: (1/L^3) sum_k m(xi_k) fhat(xi_k) e^{i xi_k . x}
// with the DC mode dropped when m is singular there (mean-zero gauge). FFT-free.
inline cplx mode_sum_inverse(const polaron::FourierGrid3& g,
                             const std::function<cplx(const Vec3&)>& m_times_fhat,
                             const Vec3& x, bool drop_dc = true) {
    cplx acc = 0.0;
    for (std::size_t i = drop_dc ? 1 : 0; i < g.size(); ++i) {
        Vec3 xi = g.wavevector(i);
        double ph = polaron::dot(xi, x);
        acc += m_times_fhat(xi) * cplx(std::cos(ph), std::sin(ph));
    }
    double L = g.length();
    return acc / (L * L * L);
}

// random band-limited field with spectral support in [lo, hi]
inline polaron::ComplexField random_band_limited(const polaron::GridPtr& grid, double lo,
                                                 double hi, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    polaron::ComplexField f(grid, polaron::Representation::Spectral);
    for (std::size_t i = 1; i < grid->size(); ++i) {
        double r = polaron::norm(grid->wavevector(i));
        if (r >= lo && r <= hi) f[i] = cplx(gauss(rng), gauss(rng));
    }
    return f;
}

}  // namespace oracles
