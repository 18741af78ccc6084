#pragma once

#include "polaron/fits.hpp"
#include "polaron/potential.hpp"

namespace polaron {

enum class Regime { Subsonic, Sonic, Supersonic };

// Inertial (traveling-wave) profile in diagonalized variables:
// Ghat = -What / h_v off the DC mode, gamma = U_r G.
struct WaveProfile {
    Vec3 v;
    Regime regime = Regime::Subsonic;
    ComplexField G;      // spectral
    ComplexField gamma;  // physical, complex
    double min_abs_hv = 0.0;  // over nonzero grid nodes (sonic near-resonance diagnostic)
    int excised_nodes = 0;    // nonzero nodes with |h_v| < 1e-12, zeroed
};

Regime classify_regime(const Vec3& v, double tol = 1e-12);

WaveProfile solve_profile(const Vec3& v, const PotentialSpec& spec, const GridPtr& grid);

// L2 norm of -i v.grad(gamma) + Lap(gamma) - Re gamma - W, DC mode excluded
double residual(const WaveProfile& p, const PotentialSpec& spec);

// F = int grad W^X(x) Re beta(x) dx, evaluated spectrally (exact on the torus)
Vec3 force_on_particle(const ComplexField& beta, const PotentialSpec& spec, const Vec3& X);
Vec3 force_on_particle(const ComplexField& beta, const ComplexField& What_spectral,
                       const Vec3& X);

struct SupersonicScan {
    std::vector<int> resolutions;
    std::vector<double> box_lengths;
    std::vector<double> norms;        // ||Re gamma_v||_L2 per grid
    std::vector<double> ratios;       // successive norm ratios
    double last_over_first = 0.0;
    std::vector<long> excluded_nodes; // within 1e-8 of the resonance surface
};

struct SupersonicScanOptions {
    double spacing = 1.0;        // box L = N * spacing per resolution
    double exclusion = 1e-8;     // |denominator| threshold
    // multiply What by the resonance factor (1 + |xi|^2 - (v.xihat)^2): the
    // non-generic potential class of Thm 1.1 whose transform vanishes on the
    // resonance surface
    bool resonance_vanishing_W = false;
};

// ||Re gamma_v||_L2 per resolution from Re gamma-hat = What / (1+|xi|^2-(v.xihat)^2)
SupersonicScan supersonic_scan(const Vec3& v, const PotentialSpec& spec,
                               const std::vector<int>& resolutions,
                               const SupersonicScanOptions& opt = {});

struct UniformBoundsReport {
    // sup-norm ratios ||op W||_Linf / ||W||_L2 at base and refined resolution
    double u_hv_inv = 0.0, u_hv_inv_refined = 0.0;
    double hv_inv = 0.0, hv_inv_refined = 0.0;
    double diff_ratio = 0.0, diff_ratio_refined = 0.0;  // / |v - v'|
    bool refinement_stable = false;                     // within +-10%
};

UniformBoundsReport check_uniform_bounds(const Vec3& v, const Vec3& vp,
                                         const PotentialSpec& spec, const GridPtr& grid);

}  // namespace polaron
