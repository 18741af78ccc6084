#pragma once

#include <memory>

#include "polaron/dynamics.hpp"
#include "polaron/fits.hpp"
#include "polaron/potential.hpp"
#include "polaron/quadrature.hpp"

namespace polaron {

// Memory matrix M(t): M_ij(t) = int u(xi) xi_i xi_j h_v^{-2} |What|^2
// sin(t h_v(xi)) dxi / (2 pi)^3 for t >= 0, zero for t < 0. Sampled on a
// uniform grid by continuum spherical quadrature (not the FFT box).
struct MemoryKernel {
    double dt = 0.05;
    std::vector<Mat3> samples;  // t_k = k dt, k = 0..K_max
    Vec3 v0{};
    PotentialSpec spec;
    std::shared_ptr<const SphericalQuadrature> quad;
    bool oscillation_warning = false;  // radial node density vs phase rate at t_max

    double t_max() const { return dt * double(samples.size() - 1); }
    Mat3 at(double t) const;  // linear interpolation, 0 for t < 0
};

MemoryKernel compute_M(const Vec3& v0, const PotentialSpec& spec, double dt, int k_max,
                       std::shared_ptr<const SphericalQuadrature> quad);

struct FourierMResult {
    Mat3c path_a;       // discrete half-line transform of the samples
    Mat3c path_b;       // closed-form resolvent quadrature
    double discrepancy; // relative, max-entry
    bool resolution_failure;  // discrepancy > 1e-3
};

// Mhat(z) at z = omega - i y, y >= 0 (closed lower half-plane). Path B uses
// the principal-value + residue boundary form when y is small.
FourierMResult fourier_M(const MemoryKernel& kern, double omega, double y);
Mat3c fourier_M_path_a(const MemoryKernel& kern, double omega, double y);
Mat3c fourier_M_path_b(const MemoryKernel& kern, double omega, double y);

struct InvertibilityRecord {
    double omega = 0.0;
    std::array<double, 3> herm_eigs{};     // eigenvalues of Re-part of 1 + Mhat
    std::array<double, 3> imag_eigs{};     // eigenvalues of Im Mhat
    double abs_det = 0.0;                  // |det(1 + Mhat)|
    bool sign_ok = false;                  // Lemma 5.4 sign pattern at this omega
};

struct InvertibilityReport {
    std::vector<InvertibilityRecord> records;
    double min_abs_det = 0.0;
    bool mhat0_positive_definite = false;
    bool all_signs_ok = false;
};

InvertibilityReport check_invertibility(const MemoryKernel& kern,
                                        const std::vector<double>& omegas);

enum class ResolventDerivation { FourierInversion, VolterraResolvent };

// Resolvent kernel K with Khat = (1 + Mhat)^{-1} - 1, so vdot = r + K * r.
struct ResolventKernel {
    double dt = 0.05;
    std::vector<Mat3> samples;
    ResolventDerivation derivation = ResolventDerivation::FourierInversion;
    double causality_residual = 0.0;   // max |K| on negative-time probes / peak
    double peak = 0.0;
    double series_discrepancy = 0.0;   // vs the truncated Neumann series, relative
};

struct ResolventOptions {
    double omega_max = 48.0;   // grid must reach |Mhat| < 1e-3 at the ends
    double alias_period = 160.0;  // 2 pi / d_omega
    int neumann_terms = 24;
};

ResolventKernel compute_K(const MemoryKernel& kern, const ResolventOptions& opt = {});

// forward-substitution trapezoidal solve of vdot(t) = r(t) - int_0^t M(t-s) vdot(s) ds
std::vector<Vec3> solve_volterra(const MemoryKernel& kern, const std::vector<Vec3>& r);
// vdot = r + K * r (trapezoidal convolution)
std::vector<Vec3> apply_resolvent(const ResolventKernel& K, const std::vector<Vec3>& r,
                                  double dt);

// r0(t) = Re< grad W^{X_t}, U e^{-iHt} D0 >, evaluated spectrally on the box
Vec3 compute_r0(double t, const ComplexField& D0_spectral, const ComplexField& What_spectral,
                const Vec3& X_t);

struct R12Sample {
    double t = 0.0;
    Vec3 r1{}, r2{};
    double step_halving_error = 0.0;  // relative, max of both terms
};

// nested-history integrals r1, r2 of the Volterra remainder along a recorded
// trajectory (spot-check diagnostics; <= 5 sample times)
std::vector<R12Sample> compute_r12(const Trajectory& traj, const ComplexField& What_spectral,
                                   const GridPtr& grid, const Vec3& v0,
                                   const std::vector<double>& sample_times);

// I(t) = int e^{-i t h_v} |xi|^l m(xi) fhat conj(ghat) dxi by spherical
// quadrature, log-log fitted over the given times
struct OscillatoryResult {
    std::vector<double> t;
    std::vector<double> magnitude;
    DecayFit fit;
    bool oscillation_warning = false;
};

OscillatoryResult oscillatory_decay(int l, const std::function<double(const Vec3&)>& m,
                                    const Vec3& v, const PotentialSpec& f,
                                    const PotentialSpec& g, const std::vector<double>& t_grid,
                                    const SphericalQuadrature& quad);

// Prop-B.4 even-symbol mode: Im< d_3 f, U e^{-i t H_v} H_v^{-2} d_3 f >
OscillatoryResult even_oscillatory_decay(const Vec3& v, const PotentialSpec& f,
                                         const std::vector<double>& t_grid,
                                         const SphericalQuadrature& quad);

// || P_k H^{-sigma} e^{-itH} f ||_Linf on the box over t_grid, compensated by
// t^{3/2 - sigma}; the fit slope of the compensated series should hug zero
struct DispersiveResult {
    std::vector<double> t;
    std::vector<double> sup_norm;
    std::vector<double> compensated;
    DecayFit compensated_fit;  // log compensated vs log t
    double spread = 0.0;       // max compensated / median compensated
};

DispersiveResult dispersive_decay(const ComplexField& f, int band, double sigma,
                                  const std::vector<double>& t_grid);

}  // namespace polaron
