#pragma once

#include <string>
#include <vector>

#include "polaron/field.hpp"

namespace polaron {

// Coupling potential W. All kinds are spherically symmetric; Gaussian kinds
// have closed-form transforms, the tabulated kind falls back to a radial
// sine-transform quadrature.
struct PotentialSpec {
    enum class Kind { Gaussian, GaussianDiff, TabulatedRadial };
    Kind kind = Kind::Gaussian;
    double amplitude = 1.0;
    double width = 1.0;
    double amplitude2 = 0.0;  // GaussianDiff second component
    double width2 = 1.0;
    std::vector<double> radii, values;  // TabulatedRadial samples (ascending radii)

    double value(double r) const;            // W(|x| = r)
    double fourier_radial(double rho) const; // What(|xi| = rho), real
    bool has_closed_form() const { return kind != Kind::TabulatedRadial; }
};

// physical samples W(|y|) on the centered box; rejects sigma > L/8
ComplexField eval_W(const PotentialSpec& spec, const GridPtr& grid);
// spectral field filled from the closed-form (or quadrature) transform
ComplexField spectral_W(const PotentialSpec& spec, const GridPtr& grid);

// discrete ||<y>^N f||_L2 with y the centered (minimal-image) coordinate
double weighted_norm(const ComplexField& f, int N);

struct HypothesisReport {
    bool spherically_symmetric = false;
    double min_abs_fourier = 0.0;    // min |What| over grid nodes
    bool fourier_nonvanishing = false;
    double weighted_norm_w6 = 0.0;   // ||<y>^6 W||_L2
    bool weighted_norm_finite = false;
    double speed = 0.0;
    bool subsonic = false;
    bool all_pass = false;
};

HypothesisReport check_hypotheses(const PotentialSpec& spec, const Vec3& v,
                                  const GridPtr& grid);

}  // namespace polaron
