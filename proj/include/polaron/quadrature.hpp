#pragma once

#include <functional>
#include <vector>

#include "polaron/vec3.hpp"

namespace polaron {

// Continuum spherical quadrature over R^3, decoupled from the FFT box:
// composite Gauss-Legendre radial panels on (0, R_max] with geometric
// clustering toward 0, product rule on the sphere (Gauss-Legendre in the
// polar cosine x uniform azimuth).
struct SphericalQuadrature {
    struct Options {
        double r_max = 8.0;
        int radial_panels = 48;
        int points_per_panel = 16;
        double r_min = 1e-4;     // first panel boundary above 0
        int polar_nodes = 32;
        int azimuth_nodes = 12;
    };

    std::vector<double> r, wr;        // radial nodes / weights
    std::vector<Vec3> dir;            // unit directions
    std::vector<double> wdir;         // spherical weights (sum = 4 pi)
    Options options;

    static SphericalQuadrature build(const Options& opt = {});
    SphericalQuadrature refined() const;  // doubled node counts (convergence checks)

    std::size_t node_count() const { return r.size() * dir.size(); }

    // integral over R^3 of f(xi): sum wr r^2 wdir f(r * dir)
    double integrate(const std::function<double(const Vec3&)>& f) const;
    cplx integrate_complex(const std::function<cplx(const Vec3&)>& f) const;
};

struct QuadratureValidation {
    double worst_relative_error = 0.0;
    bool pass = false;  // radial-polynomial x angular degree <= 6 moments to 1e-8
};

QuadratureValidation validate(const SphericalQuadrature& q);

// Gauss-Legendre nodes/weights on [-1, 1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace polaron
