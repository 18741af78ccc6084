#pragma once

#include <functional>
#include <optional>
#include <string>

#include "polaron/field.hpp"

namespace polaron {

// dispersion symbols (normalized units unless mu passed explicitly)
inline double symbol_h(const Vec3& xi, double mu = 1.0) {
    double r2 = dot(xi, xi);
    return std::sqrt(r2 * (mu + r2));
}
inline double symbol_h_v(const Vec3& xi, const Vec3& v, double mu = 1.0) {
    return symbol_h(xi, mu) - dot(v, xi);
}
inline double symbol_u(const Vec3& xi, double mu = 1.0) {
    double r2 = dot(xi, xi);
    return r2 == 0.0 ? 0.0 : std::sqrt(r2 / (mu + r2));
}
inline double symbol_bracket(const Vec3& xi) { return std::sqrt(1.0 + dot(xi, xi)); }

// Fourier multiplier. origin_value == nullopt means the symbol is excluded at
// xi = 0 and the DC mode of the output is set to zero (mean-zero gauge).
struct SymbolFn {
    std::function<cplx(const Vec3&)> eval;
    std::optional<cplx> origin_value;
    std::optional<std::pair<double, double>> class_tag;  // claimed (a, b) for M_a^b
};

SymbolFn multiplier_identity();
SymbolFn multiplier_u_pow(double b);            // |xi|^b <xi>^-b, in M_b^0
SymbolFn multiplier_u_inv();                    // <xi>/|xi|, singular at 0
SymbolFn multiplier_hv_inv(const Vec3& v);      // 1/h_v, singular at 0
SymbolFn multiplier_exp_h(double t);            // e^{-i t h}
SymbolFn multiplier_S_v(const Vec3& v);         // 1/(<xi> - v.xihat), |v| = 1 intended
SymbolFn multiplier_translation(const Vec3& X); // e^{-i xi.X}

ComplexField apply_multiplier(const ComplexField& f, const SymbolFn& m);

// U_r u = U(Re u) + i Im u and its inverse; physical representation in and out.
// apply_Ur_inv zeroes the DC mode of the real part (U^-1 singular at xi = 0).
ComplexField apply_Ur(const ComplexField& f, double mu = 1.0);
ComplexField apply_Ur_inv(const ComplexField& f, double mu = 1.0);

struct SymbolClassReport {
    double c0 = 0.0;              // sup |f| / weight
    double c1 = 0.0;              // sup |radial derivative| / weight
    double c0_refined = 0.0;      // same on a 4x wider sample range
    double c1_refined = 0.0;
    bool pass = false;            // both constants finite and refinement-stable
    std::string note;
};

// samples |f| and its radial centered difference on log-spaced radii and a
// fixed direction set against the M_a^b weights (|alpha| <= 1)
SymbolClassReport verify_symbol_class(const std::function<cplx(const Vec3&)>& f,
                                      double a, double b);

}  // namespace polaron
