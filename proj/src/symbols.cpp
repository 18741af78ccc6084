/* Multiplier operators, the diagonalizing change of variables U_r, and the
 * numeric symbol-class checks of the M_a^b predicates. */

#include "polaron/symbols.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace polaron {

SymbolFn multiplier_identity() {
    return {[](const Vec3&) { return cplx(1.0, 0.0); }, cplx(1.0, 0.0), {}};
}

SymbolFn multiplier_u_pow(double b) {
    return {[b](const Vec3& xi) {
                double r = norm(xi);
                return cplx(std::pow(r / std::sqrt(1.0 + r * r), b), 0.0);
            },
            b > 0 ? std::optional<cplx>(cplx(0.0, 0.0)) : std::nullopt,
            std::make_pair(b, 0.0)};
}

SymbolFn multiplier_u_inv() {
    return {[](const Vec3& xi) {
                double r = norm(xi);
                return cplx(std::sqrt(1.0 + r * r) / r, 0.0);
            },
            std::nullopt,
            std::make_pair(-1.0, 0.0)};
}

SymbolFn multiplier_hv_inv(const Vec3& v) {
    return {[v](const Vec3& xi) { return cplx(1.0 / symbol_h_v(xi, v), 0.0); },
            std::nullopt,
            std::make_pair(-1.0, -2.0)};
}

SymbolFn multiplier_exp_h(double t) {
    return {[t](const Vec3& xi) {
                double h = symbol_h(xi);
                return cplx(std::cos(t * h), -std::sin(t * h));
            },
            cplx(1.0, 0.0),
            std::make_pair(0.0, 0.0)};
}

SymbolFn multiplier_S_v(const Vec3& v) {
    return {[v](const Vec3& xi) {
                double r = norm(xi);
                return cplx(1.0 / (std::sqrt(1.0 + r * r) - dot(v, xi) / r), 0.0);
            },
            std::nullopt, {}};
}

SymbolFn multiplier_translation(const Vec3& X) {
    return {[X](const Vec3& xi) {
                double p = dot(xi, X);
                return cplx(std::cos(p), -std::sin(p));
            },
            cplx(1.0, 0.0),
            std::make_pair(0.0, 0.0)};
}

ComplexField apply_multiplier(const ComplexField& f, const SymbolFn& m) {
    ComplexField out = to_spectral(f);
    const auto& g = *out.grid();
    const int n = g.n();
    const auto& xi = g.axis_wavenumbers();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                if (idx == 0) {
                    out[0] = m.origin_value ? *m.origin_value * out[0] : cplx(0.0, 0.0);
                    continue;
                }
                cplx mv = m.eval({xi[ix], xi[iy], xi[iz]});
                if (!std::isfinite(mv.real()) || !std::isfinite(mv.imag())) {
                    std::ostringstream os;
                    os << "apply_multiplier: symbol non-finite at xi=(" << xi[ix] << ","
                       << xi[iy] << "," << xi[iz] << ")";
                    throw std::runtime_error(os.str());
                }
                out[idx] *= mv;
            }
    return out;
}

ComplexField apply_Ur(const ComplexField& f, double mu) {
    ComplexField phys = to_physical(f);
    const auto& g = *phys.grid();
    std::vector<cplx> re(phys.size()), im(phys.size());
    for (std::size_t i = 0; i < phys.size(); ++i) {
        re[i] = phys[i].real();
        im[i] = phys[i].imag();
    }
    fft_forward(g, re);
    const int n = g.n();
    const auto& xi = g.axis_wavenumbers();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx)
                re[idx] *= symbol_u({xi[ix], xi[iy], xi[iz]}, mu);
    fft_backward(g, re);
    ComplexField out(phys.grid(), Representation::Physical);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cplx(re[i].real(), im[i].real());
    return out;
}

ComplexField apply_Ur_inv(const ComplexField& f, double mu) {
    ComplexField phys = to_physical(f);
    const auto& g = *phys.grid();
    std::vector<cplx> re(phys.size()), im(phys.size());
    for (std::size_t i = 0; i < phys.size(); ++i) {
        re[i] = phys[i].real();
        im[i] = phys[i].imag();
    }
    fft_forward(g, re);
    const int n = g.n();
    const auto& xi = g.axis_wavenumbers();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                if (idx == 0) {
                    re[0] = 0.0;  // mean-zero gauge
                    continue;
                }
                double u = symbol_u({xi[ix], xi[iy], xi[iz]}, mu);
                re[idx] /= u;
            }
    fft_backward(g, re);
    ComplexField out(phys.grid(), Representation::Physical);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cplx(re[i].real(), im[i].real());
    return out;
}

namespace {

const std::vector<Vec3>& direction_set() {
    static std::vector<Vec3> dirs = [] {
        std::vector<Vec3> d;
        for (int sx = -1; sx <= 1; ++sx)
            for (int sy = -1; sy <= 1; ++sy)
                for (int sz = -1; sz <= 1; ++sz) {
                    if (sx == 0 && sy == 0 && sz == 0) continue;
                    Vec3 v{double(sx), double(sy), double(sz)};
                    d.push_back(v / norm(v));
                }
        d.push_back(Vec3{0.36, 0.48, 0.8});  // one non-lattice direction
        return d;
    }();
    return dirs;
}

double weight_ab(double r, double a, double b) { return r <= 1.0 ? std::pow(r, a) : std::pow(r, b); }

void scan(const std::function<cplx(const Vec3&)>& f, double a, double b, double r_lo,
          double r_hi, int n_r, double& c0, double& c1) {
    c0 = 0.0;
    c1 = 0.0;
    for (int i = 0; i < n_r; ++i) {
        double r = r_lo * std::pow(r_hi / r_lo, double(i) / (n_r - 1));
        double dr = 1e-4 * r;
        for (const auto& th : direction_set()) {
            cplx v = f(th * r);
            cplx vp = f(th * (r + dr));
            cplx vm = f(th * (r - dr));
            double d1 = std::abs(vp - vm) / (2.0 * dr);
            c0 = std::max(c0, std::abs(v) / weight_ab(r, a, b));
            c1 = std::max(c1, d1 / weight_ab(r, a - 1.0, b - 1.0));
        }
    }
}

}  // namespace

SymbolClassReport verify_symbol_class(const std::function<cplx(const Vec3&)>& f,
                                      double a, double b) {
    SymbolClassReport rep;
    scan(f, a, b, 1e-2, 1e2, 49, rep.c0, rep.c1);
    scan(f, a, b, 1e-3, 1e3, 61, rep.c0_refined, rep.c1_refined);
    bool finite = std::isfinite(rep.c0_refined) && std::isfinite(rep.c1_refined);
    // membership failure shows as constants blowing up when the sample range widens
    bool stable = finite && rep.c0_refined <= 4.0 * rep.c0 + 1e-12 &&
                  rep.c1_refined <= 4.0 * rep.c1 + 1e-12;
    rep.pass = stable;
    if (!finite)
        rep.note = "non-finite samples";
    else if (!stable)
        rep.note = "constants grow under sample refinement";
    return rep;
}

}  // namespace polaron
