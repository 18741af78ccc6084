/* Traveling-wave construction and its verification: the spectral solve
 * h_v Ghat = -What, the Eq-residual, the self-force, decay fits and the
 * supersonic divergence scan. */

#include "polaron/traveling_wave.hpp"

#include <cmath>
#include <stdexcept>

#include "polaron/symbols.hpp"

namespace polaron {

Regime classify_regime(const Vec3& v, double tol) {
    double s = norm(v);
    if (s < 1.0 - tol) return Regime::Subsonic;
    if (s <= 1.0 + tol) return Regime::Sonic;
    return Regime::Supersonic;
}

WaveProfile solve_profile(const Vec3& v, const PotentialSpec& spec, const GridPtr& grid) {
    Regime reg = classify_regime(v);
    if (reg == Regime::Supersonic)
        throw std::invalid_argument("solve_profile: |v| > 1; use supersonic_scan");

    ComplexField G(grid, Representation::Spectral);
    double min_hv = std::numeric_limits<double>::infinity();
    int excised = 0;
    for (std::size_t i = 1; i < grid->size(); ++i) {
        Vec3 xi = grid->wavevector(i);
        double hv = symbol_h_v(xi, v);
        min_hv = std::min(min_hv, std::abs(hv));
        if (std::abs(hv) < 1e-12) {
            ++excised;
            G[i] = 0.0;
            continue;
        }
        G[i] = cplx(-spec.fourier_radial(norm(xi)) / hv, 0.0);
    }
    G[0] = 0.0;  // DC gauge: h_v(0) = 0 always

    WaveProfile p{v, reg, G, apply_Ur(G), min_hv, excised};
    return p;
}

double residual(const WaveProfile& p, const PotentialSpec& spec) {
    const GridPtr& grid = p.gamma.grid();
    // -i v.grad gamma + Lap gamma - Re gamma - W, assembled spectrally; the
    // R-linear Re is handled by splitting gamma into real/imaginary parts
    ComplexField gam_hat = to_spectral(p.gamma);
    std::vector<cplx> re(grid->size()), im(grid->size());
    {
        ComplexField phys = to_physical(gam_hat);
        for (std::size_t i = 0; i < phys.size(); ++i) {
            re[i] = phys[i].real();
            im[i] = phys[i].imag();
        }
    }
    fft_forward(*grid, re);
    fft_forward(*grid, im);

    double acc = 0.0;
    const double w = grid->mode_weight();
    for (std::size_t i = 1; i < grid->size(); ++i) {
        Vec3 xi = grid->wavevector(i);
        double xi2 = dot(xi, xi);
        cplx gam = re[i] + cplx(0, 1) * im[i];
        // (-i v.grad)^ = v.xi ; Lap^ = -xi^2
        cplx lhs = dot(p.v, xi) * gam;
        cplx rhs = xi2 * gam + re[i] + cplx(spec.fourier_radial(std::sqrt(xi2)), 0.0);
        acc += std::norm(lhs - rhs);
    }
    return std::sqrt(acc * w);
}

Vec3 force_on_particle(const ComplexField& beta, const ComplexField& What_spectral,
                       const Vec3& X) {
    const GridPtr& grid = beta.grid();
    ComplexField phys = to_physical(beta);
    std::vector<cplx> re(grid->size());
    for (std::size_t i = 0; i < phys.size(); ++i) re[i] = phys[i].real();
    fft_forward(*grid, re);

    Vec3 F{};
    const double w = grid->mode_weight();
    for (std::size_t i = 1; i < grid->size(); ++i) {
        Vec3 xi = grid->wavevector(i);
        double ph = -dot(xi, X);
        cplx wphase = What_spectral[i] * cplx(std::cos(ph), std::sin(ph));
        cplx val = cplx(0, 1) * wphase * std::conj(re[i]);
        F.x += xi.x * val.real();
        F.y += xi.y * val.real();
        F.z += xi.z * val.real();
    }
    return F * w;
}

Vec3 force_on_particle(const ComplexField& beta, const PotentialSpec& spec, const Vec3& X) {
    return force_on_particle(beta, spectral_W(spec, beta.grid()), X);
}

SupersonicScan supersonic_scan(const Vec3& v, const PotentialSpec& spec,
                               const std::vector<int>& resolutions,
                               const SupersonicScanOptions& opt) {
    if (!(norm(v) > 1.0)) throw std::invalid_argument("supersonic_scan: |v| must exceed 1");
    SupersonicScan scan;
    scan.resolutions = resolutions;
    for (int n : resolutions) {
        double L = n * opt.spacing;
        FourierGrid3 g(n, L);
        double acc = 0.0;
        long excluded = 0;
        for (std::size_t i = 1; i < g.size(); ++i) {
            Vec3 xi = g.wavevector(i);
            double r2 = dot(xi, xi);
            double ct = dot(v, xi) / std::sqrt(r2);
            double den = 1.0 + r2 - ct * ct;
            double wz = spec.fourier_radial(std::sqrt(r2));
            if (opt.resonance_vanishing_W) wz *= den;
            if (std::abs(den) < opt.exclusion) {
                ++excluded;
                continue;
            }
            double val = wz / den;
            acc += val * val;
        }
        scan.box_lengths.push_back(L);
        scan.norms.push_back(std::sqrt(acc / (L * L * L)));
        scan.excluded_nodes.push_back(excluded);
    }
    for (std::size_t i = 1; i < scan.norms.size(); ++i)
        scan.ratios.push_back(scan.norms[i] / scan.norms[i - 1]);
    if (!scan.norms.empty()) scan.last_over_first = scan.norms.back() / scan.norms.front();
    return scan;
}

namespace {
// sup |op W| / ||W||_L2 for the three Lemma-5.5 operators on one grid
void lemma55_ratios(const Vec3& v, const Vec3& vp, const PotentialSpec& spec,
                    const GridPtr& grid, double& r_u_hv, double& r_hv, double& r_diff) {
    ComplexField What = spectral_W(spec, grid);
    double wl2 = What.l2_norm();
    ComplexField uhw = to_physical(apply_multiplier(
        What, {[v](const Vec3& xi) { return cplx(symbol_u(xi) / symbol_h_v(xi, v), 0.0); },
               std::nullopt, {}}));
    ComplexField hw = to_physical(apply_multiplier(
        What, {[v](const Vec3& xi) { return cplx(1.0 / symbol_h_v(xi, v), 0.0); },
               std::nullopt, {}}));
    ComplexField dw = to_physical(apply_multiplier(
        What,
        {[v, vp](const Vec3& xi) {
             return cplx(1.0 / symbol_h_v(xi, v) - 1.0 / symbol_h_v(xi, vp), 0.0);
         },
         std::nullopt, {}}));
    r_u_hv = uhw.max_abs() / wl2;
    r_hv = hw.max_abs() / wl2;
    double dv = norm(v - vp);
    r_diff = dv == 0.0 ? 0.0 : dw.max_abs() / (dv * wl2);
}
}  // namespace

UniformBoundsReport check_uniform_bounds(const Vec3& v, const Vec3& vp,
                                         const PotentialSpec& spec, const GridPtr& grid) {
    if (norm(v) >= 1.0 || norm(vp) >= 1.0)
        throw std::invalid_argument("check_uniform_bounds: velocities must be subsonic");
    UniformBoundsReport rep;
    lemma55_ratios(v, vp, spec, grid, rep.u_hv_inv, rep.hv_inv, rep.diff_ratio);
    GridPtr fine = make_grid(grid->n() * 2, grid->length());
    lemma55_ratios(v, vp, spec, fine, rep.u_hv_inv_refined, rep.hv_inv_refined,
                   rep.diff_ratio_refined);
    auto stable = [](double a, double b) {
        if (a == 0.0 && b == 0.0) return true;
        return std::abs(a - b) <= 0.1 * std::max(std::abs(a), std::abs(b));
    };
    rep.refinement_stable = stable(rep.u_hv_inv, rep.u_hv_inv_refined) &&
                            stable(rep.hv_inv, rep.hv_inv_refined) &&
                            stable(rep.diff_ratio, rep.diff_ratio_refined);
    return rep;
}

}  // namespace polaron
