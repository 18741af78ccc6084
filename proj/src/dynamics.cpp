/* Time integration of the coupled system and its conservation diagnostics. */

#include "polaron/dynamics.hpp"

#include <cmath>

#include "polaron/symbols.hpp"

namespace polaron {

namespace {
// (e^{iz} - 1) / (iz), the phi_1 function of the drifting-source Duhamel term
inline cplx phi1(double z) {
    if (std::abs(z) < 1e-6) return cplx(1.0 - z * z / 6.0, 0.5 * z);
    cplx num = cplx(std::cos(z) - 1.0, std::sin(z));
    return num / cplx(0.0, z);
}
}  // namespace

std::vector<double> Trajectory::times() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.t);
    return out;
}
std::vector<double> Trajectory::series_re_delta() const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.re_delta_linf);
    return out;
}
std::vector<double> Trajectory::series_im_delta() const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(s.im_delta_linf);
    return out;
}

ParticleFieldSystem::ParticleFieldSystem(GridPtr grid, PotentialSpec spec, Params par)
    : grid_(std::move(grid)),
      spec_(std::move(spec)),
      par_(par),
      What_(spectral_W(spec_, grid_)) {
    if (!(par_.mass > 0.0) || !(par_.mu > 0.0))
        throw std::invalid_argument("system: mass and mu must be positive");
    h_.resize(grid_->size());
    u_.resize(grid_->size());
    for (std::size_t i = 0; i < grid_->size(); ++i) {
        Vec3 xi = grid_->wavevector(i);
        h_[i] = symbol_h(xi, par_.mu);
        u_[i] = symbol_u(xi, par_.mu);
    }
}

ComplexField ParticleFieldSystem::profile_G(const Vec3& v) const {
    ComplexField G(grid_, Representation::Spectral);
    for (std::size_t i = 1; i < grid_->size(); ++i) {
        double hv = h_[i] - dot(v, grid_->wavevector(i));
        if (std::abs(hv) < 1e-12) continue;
        G[i] = cplx(-What_[i].real() / hv, 0.0);
    }
    return G;
}

SystemState ParticleFieldSystem::traveling_state(const Vec3& X0, const Vec3& P0,
                                                 const PerturbationSpec& pert,
                                                 InitReport* report) const {
    if (!std::isfinite(norm(X0)) || !std::isfinite(norm(P0)))
        throw std::invalid_argument("traveling_state: non-finite initial data");
    Vec3 v0 = P0 / par_.mass;
    SystemState s{0.0, X0, P0, profile_G(v0)};
    // translate the profile to X0
    for (std::size_t i = 1; i < grid_->size(); ++i) {
        double ph = -dot(grid_->wavevector(i), X0);
        s.B[i] *= cplx(std::cos(ph), std::sin(ph));
    }
    if (pert.epsilon0 != 0.0) {
        ComplexField delta0(grid_, Representation::Physical);
        const double amp = pert.epsilon0 / std::sqrt(2.0);
        for (std::size_t i = 0; i < delta0.size(); ++i) {
            Vec3 y = grid_->position(i) - pert.offset;
            double g = std::exp(-dot(y, y) / (2.0 * pert.sigma * pert.sigma));
            delta0[i] = cplx(amp * g, amp * g);
        }
        if (report) report->weighted_norm_w4_delta0 = weighted_norm(delta0, 4);
        ComplexField D0 = to_spectral(apply_Ur_inv(delta0, par_.mu));
        D0[0] = 0.0;
        s.B += D0;
    } else if (report) {
        report->weighted_norm_w4_delta0 = 0.0;
    }
    s.B[0] = 0.0;
    return s;
}

SystemState ParticleFieldSystem::field_state(const Vec3& X0, const Vec3& P0,
                                             const ComplexField& beta0_physical) const {
    SystemState s{0.0, X0, P0, to_spectral(apply_Ur_inv(beta0_physical, par_.mu))};
    s.B[0] = 0.0;
    return s;
}

SystemState ParticleFieldSystem::free_state(const Vec3& X0, const Vec3& P0) const {
    return {0.0, X0, P0, ComplexField(grid_, Representation::Spectral)};
}

void ParticleFieldSystem::field_halfstep(SystemState& s, double dt_half,
                                         const Vec3& source_origin,
                                         const Vec3& source_velocity) const {
    const int n = grid_->n();
    const auto& xi = grid_->axis_wavenumbers();
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx) {
                if (idx == 0) {
                    s.B[0] = 0.0;  // mean-zero gauge
                    continue;
                }
                const double h = h_[idx];
                const double xv = xi[ix] * source_velocity.x + xi[iy] * source_velocity.y +
                                  xi[iz] * source_velocity.z;
                const double xX = xi[ix] * source_origin.x + xi[iy] * source_origin.y +
                                  xi[iz] * source_origin.z;
                const cplx prop(std::cos(h * dt_half), -std::sin(h * dt_half));
                const cplx phase(std::cos(xX), -std::sin(xX));
                const cplx duh = cplx(0.0, -1.0) * What_[idx].real() * phase * dt_half *
                                 prop * phi1((h - xv) * dt_half);
                s.B[idx] = prop * s.B[idx] + duh;
            }
}

Vec3 ParticleFieldSystem::force(const SystemState& s) const {
    std::vector<cplx> re(grid_->size());
    {
        ComplexField phys = to_physical(s.B);
        for (std::size_t i = 0; i < phys.size(); ++i) re[i] = phys[i].real();
    }
    fft_forward(*grid_, re);
    Vec3 F{};
    for (std::size_t i = 1; i < grid_->size(); ++i) {
        Vec3 xi = grid_->wavevector(i);
        double ph = -dot(xi, s.X);
        cplx val = cplx(0.0, 1.0) * What_[i].real() * cplx(std::cos(ph), std::sin(ph)) *
                   std::conj(u_[i] * re[i]);
        F.x += xi.x * val.real();
        F.y += xi.y * val.real();
        F.z += xi.z * val.real();
    }
    return F * grid_->mode_weight();
}

void ParticleFieldSystem::step(SystemState& s, double dt) const {
    if (!(dt > 0.0) || dt > 0.1) throw std::invalid_argument("step: need 0 < dt <= 0.1");
    const double invM = 1.0 / par_.mass;
    Vec3 X0 = s.X;
    Vec3 v1 = s.P * invM;
    s.X += v1 * (0.5 * dt);
    field_halfstep(s, 0.5 * dt, X0, v1);
    Vec3 Fm = force(s);
    s.P += Fm * dt;
    Vec3 v2 = s.P * invM;
    Vec3 Xh = s.X;
    field_halfstep(s, 0.5 * dt, Xh, v2);
    s.X += v2 * (0.5 * dt);
    s.t += dt;
}

ComplexField ParticleFieldSystem::beta(const SystemState& s) const {
    return apply_Ur(s.B, par_.mu);
}

namespace {
struct BetaSpectra {
    std::vector<cplx> re_hat, im_hat;  // (Re beta)^ and (Im beta)^
};

BetaSpectra beta_spectra(const FourierGrid3& g, const ComplexField& B,
                         const std::vector<double>& u) {
    BetaSpectra out;
    out.re_hat.resize(g.size());
    out.im_hat.resize(g.size());
    ComplexField phys = to_physical(B);
    for (std::size_t i = 0; i < phys.size(); ++i) {
        out.re_hat[i] = phys[i].real();
        out.im_hat[i] = phys[i].imag();
    }
    fft_forward(g, out.re_hat);
    fft_forward(g, out.im_hat);
    for (std::size_t i = 0; i < out.re_hat.size(); ++i) out.re_hat[i] *= u[i];
    return out;
}
}  // namespace

double ParticleFieldSystem::energy(const SystemState& s) const {
    BetaSpectra bs = beta_spectra(*grid_, s.B, u_);
    const double w = grid_->mode_weight();
    double grad = 0.0, re2 = 0.0, wre = 0.0;
    for (std::size_t i = 0; i < grid_->size(); ++i) {
        Vec3 xi = grid_->wavevector(i);
        double xi2 = dot(xi, xi);
        grad += xi2 * (std::norm(bs.re_hat[i]) + std::norm(bs.im_hat[i]));
        re2 += std::norm(bs.re_hat[i]);
        double ph = -dot(xi, s.X);
        wre += (What_[i].real() * cplx(std::cos(ph), std::sin(ph)) * std::conj(bs.re_hat[i]))
                   .real();
    }
    return 0.5 * dot(s.P, s.P) / par_.mass +
           (0.5 * grad + 0.5 * par_.mu * re2 + wre) * w;
}

Vec3 ParticleFieldSystem::total_momentum(const SystemState& s) const {
    BetaSpectra bs = beta_spectra(*grid_, s.B, u_);
    Vec3 field{};
    for (std::size_t i = 0; i < grid_->size(); ++i) {
        double a = std::norm(bs.re_hat[i] + cplx(0.0, 1.0) * bs.im_hat[i]);
        Vec3 xi = grid_->wavevector(i);
        field += xi * a;
    }
    return s.P + field * (0.5 * grid_->mode_weight());
}

double ParticleFieldSystem::energy_bound_lhs(const SystemState& s) const {
    BetaSpectra bs = beta_spectra(*grid_, s.B, u_);
    double grad = 0.0;
    for (std::size_t i = 0; i < grid_->size(); ++i) {
        Vec3 xi = grid_->wavevector(i);
        grad += dot(xi, xi) * (std::norm(bs.re_hat[i]) + std::norm(bs.im_hat[i]));
    }
    return 0.5 * dot(s.P, s.P) / par_.mass + 0.5 * grad * grid_->mode_weight();
}

double ParticleFieldSystem::energy_bound_rhs(const SystemState& initial) const {
    double w2 = What_.l2_norm();
    return energy(initial) + 0.5 * w2 * w2;
}

double ParticleFieldSystem::wrap_horizon(const Vec3& P0) const {
    return 0.4 * grid_->length() / std::max(1.0, norm(P0) / par_.mass + 1.0);
}

TrajectorySample ParticleFieldSystem::diagnose(const SystemState& s, const Vec3& accel,
                                               bool with_delta) const {
    TrajectorySample out;
    out.t = s.t;
    out.X = s.X;
    out.P = s.P;
    out.accel = accel;
    out.energy = energy(s);
    out.momentum = total_momentum(s);
    out.field_l2 = s.B.l2_norm();
    if (with_delta) {
        // ansatz deviation delta_t = beta_t - gamma_{v_t}(. - X_t) = U_r (B - G_t)
        ComplexField Bdiff = s.B;
        ComplexField G = profile_G(s.P / par_.mass);
        for (std::size_t i = 1; i < grid_->size(); ++i) {
            double ph = -dot(grid_->wavevector(i), s.X);
            Bdiff[i] -= G[i] * cplx(std::cos(ph), std::sin(ph));
        }
        ComplexField delta = apply_Ur(Bdiff, par_.mu);
        out.re_delta_linf = delta.max_abs_real();
        out.im_delta_linf = delta.max_abs_imag();
    }
    return out;
}

Trajectory ParticleFieldSystem::integrate(const SystemState& s0,
                                          const IntegrateOptions& opt) const {
    if (!(opt.T > 0.0)) throw std::invalid_argument("integrate: T must be positive");
    Trajectory traj;
    traj.t_wrap = wrap_horizon(s0.P);
    SystemState s = s0;
    const long nsteps = std::lround(opt.T / opt.dt);
    const double b0 = std::max(s.B.l2_norm(), 1e-12);
    traj.samples.push_back(diagnose(s, force(s), opt.delta_diagnostics));
    long sample_count = 0;
    for (long k = 0; k < nsteps; ++k) {
        step(s, opt.dt);
        if ((k + 1) % opt.sample_every == 0 || k + 1 == nsteps) {
            ++sample_count;
            traj.samples.push_back(diagnose(s, force(s), opt.delta_diagnostics));
            if (s.B.l2_norm() > opt.blowup_factor * b0)
                throw NumericalGuardError("integrate: field norm exceeded blow-up guard");
            if (opt.snapshot_every > 0 && sample_count % opt.snapshot_every == 0)
                traj.snapshots.emplace_back(s.t, s.B);
        }
    }
    return traj;
}

namespace {
double map_deviation(const Trajectory& base, const Trajectory& tr, double x_scale,
                     double p_scale, double b_scale) {
    // compare the transformed run mapped back to the base frame
    double dev = 0.0;
    std::size_t n = std::min(base.samples.size(), tr.samples.size());
    for (std::size_t k = 0; k < n; ++k) {
        dev = std::max(dev, norm_inf(tr.samples[k].X * x_scale - base.samples[k].X));
        dev = std::max(dev, norm_inf(tr.samples[k].P * p_scale - base.samples[k].P));
        dev = std::max(dev, std::abs(tr.samples[k].field_l2 * b_scale -
                                     base.samples[k].field_l2));
    }
    return dev;
}
}  // namespace

ScalingReport scaling_covariance_check(double lambda, ScalingKind kind,
                                       const ScalingCheckConfig& cfg) {
    if (lambda < 0.5 || lambda > 2.0)
        throw std::invalid_argument("scaling_covariance_check: lambda must be in [0.5, 2]");
    ScalingReport rep;
    rep.lambda = lambda;
    rep.kind = kind;

    GridPtr grid = make_grid(cfg.n, cfg.box);
    ParticleFieldSystem base(grid, cfg.spec);
    SystemState s0 = base.traveling_state({}, cfg.v0, cfg.pert);
    IntegrateOptions opt;
    opt.T = cfg.T;
    opt.dt = cfg.dt;
    opt.sample_every = std::max(1, int(std::lround(0.5 / cfg.dt)));
    opt.delta_diagnostics = false;
    Trajectory traj = base.integrate(s0, opt);

    // self-convergence yardstick: same run at dt/2
    IntegrateOptions opt_half = opt;
    opt_half.dt = cfg.dt / 2.0;
    opt_half.sample_every = opt.sample_every * 2;
    Trajectory traj_half = base.integrate(s0, opt_half);
    rep.self_convergence = map_deviation(traj, traj_half, 1.0, 1.0, 1.0);

    if (kind == ScalingKind::MassUnits) {
        // (d): M -> M/lambda, W -> W/sqrt(lambda); X unchanged, P -> P/lambda,
        // beta -> beta/sqrt(lambda) (so B scales the same way)
        PotentialSpec spec2 = cfg.spec;
        spec2.amplitude /= std::sqrt(lambda);
        spec2.amplitude2 /= std::sqrt(lambda);
        ParticleFieldSystem sys2(grid, spec2, {1.0 / lambda, 1.0});
        SystemState s2{0.0, s0.X, s0.P / lambda, s0.B};
        s2.B *= cplx(1.0 / std::sqrt(lambda), 0.0);
        Trajectory tr2 = sys2.integrate(s2, opt);
        rep.max_deviation = map_deviation(traj, tr2, 1.0, lambda, std::sqrt(lambda));
    } else {
        // (e): mu -> mu/lambda^2, W -> lambda^{-7/2} W(./lambda) on the lambda-dilated
        // box; t -> lambda^2 t, X -> lambda X, P -> P/lambda, B (per index) -> lambda^{-3/2} B
        PotentialSpec spec2 = cfg.spec;
        spec2.amplitude *= std::pow(lambda, -3.5);
        spec2.amplitude2 *= std::pow(lambda, -3.5);
        spec2.width *= lambda;
        spec2.width2 *= lambda;
        GridPtr grid2 = make_grid(cfg.n, cfg.box * lambda);
        ParticleFieldSystem sys2(grid2, spec2, {1.0, 1.0 / (lambda * lambda)});
        // physical samples scale by lambda^{-3/2}; spectral samples pick up the
        // additional transform volume factor lambda^3
        ComplexField B2(grid2, Representation::Spectral);
        for (std::size_t i = 0; i < B2.size(); ++i)
            B2[i] = s0.B[i] * std::pow(lambda, 1.5);
        SystemState s2{0.0, s0.X * lambda, s0.P / lambda, B2};
        IntegrateOptions opt2 = opt;
        opt2.T = cfg.T * lambda * lambda;
        opt2.dt = cfg.dt * lambda * lambda;
        Trajectory tr2 = sys2.integrate(s2, opt2);
        // the L2 norm of the field is invariant under (e)
        rep.max_deviation = map_deviation(traj, tr2, 1.0 / lambda, lambda, 1.0);
    }
    rep.pass = rep.max_deviation <= 10.0 * rep.self_convergence + 1e-14;
    return rep;
}

}  // namespace polaron
