#include <doctest.h>

#include "oracles.hpp"
#include "polaron/dynamics.hpp"
#include "polaron/symbols.hpp"

using namespace polaron;

namespace {
const PotentialSpec kGauss{PotentialSpec::Kind::Gaussian, 1.0, 1.0};

double max_sample_dev(const Trajectory& a, const Trajectory& b) {
    double dev = 0.0;
    std::size_t n = std::min(a.samples.size(), b.samples.size());
    for (std::size_t k = 0; k < n; ++k) {
        dev = std::max(dev, norm_inf(a.samples[k].X - b.samples[k].X));
        dev = std::max(dev, norm_inf(a.samples[k].P - b.samples[k].P));
    }
    return dev;
}
}  // namespace

TEST_CASE("free field evolves by the exact propagator") {
    GridPtr g = make_grid(32, 16.0);
    PotentialSpec zero{PotentialSpec::Kind::Gaussian, 0.0, 1.0};
    ParticleFieldSystem sys(g, zero);
    ComplexField beta0(g, Representation::Physical);
    for (std::size_t i = 0; i < beta0.size(); ++i) {
        Vec3 y = g->position(i);
        beta0[i] = cplx(0.0, std::exp(-dot(y, y) / 2.0));
    }
    SystemState s = sys.field_state({}, {0, 0, 0.3}, beta0);
    ComplexField b0 = s.B;
    double n0 = b0.l2_norm();
    for (int k = 0; k < 40; ++k) sys.step(s, 0.05);
    // X = X0 + P t, P constant, B = e^{-iHt} B0, unitary
    CHECK(norm_inf(s.P - Vec3{0, 0, 0.3}) == 0.0);
    CHECK(norm_inf(s.X - Vec3{0, 0, 0.3 * 2.0}) < 1e-13);
    CHECK(std::abs(s.B.l2_norm() - n0) / n0 < 1e-12);
    ComplexField want = apply_multiplier(b0, multiplier_exp_h(2.0));
    want[0] = 0.0;
    CHECK(l2_distance(s.B, want) / n0 < 1e-10);
}

TEST_CASE("zero data stays zero") {
    GridPtr g = make_grid(16, 8.0);
    PotentialSpec zero{PotentialSpec::Kind::Gaussian, 0.0, 1.0};
    ParticleFieldSystem sys(g, zero);
    SystemState s = sys.free_state({}, {});
    Trajectory traj = sys.integrate(s, {2.0, 0.05, 5, true, 0});
    for (const auto& smp : traj.samples) {
        CHECK(norm(smp.X) == 0.0);
        CHECK(norm(smp.P) == 0.0);
        CHECK(smp.field_l2 == 0.0);
        CHECK(smp.energy == 0.0);
    }
}

TEST_CASE("traveling wave is preserved exactly") {
    GridPtr g = make_grid(64, 32.0);
    ParticleFieldSystem sys(g, kGauss);
    Vec3 v{0, 0, 0.5};
    SystemState s = sys.traveling_state({}, v, {});
    double wl2 = sys.What().l2_norm();
    for (int k = 0; k < 100; ++k) {
        sys.step(s, 0.05);
        CHECK(norm(sys.force(s)) < 1e-8 * wl2 * wl2);
    }
    CHECK(norm_inf(s.P - v) < 1e-6);
    CHECK(norm_inf(s.X - v * 5.0) < 1e-5);
}

TEST_CASE("energy: free particle and static profile oracle") {
    GridPtr g = make_grid(64, 32.0);
    PotentialSpec zero{PotentialSpec::Kind::Gaussian, 0.0, 1.0};
    ParticleFieldSystem free_sys(g, zero);
    SystemState s = free_sys.free_state({}, {0, 0, 0.7});
    CHECK(free_sys.energy(s) == doctest::Approx(0.5 * 0.49).epsilon(1e-14));

    // static profile gamma_0 at P = 0: 1-D radial oracle
    // E = (2pi)^-3 4pi int rho^2 What^2 [-1/(2<rho>^2)] drho, corrected for the
    // gauged DC node: + dxi^3 (2pi)^-3 What(0)^2 / 2
    ParticleFieldSystem sys(g, kGauss);
    SystemState st = sys.traveling_state({}, {}, {});
    double cont = oracles::simpson(
        [&](double rho) {
            double w = oracles::gaussian_fourier(rho, 1.0, 1.0);
            return rho * rho * w * w * (-0.5) / (1.0 + rho * rho);
        },
        0.0, 14.0, 40000);
    cont *= 4.0 * oracles::pi / std::pow(2.0 * oracles::pi, 3);
    double dxi3 = std::pow(g->xi_spacing(), 3);
    double w0 = oracles::gaussian_fourier(0.0, 1.0, 1.0);
    double dc_fix = dxi3 / std::pow(2.0 * oracles::pi, 3) * 0.5 * w0 * w0;
    CHECK(std::abs(sys.energy(st) - (cont + dc_fix)) < 1e-8);
}

TEST_CASE("conservation and the a-priori energy bound on a perturbed run") {
    GridPtr g = make_grid(64, 32.0);
    ParticleFieldSystem sys(g, kGauss);
    SystemState s0 = sys.traveling_state({}, {0, 0, 0.4}, {0.01, 1.0, {}});
    IntegrateOptions opt{6.0, 0.05, 12, false, 0};
    Trajectory traj = sys.integrate(s0, opt);
    double e0 = traj.samples.front().energy;
    Vec3 m0 = traj.samples.front().momentum;
    double rhs = sys.energy_bound_rhs(s0);
    for (const auto& smp : traj.samples) {
        CHECK(std::abs(smp.energy - e0) / std::abs(e0) < 1e-6);
        CHECK(norm_inf(smp.momentum - m0) / norm(m0) < 1e-6);
        CHECK(0.5 * dot(smp.P, smp.P) <= rhs);  // kinetic part of the bound
    }
    SystemState end = s0;
    for (int k = 0; k < 20; ++k) sys.step(end, 0.05);
    CHECK(sys.energy_bound_lhs(end) <= rhs);
}

TEST_CASE("second-order self-convergence") {
    GridPtr g = make_grid(32, 16.0);
    ParticleFieldSystem sys(g, kGauss);
    SystemState s0 = sys.traveling_state({}, {0, 0, 0.4}, {0.05, 1.0, {1.0, 0.0, 0.0}});
    auto run = [&](double dt, int se) {
        IntegrateOptions opt{4.0, dt, se, false, 0};
        return sys.integrate(s0, opt);
    };
    Trajectory t1 = run(0.08, 5);
    Trajectory t2 = run(0.04, 10);
    Trajectory t3 = run(0.02, 20);
    double e12 = max_sample_dev(t1, t2);
    double e23 = max_sample_dev(t2, t3);
    double order = std::log2(e12 / e23);
    CHECK(order == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("time-translation composition and lattice-shift covariance") {
    GridPtr g = make_grid(32, 16.0);
    ParticleFieldSystem sys(g, kGauss);
    SystemState a = sys.traveling_state({}, {0, 0, 0.4}, {0.02, 1.0, {}});
    SystemState b = a;
    for (int k = 0; k < 30; ++k) sys.step(a, 0.05);
    for (int k = 0; k < 12; ++k) sys.step(b, 0.05);
    for (int k = 0; k < 18; ++k) sys.step(b, 0.05);
    CHECK(norm_inf(a.X - b.X) < 1e-12);
    CHECK(norm_inf(a.P - b.P) < 1e-12);
    CHECK(l2_distance(a.B, b.B) < 1e-12 * std::max(1.0, a.B.l2_norm()));

    // shifting X0 by a lattice vector shifts the whole trajectory
    Vec3 shift{4 * g->spacing(), 0.0, -2 * g->spacing()};
    SystemState c = sys.traveling_state(shift, {0, 0, 0.4}, {0.02, 1.0, shift});
    for (int k = 0; k < 30; ++k) sys.step(c, 0.05);
    CHECK(norm_inf((c.X - shift) - a.X) < 1e-12);
    CHECK(norm_inf(c.P - a.P) < 1e-12);
    // field shifted: compare spectra up to the translation phase
    double worst = 0.0;
    for (std::size_t i = 0; i < a.B.size(); ++i) {
        double ph = -dot(g->wavevector(i), shift);
        worst = std::max(worst, std::abs(c.B[i] - a.B[i] * cplx(std::cos(ph), std::sin(ph))));
    }
    CHECK(worst < 1e-12 * std::max(1.0, a.B.max_abs()));
}

TEST_CASE("determinism of integrate") {
    GridPtr g = make_grid(32, 16.0);
    ParticleFieldSystem sys(g, kGauss);
    SystemState s0 = sys.traveling_state({}, {0, 0, 0.4}, {0.01, 1.0, {}});
    IntegrateOptions opt{2.0, 0.05, 10, true, 0};
    Trajectory a = sys.integrate(s0, opt);
    Trajectory b = sys.integrate(s0, opt);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].energy == b.samples[k].energy);  // bitwise
        CHECK(a.samples[k].X.z == b.samples[k].X.z);
        CHECK(a.samples[k].re_delta_linf == b.samples[k].re_delta_linf);
    }
}

TEST_CASE("init_state reports the perturbation weighted norm") {
    GridPtr g = make_grid(64, 32.0);
    ParticleFieldSystem sys(g, kGauss);
    InitReport rep;
    SystemState s = sys.traveling_state({}, {0, 0, 0.4}, {0.01, 1.0, {}}, &rep);
    (void)s;
    double want = oracles::weighted_norm_radial(4, 0.01, 1.0);
    CHECK(std::abs(rep.weighted_norm_w4_delta0 - want) / want < 1e-4);

    InitReport zero_rep;
    sys.traveling_state({}, {0, 0, 0.4}, {}, &zero_rep);
    CHECK(zero_rep.weighted_norm_w4_delta0 == 0.0);

    CHECK_THROWS_AS(
        sys.traveling_state({}, {0, 0, std::numeric_limits<double>::quiet_NaN()}, {}),
        std::invalid_argument);
}

TEST_CASE("blow-up guard flags corrupted dynamics") {
    GridPtr g = make_grid(16, 8.0);
    ParticleFieldSystem sys(g, kGauss);
    SystemState s0 = sys.traveling_state({}, {0, 0, 0.4}, {});
    // corrupt the state so the guard must trip
    for (auto& v : s0.B.data()) v *= 1e-9;
    CHECK_THROWS_AS(sys.integrate(s0, {1.0, 0.05, 2, false, 0}),
                    NumericalGuardError);
}

TEST_CASE("scaling covariance (d) and (e)") {
    ScalingCheckConfig cfg;
    cfg.spec = kGauss;
    cfg.T = 2.5;

    ScalingReport ident = scaling_covariance_check(1.0, ScalingKind::MassUnits, cfg);
    CHECK(ident.max_deviation == 0.0);

    ScalingReport d = scaling_covariance_check(2.0, ScalingKind::MassUnits, cfg);
    CHECK(d.pass);
    ScalingReport e = scaling_covariance_check(2.0, ScalingKind::LengthUnits, cfg);
    CHECK(e.pass);
    CHECK_THROWS_AS(scaling_covariance_check(4.0, ScalingKind::MassUnits, cfg),
                    std::invalid_argument);
}
