#include <doctest.h>

#include "oracles.hpp"
#include "polaron/memory_kernel.hpp"
#include "polaron/symbols.hpp"

using namespace polaron;

namespace {
const PotentialSpec kGauss{PotentialSpec::Kind::Gaussian, 1.0, 1.0};

std::shared_ptr<const SphericalQuadrature> default_quad() {
    static auto q = std::make_shared<const SphericalQuadrature>(SphericalQuadrature::build());
    return q;
}

MemoryKernel kernel_v02(double dt = 0.05, int kmax = 800) {
    return compute_M({0, 0, 0.2}, kGauss, dt, kmax, default_quad());
}
}  // namespace

TEST_CASE("spherical quadrature validates") {
    auto v = validate(*default_quad());
    CHECK(v.pass);
    CHECK(v.worst_relative_error < 1e-8);
}

TEST_CASE("compute_M: zero potential, diagonality, symmetry") {
    PotentialSpec zero{PotentialSpec::Kind::Gaussian, 0.0, 1.0};
    MemoryKernel mz = compute_M({0, 0, 0.5}, zero, 0.1, 50, default_quad());
    for (const auto& m : mz.samples) CHECK(m.max_abs() == 0.0);

    MemoryKernel m5 = compute_M({0, 0, 0.5}, kGauss, 0.1, 100, default_quad());
    double diag = 0.0, off = 0.0, asym = 0.0;
    for (const auto& m : m5.samples) {
        diag = std::max({diag, std::abs(m(0, 0)), std::abs(m(1, 1)), std::abs(m(2, 2))});
        off = std::max({off, std::abs(m(0, 1)), std::abs(m(0, 2)), std::abs(m(1, 2))});
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
    }
    CHECK(off < 1e-10 * diag);
    CHECK(asym < 1e-10 * diag);
    CHECK(m5.samples[0].max_abs() == 0.0);  // M(0) = 0 (sin(0) = 0)
    CHECK(m5.at(-1.0).max_abs() == 0.0);    // causal by construction

    CHECK_THROWS_AS(compute_M({0, 0, 1.2}, kGauss, 0.1, 10, default_quad()),
                    std::invalid_argument);
}

TEST_CASE("M decay slope and quadrature convergence") {
    MemoryKernel kern = kernel_v02();
    std::vector<double> ts, m33;
    for (std::size_t k = 0; k < kern.samples.size(); ++k) {
        double t = k * kern.dt;
        if (t < 5.0 || t > 40.0) continue;
        ts.push_back(t);
        m33.push_back(std::abs(kern.samples[k](2, 2)));
    }
    DecayFit fit = fit_loglog(ts, m33);
    CHECK(fit.exponent <= -5.0);

    // doubling the quadrature changes samples by < 1e-4 relative on [0, 40]
    auto fine = std::make_shared<const SphericalQuadrature>(default_quad()->refined());
    MemoryKernel kf = compute_M({0, 0, 0.2}, kGauss, 0.4, 100, fine);
    MemoryKernel kc = compute_M({0, 0, 0.2}, kGauss, 0.4, 100, default_quad());
    double scale = 0.0, diff = 0.0;
    for (std::size_t k = 0; k < kc.samples.size(); ++k) {
        scale = std::max(scale, kf.samples[k].max_abs());
        diff = std::max(diff, (kf.samples[k] - kc.samples[k]).max_abs());
    }
    CHECK(diff / scale < 1e-4);
}

TEST_CASE("fourier_M: tail, positivity on the imaginary axis, path agreement") {
    MemoryKernel kern = kernel_v02(0.05, 1600);

    std::vector<double> oms{8.0, 12.0, 16.0, 24.0, 32.0, 48.0}, mags;
    for (double om : oms) mags.push_back(fourier_M_path_a(kern, om, 0.0).max_abs());
    CHECK(fit_loglog(oms, mags).exponent <= -1.8);

    // z = -0.1i: path-B integrand h/(h^2+y^2) > 0, diagonal real and positive
    Mat3c mi = fourier_M_path_b(kern, 0.0, 0.1);
    for (int i = 0; i < 3; ++i) {
        CHECK(mi(i, i).real() > 0.0);
        CHECK(std::abs(mi(i, i).imag()) < 1e-12 * mi(i, i).real());
    }

    for (double om : {0.1, 1.0, 5.0}) {
        FourierMResult r = fourier_M(kern, om, 0.0);
        CHECK(r.discrepancy < 1e-3);
        CHECK_FALSE(r.resolution_failure);
    }
    CHECK_THROWS_AS(fourier_M_path_a(kern, 1.0, -0.5), std::invalid_argument);
}

TEST_CASE("invertibility certificate signs") {
    MemoryKernel kern = kernel_v02(0.05, 1600);
    InvertibilityReport rep = check_invertibility(kern, {-1.0, 1.0, 1000.0});
    CHECK(rep.mhat0_positive_definite);
    CHECK(rep.all_signs_ok);
    CHECK(rep.min_abs_det > 0.0);
    for (const auto& rec : rep.records) {
        if (rec.omega == 1.0) CHECK(rec.imag_eigs[2] < 0.0);
        if (rec.omega == -1.0) CHECK(rec.imag_eigs[0] > 0.0);
        if (rec.omega == 1000.0)
            for (double e : rec.herm_eigs) CHECK(std::abs(e - 1.0) < 1e-2);
    }
}

TEST_CASE("resolvent kernel: zero kernel, causality, decay, volterra identity") {
    PotentialSpec zero{PotentialSpec::Kind::Gaussian, 0.0, 1.0};
    MemoryKernel mz = compute_M({0, 0, 0.2}, zero, 0.05, 400, default_quad());
    ResolventKernel kz = compute_K(mz);
    for (const auto& m : kz.samples) CHECK(m.max_abs() == 0.0);

    MemoryKernel kern = kernel_v02(0.02, 4000);
    ResolventKernel K = compute_K(kern);
    CHECK(K.causality_residual < 1e-8);
    std::vector<double> ts, kv;
    for (std::size_t k = 0; k < K.samples.size(); ++k) {
        double t = k * K.dt;
        if (t < 5.0 || t > 40.0) continue;
        ts.push_back(t);
        kv.push_back(K.samples[k].max_abs());
    }
    CHECK(fit_loglog(ts, kv).exponent <= -3.5);

    // direct Volterra solve vs K-form reconstruction
    std::vector<Vec3> r(kern.samples.size());
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] = Vec3{0.0, 0.0, std::pow(1.0 + k * kern.dt, -4.0)};
    std::vector<Vec3> direct = solve_volterra(kern, r);
    std::vector<Vec3> viak = apply_resolvent(K, r, kern.dt);
    double scale = 0.0, diff = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        scale = std::max(scale, norm(direct[k]));
        diff = std::max(diff, norm(direct[k] - viak[k]));
    }
    CHECK(diff / scale < 1e-4);
    CHECK(K.series_discrepancy < 1e-3);
}

TEST_CASE("solve_volterra: trivial and scalar closed form") {
    MemoryKernel kern;
    kern.dt = 0.01;
    kern.samples.assign(1001, Mat3{});  // M = 0
    std::vector<Vec3> r(kern.samples.size(), Vec3{0.5, -1.0, 2.0});
    std::vector<Vec3> v = solve_volterra(kern, r);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(norm(v[k] - r[k]) == 0.0);

    // M(t) = c Id with constant r0: vdot(t) = r0 e^{-ct}
    double c = 0.8;
    for (auto& m : kern.samples) m = Mat3::identity() * c;
    std::vector<Vec3> rc(kern.samples.size(), Vec3{0.0, 0.0, 1.0});
    std::vector<Vec3> ve = solve_volterra(kern, rc);
    double worst = 0.0;
    for (std::size_t k = 0; k < ve.size(); ++k) {
        double t = k * kern.dt;
        worst = std::max(worst, std::abs(ve[k].z - std::exp(-c * t)));
    }
    CHECK(worst < 5.0 * kern.dt * kern.dt);  // O(dt^2) product integration
}

TEST_CASE("r0: zero data and the t = 0 oracle") {
    GridPtr g = make_grid(64, 32.0);
    ComplexField What = spectral_W(kGauss, g);
    ComplexField zero(g, Representation::Spectral);
    CHECK(norm(compute_r0(3.0, zero, What, {1.0, 0.0, 0.0})) == 0.0);

    // D0 an offset real Gaussian bump; at t=0 the pairing reduces to
    // r0 = int grad W(y) (U Re D0)(y) dy, evaluated by brute-force mode sum
    ComplexField D0(g, Representation::Physical);
    for (std::size_t i = 0; i < D0.size(); ++i) {
        Vec3 y = g->position(i) - Vec3{1.5, 0.0, 0.0};
        D0[i] = std::exp(-dot(y, y));
    }
    ComplexField D0h = to_spectral(D0);
    D0h[0] = 0.0;
    Vec3 got = compute_r0(0.0, D0h, What, {});
    Vec3 want{};
    for (std::size_t i = 1; i < g->size(); ++i) {
        Vec3 xi = g->wavevector(i);
        cplx val = cplx(0.0, 1.0) * What[i].real() * std::conj(symbol_u(xi) * D0h[i]);
        want += xi * val.real();
    }
    want = want * g->mode_weight();
    CHECK(norm(got - want) < 1e-6 * std::max(1.0, norm(want)));
    // the x-component must dominate by the offset direction
    CHECK(std::abs(got.x) > 10.0 * std::abs(got.y));
}

TEST_CASE("oscillatory decay fits") {
    SphericalQuadrature::Options o;
    o.radial_panels = 96;
    SphericalQuadrature quad = SphericalQuadrature::build(o);
    std::vector<double> tg;
    for (int i = 0; i < 16; ++i) tg.push_back(5.0 + 45.0 * i / 15.0);

    PotentialSpec zero{PotentialSpec::Kind::Gaussian, 0.0, 1.0};
    OscillatoryResult z =
        oscillatory_decay(1, [](const Vec3&) { return 1.0; }, {0, 0, 0.5}, zero, zero, tg, quad);
    for (double m : z.magnitude) CHECK(m == 0.0);

    OscillatoryResult l1 = oscillatory_decay(
        1, [](const Vec3&) { return 1.0; }, {0, 0, 0.5}, kGauss, kGauss, tg, quad);
    CHECK(l1.fit.exponent >= -4.4);
    CHECK(l1.fit.exponent <= -3.6);

    OscillatoryResult ev = even_oscillatory_decay({0, 0, 0.2}, kGauss, tg, quad);
    CHECK(ev.fit.exponent <= -6.0);
}

TEST_CASE("dispersive decay on the box") {
    GridPtr g = make_grid(128, 64.0);
    ComplexField f(g, Representation::Physical);
    for (std::size_t i = 0; i < f.size(); ++i) {
        Vec3 y = g->position(i);
        f[i] = std::exp(-dot(y, y) / 2.0);
    }
    std::vector<double> tg;
    for (int i = 0; i < 12; ++i) tg.push_back(1.0 + 11.0 * i / 11.0);
    DispersiveResult d0 = dispersive_decay(f, 0, 0.0, tg);
    CHECK(d0.spread <= 2.0);
    DispersiveResult d1 = dispersive_decay(f, 0, 1.0, tg);
    CHECK(d1.spread <= 2.0);
    CHECK_THROWS_AS(dispersive_decay(f, 0, 0.5, std::vector<double>{100.0}),
                    std::invalid_argument);

    ComplexField fs = to_spectral(f);
    ComplexField ev = apply_multiplier(fs, multiplier_exp_h(9.0));
    CHECK(std::abs(ev.l2_norm() - fs.l2_norm()) / fs.l2_norm() < 1e-12);
}
