#include <doctest.h>

#include "oracles.hpp"
#include "polaron/potential.hpp"

using namespace polaron;

TEST_CASE("eval_W basics") {
    GridPtr g = make_grid(64, 32.0);
    PotentialSpec zero{PotentialSpec::Kind::Gaussian, 0.0, 1.0};
    CHECK(eval_W(zero, g).l2_norm() == 0.0);

    PotentialSpec w{PotentialSpec::Kind::Gaussian, 1.0, 1.0};
    ComplexField field = eval_W(w, g);
    // center sample is W(0) = 1
    CHECK(field[g->index(32, 32, 32)].real() == doctest::Approx(1.0).epsilon(1e-14));

    // spherical symmetry under axis permutations, exactly
    double worst = 0.0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            worst = std::max(worst, std::abs(field[g->index(i, j, 32)].real() -
                                             field[g->index(j, 32, i)].real()));
        }
    CHECK(worst < 1e-12);

    PotentialSpec wide{PotentialSpec::Kind::Gaussian, 1.0, 5.0};
    CHECK_THROWS_AS(eval_W(wide, g), std::invalid_argument);
}

TEST_CASE("grid transform of W matches the closed form") {
    GridPtr g = make_grid(64, 32.0);
    PotentialSpec w{PotentialSpec::Kind::Gaussian, 1.0, 1.0};
    ComplexField wh = to_spectral(eval_W(w, g));
    for (std::size_t i = 0; i < wh.size(); ++i) {
        double r = norm(g->wavevector(i));
        if (r > 2.0) continue;
        double want = oracles::gaussian_fourier(r, 1.0, 1.0);
        CHECK(std::abs(wh[i] - want) / want < 1e-6);
        CHECK(std::abs(wh[i] - w.fourier_radial(r)) / want < 1e-6);
    }
}

TEST_CASE("weighted_norm") {
    GridPtr g = make_grid(64, 32.0);
    ComplexField zero(g, Representation::Physical);
    CHECK(weighted_norm(zero, 4) == 0.0);

    PotentialSpec w{PotentialSpec::Kind::Gaussian, 1.0, 1.0};
    ComplexField field = eval_W(w, g);
    CHECK(weighted_norm(field, 0) == doctest::Approx(field.l2_norm()).epsilon(1e-12));

    double got = weighted_norm(field, 4);
    double want = oracles::weighted_norm_radial(4, 1.0, 1.0);
    CHECK(std::abs(got - want) / want < 1e-4);

    // monotone in N since <y> >= 1 everywhere
    double prev = 0.0;
    for (int N = 0; N <= 6; ++N) {
        double v = weighted_norm(field, N);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("hypothesis checks") {
    GridPtr g = make_grid(32, 16.0);
    PotentialSpec w{PotentialSpec::Kind::Gaussian, 1.0, 1.0};
    auto rep = check_hypotheses(w, {0, 0, 0.5}, g);
    CHECK(rep.all_pass);
    CHECK(rep.spherically_symmetric);
    CHECK(rep.fourier_nonvanishing);
    CHECK(rep.weighted_norm_finite);

    auto fast = check_hypotheses(w, {0, 0, 1.2}, g);
    CHECK_FALSE(fast.subsonic);
    CHECK_FALSE(fast.all_pass);

    // difference of two Gaussians with a engineered root of What
    PotentialSpec diff{PotentialSpec::Kind::GaussianDiff, 1.0, 1.0};
    diff.amplitude2 = 0.5;
    diff.width2 = 1.5;
    // bisection oracle: What(rho) = g1 - g2 changes sign on [0, 3]
    double lo = 0.0, hi = 3.0;
    REQUIRE(diff.fourier_radial(lo) * diff.fourier_radial(hi) < 0.0);
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (diff.fourier_radial(lo) * diff.fourier_radial(mid) <= 0.0 ? hi : lo) = mid;
    }
    double root = 0.5 * (lo + hi);
    CHECK(root > 0.0);
    CHECK(root < 3.0);
    auto bad = check_hypotheses(diff, {0, 0, 0.5}, g);
    CHECK_FALSE(bad.fourier_nonvanishing);
}

TEST_CASE("tabulated radial potential") {
    PotentialSpec tab{PotentialSpec::Kind::TabulatedRadial, 1.0, 1.0};
    for (int i = 0; i <= 400; ++i) {
        double r = 4.0 * i / 400.0;
        tab.radii.push_back(r);
        tab.values.push_back(std::exp(-r * r / 2.0));
    }
    // its sine-transform quadrature should land near the Gaussian closed form
    for (double rho : {0.3, 1.0, 2.0}) {
        double want = oracles::gaussian_fourier(rho, 1.0, 1.0);
        CHECK(std::abs(tab.fourier_radial(rho) - want) / want < 5e-3);
    }
}
