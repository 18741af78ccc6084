#include "polaron/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace polaron {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration from the Chebyshev estimate
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

SphericalQuadrature SphericalQuadrature::build(const Options& opt) {
    if (opt.radial_panels < 4 || opt.points_per_panel < 2 || opt.polar_nodes < 2 ||
        opt.azimuth_nodes < 3)
        throw std::invalid_argument("quadrature: degenerate node counts");
    SphericalQuadrature q;
    q.options = opt;

    // panel boundaries: geometric from r_min to 1, uniform from 1 to r_max
    std::vector<double> bk;
    int n_geo = std::max(4, opt.radial_panels / 3);
    int n_lin = opt.radial_panels - n_geo;
    bk.push_back(0.0);
    for (int i = 0; i <= n_geo; ++i)
        bk.push_back(opt.r_min * std::pow(1.0 / opt.r_min, double(i) / n_geo));
    for (int i = 1; i <= n_lin; ++i)
        bk.push_back(1.0 + (opt.r_max - 1.0) * double(i) / n_lin);

    std::vector<double> gx, gw;
    gauss_legendre(opt.points_per_panel, gx, gw);
    for (std::size_t p = 0; p + 1 < bk.size(); ++p) {
        double a = bk[p], b = bk[p + 1];
        for (int i = 0; i < opt.points_per_panel; ++i) {
            q.r.push_back(0.5 * (b - a) * gx[i] + 0.5 * (a + b));
            q.wr.push_back(0.5 * (b - a) * gw[i]);
        }
    }

    std::vector<double> cx, cw;
    gauss_legendre(opt.polar_nodes, cx, cw);
    const double pi = 3.14159265358979323846;
    const double waz = 2.0 * pi / opt.azimuth_nodes;
    for (int i = 0; i < opt.polar_nodes; ++i) {
        double c = cx[i], s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int j = 0; j < opt.azimuth_nodes; ++j) {
            double phi = 2.0 * pi * j / opt.azimuth_nodes;
            q.dir.push_back({s * std::cos(phi), s * std::sin(phi), c});
            q.wdir.push_back(cw[i] * waz);
        }
    }
    return q;
}

SphericalQuadrature SphericalQuadrature::refined() const {
    Options o = options;
    o.radial_panels *= 2;
    o.polar_nodes *= 2;
    o.azimuth_nodes *= 2;
    return build(o);
}

double SphericalQuadrature::integrate(const std::function<double(const Vec3&)>& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double rw = wr[i] * r[i] * r[i];
        for (std::size_t a = 0; a < dir.size(); ++a)
            acc += rw * wdir[a] * f(dir[a] * r[i]);
    }
    return acc;
}

cplx SphericalQuadrature::integrate_complex(const std::function<cplx(const Vec3&)>& f) const {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        double rw = wr[i] * r[i] * r[i];
        for (std::size_t a = 0; a < dir.size(); ++a)
            acc += rw * wdir[a] * f(dir[a] * r[i]);
    }
    return acc;
}

QuadratureValidation validate(const SphericalQuadrature& q) {
    const double pi = 3.14159265358979323846;
    const double R = q.options.r_max;
    QuadratureValidation v;
    auto check = [&](double got, double want) {
        double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
        v.worst_relative_error = std::max(v.worst_relative_error, rel);
    };
    // radial moments r^k against closed forms (angular constant)
    for (int k = 0; k <= 4; ++k) {
        double got = q.integrate([k](const Vec3& xi) { return std::pow(norm(xi), k); });
        check(got, 4.0 * pi * std::pow(R, k + 3) / (k + 3));
    }
    // angular degree <= 6 moments: int z^2, z^4, z^6, x^2 y^2 z^2 over the ball
    check(q.integrate([](const Vec3& xi) { return xi.z * xi.z; }),
          4.0 * pi / 3.0 * std::pow(R, 5) / 5.0);
    check(q.integrate([](const Vec3& xi) {
              double c = xi.z * xi.z;
              return c * c;
          }),
          4.0 * pi / 5.0 * std::pow(R, 7) / 7.0);
    check(q.integrate([](const Vec3& xi) {
              double c = xi.z * xi.z;
              return c * c * c;
          }),
          4.0 * pi / 7.0 * std::pow(R, 9) / 9.0);
    check(q.integrate([](const Vec3& xi) {
              return xi.x * xi.x * xi.y * xi.y * xi.z * xi.z;
          }),
          4.0 * pi / 105.0 * std::pow(R, 9) / 9.0);
    // odd moments vanish
    double odd = q.integrate([](const Vec3& xi) { return xi.z * norm(xi); });
    v.worst_relative_error =
        std::max(v.worst_relative_error, std::abs(odd) / std::pow(R, 5));
    v.pass = v.worst_relative_error < 1e-8;
    return v;
}

}  // namespace polaron
