/* The stability engine: memory matrix M(t) and its half-line Fourier
 * transform, the invertibility certificate, the resolvent kernel K, the
 * Volterra solves, the r-terms, and the oscillatory/dispersive verifiers.
 * Kernel integrals run on continuum spherical quadrature, not the FFT box;
 * a periodic box would contaminate the decay with lattice echoes. */

#include "polaron/memory_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polaron/littlewood_paley.hpp"
#include "polaron/symbols.hpp"

namespace polaron {

namespace {
constexpr double two_pi = 6.283185307179586;
constexpr double inv_two_pi_cubed = 1.0 / (two_pi * two_pi * two_pi);
}  // namespace

std::complex<double> det(const Mat3c& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

Mat3c inverse(const Mat3c& m) {
    cplx d = det(m);
    if (std::abs(d) == 0.0) throw std::runtime_error("Mat3c: singular matrix");
    Mat3c r;
    r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
    r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
    r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
    r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
    r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
    r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
    r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
    r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
    r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
    return r;
}

std::array<double, 3> symmetric_eigenvalues(const Mat3& m_in) {
    Mat3 m = m_in;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(m(0, 1)) + std::abs(m(0, 2)) + std::abs(m(1, 2));
        if (off < 1e-15 * (1.0 + m.max_abs())) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(m(p, q)) < 1e-300) continue;
                double theta = 0.5 * std::atan2(2.0 * m(p, q), m(q, q) - m(p, p));
                double c = std::cos(theta), s = std::sin(theta);
                Mat3 r = Mat3::identity();
                r(p, p) = c; r(q, q) = c; r(p, q) = s; r(q, p) = -s;
                // m <- r^T m r
                Mat3 tmp;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double a = 0.0;
                        for (int k = 0; k < 3; ++k) a += m(i, k) * r(k, j);
                        tmp(i, j) = a;
                    }
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double a = 0.0;
                        for (int k = 0; k < 3; ++k) a += r(k, i) * tmp(k, j);
                        m(i, j) = a;
                    }
            }
    }
    std::array<double, 3> e{m(0, 0), m(1, 1), m(2, 2)};
    std::sort(e.begin(), e.end());
    return e;
}

Mat3 MemoryKernel::at(double t) const {
    if (t < 0.0) return Mat3{};
    double u = t / dt;
    std::size_t k = std::size_t(u);
    if (k + 1 >= samples.size()) return samples.back();
    double f = u - double(k);
    return samples[k] * (1.0 - f) + samples[k + 1] * f;
}

MemoryKernel compute_M(const Vec3& v0, const PotentialSpec& spec, double dt, int k_max,
                       std::shared_ptr<const SphericalQuadrature> quad) {
    if (norm(v0) >= 1.0) throw std::invalid_argument("compute_M: v0 must be subsonic");
    if (!(dt > 0.0) || k_max < 1) throw std::invalid_argument("compute_M: bad sampling");
    MemoryKernel kern;
    kern.dt = dt;
    kern.v0 = v0;
    kern.spec = spec;
    kern.quad = quad;

    const auto& q = *quad;
    const std::size_t nr = q.r.size(), na = q.dir.size();
    const std::size_t nn = nr * na;
    // per-node phase h_v and the six independent coefficients
    std::vector<double> h(nn), c00(nn), c11(nn), c22(nn), c01(nn), c02(nn), c12(nn);
    std::size_t node = 0;
    for (std::size_t i = 0; i < nr; ++i) {
        double rho = q.r[i];
        double w2 = spec.fourier_radial(rho);
        w2 *= w2;
        double base_r = q.wr[i] * rho * rho * symbol_u({rho, 0, 0}) * w2;
        for (std::size_t a = 0; a < na; ++a, ++node) {
            Vec3 xi = q.dir[a] * rho;
            double hv = symbol_h_v(xi, v0);
            h[node] = hv;
            double c = base_r * q.wdir[a] / (hv * hv) * inv_two_pi_cubed;
            c00[node] = c * xi.x * xi.x;
            c11[node] = c * xi.y * xi.y;
            c22[node] = c * xi.z * xi.z;
            c01[node] = c * xi.x * xi.y;
            c02[node] = c * xi.x * xi.z;
            c12[node] = c * xi.y * xi.z;
        }
    }

    // sin(t_k h) by complex rotation, re-synced periodically
    std::vector<double> cs(nn), sn(nn), pc(nn, 1.0), ps(nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
        cs[i] = std::cos(dt * h[i]);
        sn[i] = std::sin(dt * h[i]);
    }
    kern.samples.resize(k_max + 1);
    for (int k = 0; k <= k_max; ++k) {
        if (k > 0) {
            if (k % 512 == 0) {
                for (std::size_t i = 0; i < nn; ++i) {
                    pc[i] = std::cos(k * dt * h[i]);
                    ps[i] = std::sin(k * dt * h[i]);
                }
            } else {
                for (std::size_t i = 0; i < nn; ++i) {
                    double c = pc[i] * cs[i] - ps[i] * sn[i];
                    ps[i] = ps[i] * cs[i] + pc[i] * sn[i];
                    pc[i] = c;
                }
            }
        }
        double m00 = 0, m11 = 0, m22 = 0, m01 = 0, m02 = 0, m12 = 0;
        for (std::size_t i = 0; i < nn; ++i) {
            double s = ps[i];
            m00 += c00[i] * s;
            m11 += c11[i] * s;
            m22 += c22[i] * s;
            m01 += c01[i] * s;
            m02 += c02[i] * s;
            m12 += c12[i] * s;
        }
        Mat3& m = kern.samples[k];
        m(0, 0) = m00; m(1, 1) = m11; m(2, 2) = m22;
        m(0, 1) = m(1, 0) = m01;
        m(0, 2) = m(2, 0) = m02;
        m(1, 2) = m(2, 1) = m12;
    }

    // flag under-resolved radial oscillation at t_max
    double tmax = dt * k_max;
    double worst = 0.0;
    for (std::size_t i = 1; i < nr; ++i) {
        double dphase = tmax * std::abs(symbol_h_v({q.r[i], 0, 0}, {}) -
                                        symbol_h_v({q.r[i - 1], 0, 0}, {}));
        worst = std::max(worst, dphase);
    }
    kern.oscillation_warning = worst > 1.5;  // ~pi/2 per node step
    return kern;
}

namespace {
// the diagonal/off-diagonal weight Q_ij(xi) without the resolvent factor
inline void q_coeffs(const PotentialSpec& spec, const Vec3& v0, const Vec3& xi, double hv,
                     Mat3& out) {
    double rho = norm(xi);
    double w2 = spec.fourier_radial(rho);
    w2 *= w2;
    double c = symbol_u(xi) * w2 / (hv * hv) * inv_two_pi_cubed;
    out(0, 0) = c * xi.x * xi.x;
    out(1, 1) = c * xi.y * xi.y;
    out(2, 2) = c * xi.z * xi.z;
    out(0, 1) = out(1, 0) = c * xi.x * xi.y;
    out(0, 2) = out(2, 0) = c * xi.x * xi.z;
    out(1, 2) = out(2, 1) = c * xi.y * xi.z;
}

double hv_radial_root(const Vec3& dir, const Vec3& v0, double target) {
    // solve rho (<rho> - v.dir) = target; strictly increasing in rho
    double lo = 0.0, hi = 1.0;
    auto f = [&](double rho) { return symbol_h_v(dir * rho, v0) - target; };
    while (f(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-14 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

double hv_radial_deriv(const Vec3& dir, const Vec3& v0, double rho) {
    double br = std::sqrt(1.0 + rho * rho);
    return (1.0 + 2.0 * rho * rho) / br - dot(v0, dir);
}
}  // namespace

Mat3c fourier_M_path_a(const MemoryKernel& kern, double omega, double y) {
    if (y < 0.0) throw std::invalid_argument("fourier_M: need y >= 0 (closed lower half-plane)");
    Mat3c out;
    const double dt = kern.dt;
    for (std::size_t k = 0; k < kern.samples.size(); ++k) {
        double t = k * dt;
        double w = (k == 0 || k + 1 == kern.samples.size()) ? 0.5 * dt : dt;
        cplx ph = std::exp(cplx(-y * t, -omega * t)) * w;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out(i, j) += ph * kern.samples[k](i, j);
    }
    return out;
}

Mat3c fourier_M_path_b(const MemoryKernel& kern, double omega, double y) {
    if (y < 0.0) throw std::invalid_argument("fourier_M: need y >= 0 (closed lower half-plane)");
    if (omega == 0.0 && y == 0.0) {
        // Mhat(0) = int Q / h dxi, integrable at the origin
        Mat3c out;
        const auto& q = *kern.quad;
        Mat3 Q;
        for (std::size_t i = 0; i < q.r.size(); ++i)
            for (std::size_t a = 0; a < q.dir.size(); ++a) {
                Vec3 xi = q.dir[a] * q.r[i];
                double hv = symbol_h_v(xi, kern.v0);
                q_coeffs(kern.spec, kern.v0, xi, hv, Q);
                double w = q.wr[i] * q.r[i] * q.r[i] * q.wdir[a] / hv;
                for (int ii = 0; ii < 3; ++ii)
                    for (int jj = 0; jj < 3; ++jj) out(ii, jj) += w * Q(ii, jj);
            }
        return out;
    }

    const cplx z(omega, -y);
    const auto& q = *kern.quad;
    Mat3c out;
    if (y >= 0.05 || std::abs(omega) < 1e-12) {
        // both resolvent factors regular: direct quadrature of
        // (1/2) int Q [ (h+z)^-1 + (h-z)^-1 ] dxi
        Mat3 Q;
        for (std::size_t i = 0; i < q.r.size(); ++i)
            for (std::size_t a = 0; a < q.dir.size(); ++a) {
                Vec3 xi = q.dir[a] * q.r[i];
                double hv = symbol_h_v(xi, kern.v0);
                q_coeffs(kern.spec, kern.v0, xi, hv, Q);
                cplx res = 0.5 * (1.0 / (hv + z) + 1.0 / (hv - z));
                cplx w = q.wr[i] * q.r[i] * q.r[i] * q.wdir[a] * res;
                for (int ii = 0; ii < 3; ++ii)
                    for (int jj = 0; jj < 3; ++jj) out(ii, jj) += w * Q(ii, jj);
            }
        return out;
    }

    // boundary values on the real line: principal value + residue, ray by ray.
    // the pole sits in (h - z) for omega > 0 and in (h + z) for omega < 0,
    // both at h = |omega| along each direction.
    const double aw = std::abs(omega);
    const double sgn = omega > 0.0 ? 1.0 : -1.0;
    for (std::size_t a = 0; a < q.dir.size(); ++a) {
        const Vec3& th = q.dir[a];
        double rstar = hv_radial_root(th, kern.v0, aw);
        double hprime = hv_radial_deriv(th, kern.v0, rstar);
        Mat3 Qs;
        {
            Vec3 xis = th * rstar;
            double hvs = symbol_h_v(xis, kern.v0);
            q_coeffs(kern.spec, kern.v0, xis, hvs, Qs);
        }
        // g(rho) = rho^2 Q_ij(rho th); pole term g*(rstar) h'(rho)/h'(rstar)
        Mat3 gs = Qs * (rstar * rstar);
        bool in_range = rstar < q.options.r_max;
        Mat3c ray;
        Mat3 Q;
        for (std::size_t i = 0; i < q.r.size(); ++i) {
            double rho = q.r[i];
            Vec3 xi = th * rho;
            double hv = symbol_h_v(xi, kern.v0);
            q_coeffs(kern.spec, kern.v0, xi, hv, Q);
            double w = q.wr[i] * rho * rho;
            // regular resolvent factor: (h + |omega|) for either sign of omega
            cplx reg = 0.5 / (hv + aw);
            for (int ii = 0; ii < 3; ++ii)
                for (int jj = 0; jj < 3; ++jj) ray(ii, jj) += w * Q(ii, jj) * reg;
            // singular factor, subtracted form
            double den = hv - aw;
            if (in_range) {
                double hp = hv_radial_deriv(th, kern.v0, rho);
                for (int ii = 0; ii < 3; ++ii)
                    for (int jj = 0; jj < 3; ++jj) {
                        double num = rho * rho * Q(ii, jj) - gs(ii, jj) * hp / hprime;
                        double val = std::abs(den) > 1e-10 ? num / den : 0.0;
                        ray(ii, jj) += q.wr[i] * 0.5 * val;
                    }
            } else {
                for (int ii = 0; ii < 3; ++ii)
                    for (int jj = 0; jj < 3; ++jj)
                        ray(ii, jj) += q.wr[i] * 0.5 * rho * rho * Q(ii, jj) / den;
            }
        }
        if (in_range) {
            // PV int_0^R h'/(h-w) drho = log|h(R)-w| - log|w|, plus the
            // i pi delta residue with the Lemma-5.4 sign
            double hend = symbol_h_v(th * q.options.r_max, kern.v0);
            double pv_log = std::log(std::abs(hend - aw)) - std::log(aw);
            cplx residue(0.0, -sgn * FourierGrid3::pi / hprime);
            cplx pole_factor = 0.5 * (pv_log / hprime + residue);
            for (int ii = 0; ii < 3; ++ii)
                for (int jj = 0; jj < 3; ++jj)
                    ray(ii, jj) += gs(ii, jj) * pole_factor;
        }
        for (int ii = 0; ii < 3; ++ii)
            for (int jj = 0; jj < 3; ++jj) out(ii, jj) += q.wdir[a] * ray(ii, jj);
    }
    return out;
}

FourierMResult fourier_M(const MemoryKernel& kern, double omega, double y) {
    FourierMResult res;
    res.path_a = fourier_M_path_a(kern, omega, y);
    res.path_b = fourier_M_path_b(kern, omega, y);
    double scale = std::max({res.path_a.max_abs(), res.path_b.max_abs(), 1e-300});
    double diff = 0.0;
    for (int i = 0; i < 9; ++i)
        diff = std::max(diff, std::abs(res.path_a.a[i] - res.path_b.a[i]));
    res.discrepancy = diff / scale;
    res.resolution_failure = res.discrepancy > 1e-3;
    return res;
}

InvertibilityReport check_invertibility(const MemoryKernel& kern,
                                        const std::vector<double>& omegas) {
    InvertibilityReport rep;
    rep.min_abs_det = std::numeric_limits<double>::infinity();
    std::vector<double> oms = omegas;
    if (std::find(oms.begin(), oms.end(), 0.0) == oms.end()) oms.insert(oms.begin(), 0.0);
    rep.all_signs_ok = true;
    for (double omega : oms) {
        InvertibilityRecord rec;
        rec.omega = omega;
        Mat3c Mh = fourier_M_path_b(kern, omega, 0.0);
        Mat3 re, im;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                re(i, j) = 0.5 * (Mh(i, j).real() + Mh(j, i).real());
                im(i, j) = 0.5 * (Mh(i, j).imag() + Mh(j, i).imag());
            }
        Mat3 one_plus_re = re + Mat3::identity();
        rec.herm_eigs = symmetric_eigenvalues(one_plus_re);
        rec.imag_eigs = symmetric_eigenvalues(im);
        rec.abs_det = std::abs(det(Mh + Mat3c::identity()));
        rep.min_abs_det = std::min(rep.min_abs_det, rec.abs_det);
        if (omega == 0.0) {
            auto e0 = symmetric_eigenvalues(re);
            rep.mhat0_positive_definite = e0[0] > 0.0;
            rec.sign_ok = rep.mhat0_positive_definite;
        } else if (omega > 0.0) {
            rec.sign_ok = rec.imag_eigs[2] < 0.0;  // strictly negative definite
        } else {
            rec.sign_ok = rec.imag_eigs[0] > 0.0;  // strictly positive definite
        }
        rep.all_signs_ok = rep.all_signs_ok && rec.sign_ok;
        rep.records.push_back(rec);
    }
    return rep;
}

namespace {
// trapezoidal convolution value (f*g)(t_k) for causal sampled matrix series
Mat3 conv_at(const std::vector<Mat3>& f, const std::vector<Mat3>& g, double dt,
             std::size_t k) {
    Mat3 acc;
    for (std::size_t m = 0; m <= k; ++m) {
        double w = (m == 0 || m == k) ? 0.5 * dt : dt;
        const Mat3& A = f[k - m];
        const Mat3& B = g[m];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int l = 0; l < 3; ++l) s += A(i, l) * B(l, j);
                acc(i, j) += w * s;
            }
    }
    return acc;
}
}  // namespace

ResolventKernel compute_K(const MemoryKernel& kern, const ResolventOptions& opt) {
    ResolventKernel K;
    K.dt = kern.dt;
    const std::size_t nk = kern.samples.size();

    const double dw = two_pi / opt.alias_period;
    const int n_half = int(std::ceil(opt.omega_max / dw));
    // Mhat on the omega grid from path A (mirror for negative omega)
    std::vector<Mat3c> Mh(n_half + 1);
    for (int j = 0; j <= n_half; ++j) Mh[j] = fourier_M_path_a(kern, j * dw, 0.0);
    if (Mh[n_half].max_abs() > 1e-3)
        throw std::invalid_argument("compute_K: |Mhat| at the omega-grid end exceeds 1e-3");

    // Khat = -Mhat + Mhat^2 - Mhat^3 (1+Mhat)^{-1}; the first two terms invert
    // exactly causally in the t-domain, the remainder decays like omega^-6 and
    // is inverted on the tapered grid
    const double taper_start = 0.75 * opt.omega_max;
    auto taper = [&](double w) {
        double a = (std::abs(w) - taper_start) / (opt.omega_max - taper_start);
        return 1.0 - smooth_step(a);
    };
    std::vector<Mat3c> R3(n_half + 1);
    for (int j = 0; j <= n_half; ++j) {
        Mat3c m2 = Mh[j] * Mh[j];
        Mat3c m3 = m2 * Mh[j];
        Mat3c r = m3 * inverse(Mh[j] + Mat3c::identity());
        double tp = taper(j * dw);
        for (auto& v : r.a) v *= -tp;
        R3[j] = r;
    }

    auto remainder_at = [&](double t) {
        // (dw / 2 pi) sum_j R3(w_j) e^{i w_j t}, using conjugate symmetry
        Mat3 acc;
        for (int j = 0; j <= n_half; ++j) {
            double w = j == 0 ? 1.0 : 2.0;
            cplx ph = std::exp(cplx(0.0, j * dw * t));
            for (int ii = 0; ii < 3; ++ii)
                for (int jj = 0; jj < 3; ++jj)
                    acc(ii, jj) += w * (R3[j](ii, jj) * ph).real();
        }
        return acc * (dw / two_pi);
    };

    K.samples.resize(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        Mat3 mm = conv_at(kern.samples, kern.samples, kern.dt, k);
        K.samples[k] = kern.samples[k] * (-1.0) + mm + remainder_at(k * kern.dt);
    }
    for (const auto& m : K.samples) K.peak = std::max(K.peak, m.max_abs());

    // negative-time probes reconstruct only the remainder (the exact pieces
    // vanish for t < 0 by construction)
    double neg = 0.0;
    for (double t : {-20.0, -15.0, -10.0, -5.0, -2.0, -1.0, -0.5})
        neg = std::max(neg, remainder_at(t).max_abs());
    K.causality_residual = neg / std::max(K.peak, 1e-300);
    if (K.causality_residual > 1e-6)
        throw std::runtime_error("compute_K: causality residual exceeds 1e-6 of peak "
                                 "(omega-grid aliasing)");

    // cross-check: K = -M - M*K solved by forward substitution
    {
        std::vector<Mat3> Ks(nk);
        for (std::size_t k = 0; k < nk; ++k) {
            Mat3 rhs = kern.samples[k] * (-1.0);
            Mat3 acc;
            for (std::size_t m = 1; m < k; ++m) {
                const Mat3& A = kern.samples[k - m];
                const Mat3& B = Ks[m];
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double s = 0.0;
                        for (int l = 0; l < 3; ++l) s += A(i, l) * B(l, j);
                        acc(i, j) += kern.dt * s;
                    }
            }
            if (k > 0) {
                const Mat3& A = kern.samples[k];
                const Mat3& B = Ks[0];
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double s = 0.0;
                        for (int l = 0; l < 3; ++l) s += A(i, l) * B(l, j);
                        acc(i, j) += 0.5 * kern.dt * s;
                    }
            }
            // M(0) = 0 makes the update explicit
            Ks[k] = rhs - acc;
        }
        double diff = 0.0;
        for (std::size_t k = 0; k < nk; ++k)
            diff = std::max(diff, (K.samples[k] - Ks[k]).max_abs());
        K.series_discrepancy = diff / std::max(K.peak, 1e-300);
    }
    return K;
}

std::vector<Vec3> solve_volterra(const MemoryKernel& kern, const std::vector<Vec3>& r) {
    const double dt = kern.dt;
    std::vector<Vec3> v(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        Vec3 acc{};
        for (std::size_t m = 0; m < k; ++m) {
            double w = (m == 0) ? 0.5 * dt : dt;
            acc += kern.at((k - m) * dt) * v[m] * w;
        }
        // (1 + dt/2 M(0)) v_k = r_k - acc ; M(0) = 0 for this kernel family but
        // solve generally
        Mat3 lhs = Mat3::identity() + kern.samples[0] * (0.5 * dt);
        Mat3c lhc;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) lhc(i, j) = lhs(i, j);
        Mat3c inv = inverse(lhc);
        Vec3 rhs = r[k] - acc;
        Vec3 out{};
        for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) s += inv(i, j).real() * rhs[j];
            out[i] = s;
        }
        v[k] = out;
    }
    return v;
}

std::vector<Vec3> apply_resolvent(const ResolventKernel& K, const std::vector<Vec3>& r,
                                  double dt) {
    if (std::abs(dt - K.dt) > 1e-12)
        throw std::invalid_argument("apply_resolvent: dt mismatch with kernel sampling");
    std::vector<Vec3> out(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        Vec3 acc{};
        for (std::size_t m = 0; m <= k; ++m) {
            double w = (m == 0 || m == k) ? 0.5 * dt : dt;
            std::size_t j = k - m;
            if (j < K.samples.size()) acc += K.samples[j] * r[m] * w;
        }
        out[k] = r[k] + acc;
    }
    return out;
}

Vec3 compute_r0(double t, const ComplexField& D0_spectral, const ComplexField& What_spectral,
                const Vec3& X_t) {
    const GridPtr& grid = D0_spectral.grid();
    Vec3 out{};
    for (std::size_t i = 1; i < grid->size(); ++i) {
        Vec3 xi = grid->wavevector(i);
        double h = symbol_h(xi);
        double ph_w = -dot(xi, X_t);
        cplx lhs = cplx(0.0, 1.0) * What_spectral[i].real() *
                   cplx(std::cos(ph_w), std::sin(ph_w));
        cplx rhs = symbol_u(xi) * cplx(std::cos(t * h), -std::sin(t * h)) * D0_spectral[i];
        cplx val = lhs * std::conj(rhs);
        out.x += xi.x * val.real();
        out.y += xi.y * val.real();
        out.z += xi.z * val.real();
    }
    return out * grid->mode_weight();
}

namespace {
struct HistoryArrays {
    std::vector<double> t;    // sample times
    std::vector<Vec3> v;      // velocities
    std::vector<Vec3> a;      // accelerations (recorded force)
    std::vector<Vec3> cumv;   // int_0^s v
};

HistoryArrays history_from(const Trajectory& traj, int stride) {
    HistoryArrays h;
    for (std::size_t i = 0; i < traj.samples.size(); i += stride) {
        h.t.push_back(traj.samples[i].t);
        h.v.push_back(traj.samples[i].P);
        h.a.push_back(traj.samples[i].accel);
    }
    h.cumv.resize(h.t.size());
    Vec3 acc{};
    for (std::size_t i = 1; i < h.t.size(); ++i) {
        acc += (h.v[i - 1] + h.v[i]) * (0.5 * (h.t[i] - h.t[i - 1]));
        h.cumv[i] = acc;
    }
    return h;
}

void r12_at(const HistoryArrays& hist, const ComplexField& What, const GridPtr& grid,
            const Vec3& v0, double t, Vec3& r1, Vec3& r2) {
    // locate the sample window [0, t]
    std::size_t n = 0;
    while (n + 1 < hist.t.size() && hist.t[n + 1] <= t + 1e-12) ++n;
    if (n == 0) {
        r1 = r2 = Vec3{};
        return;
    }
    Vec3 cum_t = hist.cumv[n];
    double t_end = hist.t[n];

    Vec3 acc1{}, acc2{};
    for (std::size_t i = 1; i < grid->size(); ++i) {
        Vec3 xi = grid->wavevector(i);
        double w = What[i].real();
        double u = symbol_u(xi);
        double hv0 = symbol_h_v(xi, v0);
        // tau-prefix for r2: int_0^{s_m} h_{v_tau}^{-3} (xi.a_tau) dtau
        double prefix = 0.0;
        cplx s1 = 0.0, s2 = 0.0;
        for (std::size_t m = 0; m <= n; ++m) {
            double wm = (m == 0 || m == n) ? 0.5 : 1.0;
            double dtm = m == 0 ? (hist.t[1] - hist.t[0]) : (hist.t[m] - hist.t[m - 1]);
            double wt = wm * dtm;
            double s = hist.t[m];
            double hvs = symbol_h_v(xi, hist.v[m]);
            double xa = dot(xi, hist.a[m]);
            // r1 integrand: a(s,t) = int_s^t (v - v0)
            Vec3 a_vec = (cum_t - hist.cumv[m]) - v0 * (t_end - s);
            double phase_a = -dot(a_vec, xi);
            cplx shift = cplx(std::cos(phase_a), std::sin(phase_a)) - 1.0;
            double ph = (t_end - s) * hv0;
            cplx prop(std::cos(ph), std::sin(ph));  // e^{+i(t-s)h_{v0}}
            s1 += wt * prop * shift * (xa / (hvs * hvs));
            s2 += wt * prop * xa * prefix;
            if (m < n) {
                double hv_n = symbol_h_v(xi, hist.v[m + 1]);
                double f_m = xa / (hvs * hvs * hvs);
                double f_n = dot(xi, hist.a[m + 1]) / (hv_n * hv_n * hv_n);
                prefix += 0.5 * (hist.t[m + 1] - hist.t[m]) * (f_m + f_n);
            }
        }
        // r1_k = Re[ i xi_k W * (-1) u W s1 ],  r2_k = 2 Re[ i xi_k u W^2 s2 ]
        double c1 = (cplx(0.0, 1.0) * (-u * w * w) * s1).real();
        double c2 = (2.0 * cplx(0.0, 1.0) * u * w * w * s2).real();
        acc1 += xi * c1;
        acc2 += xi * c2;
    }
    double mw = grid->mode_weight();
    r1 = acc1 * mw;
    r2 = acc2 * mw;
}
}  // namespace

std::vector<R12Sample> compute_r12(const Trajectory& traj, const ComplexField& What_spectral,
                                   const GridPtr& grid, const Vec3& v0,
                                   const std::vector<double>& sample_times) {
    if (sample_times.size() > 5)
        throw std::invalid_argument("compute_r12: at most 5 sample times (cost control)");
    HistoryArrays full = history_from(traj, 1);
    HistoryArrays half = history_from(traj, 2);
    std::vector<R12Sample> out;
    for (double t : sample_times) {
        R12Sample s;
        s.t = t;
        Vec3 r1h, r2h;
        r12_at(full, What_spectral, grid, v0, t, s.r1, s.r2);
        r12_at(half, What_spectral, grid, v0, t, r1h, r2h);
        double scale = std::max({norm(s.r1), norm(s.r2), 1e-300});
        s.step_halving_error = std::max(norm(s.r1 - r1h), norm(s.r2 - r2h)) / scale;
        out.push_back(s);
    }
    return out;
}

OscillatoryResult oscillatory_decay(int l, const std::function<double(const Vec3&)>& m,
                                    const Vec3& v, const PotentialSpec& f,
                                    const PotentialSpec& g, const std::vector<double>& t_grid,
                                    const SphericalQuadrature& quad) {
    if (norm(v) >= 1.0) throw std::invalid_argument("oscillatory_decay: v must be subsonic");
    OscillatoryResult res;
    for (double t : t_grid) {
        cplx val = quad.integrate_complex([&](const Vec3& xi) {
            double rho = norm(xi);
            double ph = t * symbol_h_v(xi, v);
            return std::pow(rho, l) * m(xi) * f.fourier_radial(rho) * g.fourier_radial(rho) *
                   cplx(std::cos(ph), -std::sin(ph));
        });
        res.t.push_back(t);
        res.magnitude.push_back(std::abs(val));
    }
    res.fit = fit_loglog(res.t, res.magnitude);
    double tmax = *std::max_element(t_grid.begin(), t_grid.end());
    double worst = 0.0;
    for (std::size_t i = 1; i < quad.r.size(); ++i)
        worst = std::max(worst, tmax * std::abs(symbol_h({quad.r[i], 0, 0}) -
                                                symbol_h({quad.r[i - 1], 0, 0})));
    res.oscillation_warning = worst > 1.5;
    return res;
}

OscillatoryResult even_oscillatory_decay(const Vec3& v, const PotentialSpec& f,
                                         const std::vector<double>& t_grid,
                                         const SphericalQuadrature& quad) {
    if (norm(v) >= 1.0)
        throw std::invalid_argument("even_oscillatory_decay: v must be subsonic");
    OscillatoryResult res;
    for (double t : t_grid) {
        double val = quad.integrate([&](const Vec3& xi) {
            double rho = norm(xi);
            double hv = symbol_h_v(xi, v);
            double w = f.fourier_radial(rho);
            return xi.z * xi.z * symbol_u(xi) * w * w / (hv * hv) * std::sin(t * hv);
        });
        res.t.push_back(t);
        res.magnitude.push_back(std::abs(val) * inv_two_pi_cubed);
    }
    res.fit = fit_loglog(res.t, res.magnitude);
    return res;
}

DispersiveResult dispersive_decay(const ComplexField& f, int band, double sigma,
                                  const std::vector<double>& t_grid) {
    if (sigma < 0.0 || sigma > 1.0)
        throw std::invalid_argument("dispersive_decay: sigma must lie in [0, 1]");
    const GridPtr& grid = f.grid();
    double t_wrap = 0.4 * grid->length();
    for (double t : t_grid)
        if (t > t_wrap)
            throw std::invalid_argument("dispersive_decay: t beyond the wrap-around horizon");

    ComplexField base = lp_project(f, band);
    DispersiveResult res;
    for (double t : t_grid) {
        ComplexField evolved = base;
        const int n = grid->n();
        const auto& xi = grid->axis_wavenumbers();
        std::size_t idx = 0;
        for (int iz = 0; iz < n; ++iz)
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix, ++idx) {
                    if (idx == 0) {
                        evolved[0] = 0.0;
                        continue;
                    }
                    double h = symbol_h({xi[ix], xi[iy], xi[iz]});
                    cplx mult = std::pow(h, -sigma) * cplx(std::cos(t * h), -std::sin(t * h));
                    evolved[idx] *= mult;
                }
        double sup = to_physical(evolved).max_abs();
        res.t.push_back(t);
        res.sup_norm.push_back(sup);
        res.compensated.push_back(std::pow(t, 1.5 - sigma) * sup);
    }
    res.compensated_fit = fit_loglog(res.t, res.compensated);
    std::vector<double> sorted = res.compensated;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    res.spread = *std::max_element(sorted.begin(), sorted.end()) / std::max(median, 1e-300);
    return res;
}

}  // namespace polaron
