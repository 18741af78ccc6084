#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "polaron/vec3.hpp"

namespace polaron {

// Periodic box [-L/2, L/2)^3 sampled on N^3 points, x-fastest storage.
// Wavenumbers follow FFT ordering: k = 0..N/2-1, -N/2..-1, xi = 2*pi*k/L.
class FourierGrid3 {
public:
    FourierGrid3(int n, double length) : n_(n), length_(length) {
        if (n < 8 || n % 2 != 0) throw std::invalid_argument("grid: N must be even and >= 8");
        if (!(length > 0.0)) throw std::invalid_argument("grid: L must be positive");
        xi_.resize(n);
        for (int i = 0; i < n; ++i) {
            int k = i < n / 2 ? i : i - n;
            xi_[i] = 2.0 * pi * k / length;
        }
    }

    int n() const { return n_; }
    double length() const { return length_; }
    std::size_t size() const { return std::size_t(n_) * n_ * n_; }
    double cell_volume() const { double d = length_ / n_; return d * d * d; }
    double spacing() const { return length_ / n_; }
    // weight of one spectral mode in (2pi)^-3 int dxi
    double mode_weight() const { return 1.0 / (length_ * length_ * length_); }
    double xi_spacing() const { return 2.0 * pi / length_; }
    double xi_max() const { return 2.0 * pi * (n_ / 2 - 1) / length_; }

    const std::vector<double>& axis_wavenumbers() const { return xi_; }

    std::size_t index(int ix, int iy, int iz) const {
        return std::size_t(ix) + std::size_t(n_) * (std::size_t(iy) + std::size_t(n_) * iz);
    }
    Vec3 wavevector(std::size_t idx) const {
        int ix = int(idx % n_), iy = int((idx / n_) % n_), iz = int(idx / (std::size_t(n_) * n_));
        return {xi_[ix], xi_[iy], xi_[iz]};
    }
    // physical sample point, centered coordinates
    Vec3 position(std::size_t idx) const {
        int ix = int(idx % n_), iy = int((idx / n_) % n_), iz = int(idx / (std::size_t(n_) * n_));
        double d = length_ / n_, h = 0.5 * length_;
        return {ix * d - h, iy * d - h, iz * d - h};
    }

    bool operator==(const FourierGrid3& o) const { return n_ == o.n_ && length_ == o.length_; }

    static constexpr double pi = 3.14159265358979323846;

private:
    int n_;
    double length_;
    std::vector<double> xi_;
};

using GridPtr = std::shared_ptr<const FourierGrid3>;

inline GridPtr make_grid(int n, double length) {
    return std::make_shared<const FourierGrid3>(n, length);
}

}  // namespace polaron
