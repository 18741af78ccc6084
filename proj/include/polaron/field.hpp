#pragma once

#include <complex>
#include <vector>

#include "polaron/grid.hpp"

namespace polaron {

enum class Representation { Physical, Spectral };

using cplx = std::complex<double>;

// Complex scalar samples on a FourierGrid3.
//
// Normalization: the forward transform carries the cell volume (L/N)^3 so
// spectral samples approximate the continuum transform int f(x) e^{-i x.xi} dx
// over the centered box; the inverse carries 1/L^3 per mode. Discrete Parseval
// ||f||_L2(phys) == ||f||_L2(spec) holds exactly.
class ComplexField {
public:
    ComplexField(GridPtr grid, Representation rep)
        : grid_(std::move(grid)), rep_(rep), data_(grid_->size()) {}
    ComplexField(GridPtr grid, Representation rep, std::vector<cplx> data);

    const GridPtr& grid() const { return grid_; }
    Representation representation() const { return rep_; }
    std::vector<cplx>& data() { return data_; }
    const std::vector<cplx>& data() const { return data_; }
    cplx& operator[](std::size_t i) { return data_[i]; }
    cplx operator[](std::size_t i) const { return data_[i]; }
    std::size_t size() const { return data_.size(); }

    double l2_norm() const;
    double max_abs() const;
    double max_abs_real() const;
    double max_abs_imag() const;

    ComplexField& operator+=(const ComplexField& o);
    ComplexField& operator-=(const ComplexField& o);
    ComplexField& operator*=(cplx s);

private:
    GridPtr grid_;
    Representation rep_;
    std::vector<cplx> data_;
};

ComplexField to_spectral(const ComplexField& f);
ComplexField to_physical(const ComplexField& f);
// in-place transforms of the raw sample vector (x-fastest layout)
void fft_forward(const FourierGrid3& g, std::vector<cplx>& data);
void fft_backward(const FourierGrid3& g, std::vector<cplx>& data);

double l2_distance(const ComplexField& a, const ComplexField& b);

}  // namespace polaron
