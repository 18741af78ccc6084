/* FFT-backed field transforms. FFTW plans are cached per grid size and
 * executed single threaded, so results are bitwise independent of the
 * caller's threading. */

#include "polaron/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace polaron {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;
std::map<int, PlanPair>& plan_cache() {
    static std::map<int, PlanPair> cache;
    return cache;
}

PlanPair& plans_for(int n) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    // x-fastest storage maps to FFTW dims (z, y, x)
    std::vector<fftw_complex> buf(std::size_t(n) * n * n);
    PlanPair p;
    p.fwd = fftw_plan_dft_3d(n, n, n, buf.data(), buf.data(), FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_3d(n, n, n, buf.data(), buf.data(), FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.fwd || !p.bwd) throw std::runtime_error("fftw plan creation failed");
    return cache.emplace(n, p).first->second;
}

// (-1)^{ix+iy+iz}: shifts the transform to centered box coordinates
void apply_parity(int n, std::vector<cplx>& data) {
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix, ++idx)
                if ((ix + iy + iz) & 1) data[idx] = -data[idx];
}

}  // namespace

ComplexField::ComplexField(GridPtr grid, Representation rep, std::vector<cplx> data)
    : grid_(std::move(grid)), rep_(rep), data_(std::move(data)) {
    if (data_.size() != grid_->size()) throw std::invalid_argument("field: size mismatch");
}

void fft_forward(const FourierGrid3& g, std::vector<cplx>& data) {
    auto& p = plans_for(g.n());
    fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
    apply_parity(g.n(), data);
    const double cv = g.cell_volume();
    for (auto& v : data) v *= cv;
}

void fft_backward(const FourierGrid3& g, std::vector<cplx>& data) {
    apply_parity(g.n(), data);
    auto& p = plans_for(g.n());
    fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
    const double L = g.length();
    const double s = 1.0 / (L * L * L);
    for (auto& v : data) v *= s;
}

ComplexField to_spectral(const ComplexField& f) {
    if (f.representation() == Representation::Spectral) return f;
    ComplexField out(f.grid(), Representation::Spectral, f.data());
    fft_forward(*f.grid(), out.data());
    return out;
}

ComplexField to_physical(const ComplexField& f) {
    if (f.representation() == Representation::Physical) return f;
    ComplexField out(f.grid(), Representation::Physical, f.data());
    fft_backward(*f.grid(), out.data());
    return out;
}

double ComplexField::l2_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    const double w = rep_ == Representation::Physical ? grid_->cell_volume()
                                                      : grid_->mode_weight();
    return std::sqrt(s * w);
}

double ComplexField::max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

double ComplexField::max_abs_real() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v.real()));
    return m;
}

double ComplexField::max_abs_imag() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v.imag()));
    return m;
}

ComplexField& ComplexField::operator+=(const ComplexField& o) {
    if (!(*grid_ == *o.grid_) || rep_ != o.rep_)
        throw std::invalid_argument("field +=: incompatible operands");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& o) {
    if (!(*grid_ == *o.grid_) || rep_ != o.rep_)
        throw std::invalid_argument("field -=: incompatible operands");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

ComplexField& ComplexField::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

double l2_distance(const ComplexField& a, const ComplexField& b) {
    if (!(*a.grid() == *b.grid()) || a.representation() != b.representation())
        throw std::invalid_argument("l2_distance: incompatible fields");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    const double w = a.representation() == Representation::Physical
                         ? a.grid()->cell_volume()
                         : a.grid()->mode_weight();
    return std::sqrt(s * w);
}

}  // namespace polaron
