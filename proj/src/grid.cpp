#include "moderate/grid.hpp"

#include <fftw3.h>

#include <mutex>
#include <string>

#include "moderate/errors.hpp"

namespace moderate {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

}  // namespace

std::size_t GridSpec::size() const { return ipow(static_cast<std::size_t>(G), d); }

void GridSpec::validate() const {
    if (d < 1 || d > 3) throw ValidationError("grid dimension must be 1, 2 or 3 (got " + std::to_string(d) + ")");
    if (G < 4 || (G & (G - 1)) != 0) throw ValidationError("grid.g must be a power of two >= 4 (got " + std::to_string(G) + ")");
    if (!(L > 0.0)) throw ValidationError("grid.l must be > 0");
}

GridField::GridField(const GridSpec& g, int comps) : grid(g), components(comps), values(g.size() * comps, 0.0) {}

std::span<double> GridField::component(int c) {
    const std::size_t n = grid.size();
    return {values.data() + c * n, n};
}

std::span<const double> GridField::component(int c) const {
    const std::size_t n = grid.size();
    return {values.data() + c * n, n};
}

RealFft::RealFft(int d, int n) : d_(d), n_(n) {
    real_size_ = ipow(n, d);
    spec_size_ = ipow(n, d - 1) * (n / 2 + 1);
    int dims[3] = {n, n, n};
    std::lock_guard lock(planner_mutex());
    real_ = fftw_alloc_real(real_size_);
    auto* spec = fftw_alloc_complex(spec_size_);
    spec_ = spec;
    fwd_ = fftw_plan_dft_r2c(d, dims, real_, spec, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r(d, dims, spec, real_, FFTW_ESTIMATE);
    for (std::size_t i = 0; i < real_size_; ++i) real_[i] = 0.0;
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(real_);
    fftw_free(spec_);
}

std::span<std::complex<double>> RealFft::spectrum() {
    return {reinterpret_cast<std::complex<double>*>(spec_), spec_size_};
}

void RealFft::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }

void RealFft::inverse() { fftw_execute(static_cast<fftw_plan>(inv_)); }

}  // namespace moderate
