#pragma once

// Free-space convolution K*u for u sampled on a grid and vanishing outside it.
//
// The kernel is truncated at R = 2 L sqrt(d) (the largest distance between two
// grid points), whose Fourier transform is smooth and is sampled on a grid four
// times finer in frequency; the resulting discrete kernel is applied with a
// zero-padded FFT. Accuracy is spectral in the smoothness of u, with none of the
// image-charge error a periodic symbol would introduce.

#include <complex>
#include <span>
#include <vector>

#include "moderate/grid.hpp"
#include "moderate/kernels.hpp"

namespace moderate {

/// Fourier transform of x |x|^{-k} 1_{|x|<R} is i xi m(|xi|); returns m at
/// rho_n = step * sqrt(n) for n = 0..n_max (m at rho = 0 is returned as 0).
std::vector<double> truncated_power_symbol(int d, double k, double R, double step, long n_max);

class FreeSpaceConvolver {
public:
    /// Throws UnsupportedSymbol for kernels without a closed-form transform.
    FreeSpaceConvolver(const KernelSpec& kernel, const GridSpec& grid);

    const KernelSpec& kernel() const { return kernel_; }
    const GridSpec& grid() const { return grid_; }

    /// w (d components, size d G^d) = K*u at grid nodes.
    void apply(std::span<const double> u, std::span<double> w);
    GridField apply(const GridField& u);

private:
    KernelSpec kernel_;
    GridSpec grid_;
    RealFft pad_;
    std::vector<std::vector<std::complex<double>>> hats_;
    std::vector<std::complex<double>> scratch_;
};

}  // namespace moderate
