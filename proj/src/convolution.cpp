#include "moderate/convolution.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "moderate/errors.hpp"

namespace moderate {

namespace {

template <class F>
void for_each_index(int d, int n, F&& f) {
    std::array<int, 3> idx{0, 0, 0};
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
    for (std::size_t flat = 0; flat < total; ++flat) {
        f(flat, idx.data());
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < n) break;
            idx[a] = 0;
        }
    }
}

std::size_t flat_of(int d, int n, const int* idx) {
    std::size_t f = 0;
    for (int a = 0; a < d; ++a) f = f * n + idx[a];
    return f;
}

int wrap(int m, int n) { return ((m % n) + n) % n; }

const GridSpec& validated(const GridSpec& g) {
    g.validate();
    return g;
}

}  // namespace

std::vector<double> truncated_power_symbol(int d, double k, double R, double step, long n_max) {
    // m(rho) = -(2 pi)^{d/2} rho^{k-d-2} Phi(rho R),  Phi(Z) = int_0^Z z^{d/2+1-k} J_{d/2}(z) dz
    const double nu = 0.5 * d;
    const double mu = 0.5 * d + 1.0 - k;
    auto bessel = [d, nu](double z) {
        switch (d) {
            case 1: return std::sqrt(2.0 / (std::numbers::pi * z)) * std::sin(z);
            case 2: return ::j1(z);
            case 3: return std::sqrt(2.0 / (std::numbers::pi * z)) * (std::sin(z) / z - std::cos(z));
            default: return std::cyl_bessel_j(nu, z);
        }
    };
    auto integrand = [&](double z) { return std::pow(z, mu) * bessel(z); };
    auto series = [&](double Z) {
        double acc = 0.0;
        for (int m = 0; m < 40; ++m) {
            const double e = 2.0 * m + nu + mu + 1.0;
            const double term = (m % 2 ? -1.0 : 1.0) / (std::tgamma(m + 1.0) * std::tgamma(m + nu + 1.0)) *
                                std::pow(2.0, -(2.0 * m + nu)) * std::pow(Z, e) / e;
            acc += term;
            if (std::abs(term) < 1e-18 * std::abs(acc)) break;
        }
        return acc;
    };
    auto panels = [&](double a, double b) {
        // consecutive sample points are usually much closer than one oscillation
        if (b - a < 0.1) return boost::math::quadrature::gauss<double, 5>::integrate(integrand, a, b);
        double acc = 0.0;
        const int n = std::max(1, static_cast<int>(std::ceil(b - a)));
        for (int i = 0; i < n; ++i) {
            const double lo = a + (b - a) * i / n, hi = a + (b - a) * (i + 1) / n;
            acc += boost::math::quadrature::gauss<double, 10>::integrate(integrand, lo, hi);
        }
        return acc;
    };

    const double series_edge = 2.0;
    const double pref = -std::pow(2.0 * std::numbers::pi, nu);
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    double z_prev = 0.0, phi = 0.0;
    for (long n = 1; n <= n_max; ++n) {
        const double rho = step * std::sqrt(static_cast<double>(n));
        const double Z = rho * R;
        if (Z <= series_edge) {
            phi = series(Z);
        } else if (z_prev < series_edge) {
            phi = series(series_edge) + panels(series_edge, Z);
        } else {
            phi += panels(z_prev, Z);
        }
        z_prev = Z;
        out[n] = pref * std::pow(rho, k - d - 2.0) * phi;
    }
    return out;
}

FreeSpaceConvolver::FreeSpaceConvolver(const KernelSpec& kernel, const GridSpec& grid)
    : kernel_(kernel), grid_(validated(grid)), pad_(grid.d, 2 * grid.G) {
    if (kernel.dim() != grid.d) throw ValidationError("kernel and grid dimensions differ");
    if (!kernel.has_symbol()) {
        throw UnsupportedSymbol("no closed-form Fourier symbol for " + kernel.describe() + "; use particle mode");
    }
    const int d = grid.d, G = grid.G;
    const double dx = grid.dx();
    hats_.assign(d, std::vector<std::complex<double>>(pad_.spectral_size(), {0.0, 0.0}));
    scratch_.resize(pad_.spectral_size());
    if (kernel.terms().empty()) return;

    const int nf = 4 * G;
    const double period = nf * dx;
    const double step = 2.0 * std::numbers::pi / period;
    const double R = 2.0 * grid.L * std::sqrt(static_cast<double>(d));
    const long n_max = static_cast<long>(d) * (2L * G) * (2L * G);
    std::vector<double> m(n_max + 1, 0.0);
    for (const auto& t : kernel.terms()) {
        auto mk = truncated_power_symbol(d, t.k, R, step, n_max);
        for (long n = 0; n <= n_max; ++n) m[n] += t.coef * mk[n];
    }

    RealFft fine(d, nf);
    const double kernel_scale = std::pow(dx, d) / std::pow(period, d) / static_cast<double>(pad_.real_size());
    for (int c = 0; c < d; ++c) {
        auto spec = fine.spectrum();
        for_each_mode(d, nf, [&](std::size_t flat, const int* idx) {
            long n2 = 0;
            bool nyquist = false;
            for (int a = 0; a < d; ++a) {
                n2 += static_cast<long>(idx[a]) * idx[a];
                nyquist = nyquist || std::abs(idx[a]) == nf / 2;
            }
            if (nyquist || n2 == 0) {
                spec[flat] = {0.0, 0.0};
                return;
            }
            // sigma = i xi m, or i xi_perp m for rotational kernels
            double xi_c;
            if (kernel.rotational()) {
                xi_c = c == 0 ? -idx[1] * step : idx[0] * step;
            } else {
                xi_c = idx[c] * step;
            }
            spec[flat] = {0.0, xi_c * m[n2]};
        });
        fine.inverse();
        auto real = fine.real();
        auto pad = pad_.real();
        for_each_index(d, 2 * G, [&](std::size_t flat, const int* p) {
            int f[3];
            for (int a = 0; a < d; ++a) f[a] = wrap(signed_index(p[a], 2 * G), nf);
            pad[flat] = real[flat_of(d, nf, f)] * kernel_scale;
        });
        pad_.forward();
        auto hs = pad_.spectrum();
        std::copy(hs.begin(), hs.end(), hats_[c].begin());
    }
}

void FreeSpaceConvolver::apply(std::span<const double> u, std::span<double> w) {
    const int d = grid_.d, G = grid_.G;
    const std::size_t n = grid_.size();
    if (u.size() != n || w.size() != d * n) throw std::invalid_argument("FreeSpaceConvolver::apply: size mismatch");
    if (kernel_.terms().empty()) {
        std::fill(w.begin(), w.end(), 0.0);
        return;
    }
    auto pad = pad_.real();
    std::fill(pad.begin(), pad.end(), 0.0);
    for_each_index(d, G, [&](std::size_t flat, const int* idx) { pad[flat_of(d, 2 * G, idx)] = u[flat]; });
    pad_.forward();
    auto spec = pad_.spectrum();
    std::copy(spec.begin(), spec.end(), scratch_.begin());
    for (int c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < scratch_.size(); ++i) spec[i] = scratch_[i] * hats_[c][i];
        pad_.inverse();
        auto out = w.subspan(c * n, n);
        for_each_index(d, G, [&](std::size_t flat, const int* idx) { out[flat] = pad[flat_of(d, 2 * G, idx)]; });
    }
}

GridField FreeSpaceConvolver::apply(const GridField& u) {
    if (!(u.grid == grid_) || u.components != 1) throw std::invalid_argument("FreeSpaceConvolver::apply: grid mismatch");
    GridField w(grid_, grid_.d);
    w.t = u.t;
    apply(u.values, w.values);
    return w;
}

}  // namespace moderate
