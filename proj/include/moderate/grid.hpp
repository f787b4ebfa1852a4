#pragma once

// Uniform grids on [-L, L)^d, sampled fields and FFTW-backed real transforms.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace moderate {

struct GridSpec {
    int d = 1;
    int G = 64;  // points per axis, power of two
    double L = 1.0;

    double dx() const { return 2.0 * L / G; }
    std::size_t size() const;
    double coord(int i) const { return -L + i * dx(); }
    /// Throws ValidationError on d outside 1..3, G not a power of two >= 4, L <= 0.
    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

/// Scalar or vector field on a grid; components are stored one after another,
/// each in row-major order (last axis fastest).
struct GridField {
    GridSpec grid;
    int components = 1;
    double t = 0.0;
    std::vector<double> values;

    GridField() = default;
    GridField(const GridSpec& g, int comps = 1);

    std::span<double> component(int c);
    std::span<const double> component(int c) const;
};

/// Real-to-complex transform of an n^d array, with owned FFTW buffers and
/// estimate-mode plans (deterministic). Not safe for concurrent use of one object.
class RealFft {
public:
    RealFft(int d, int n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    int dim() const { return d_; }
    int n() const { return n_; }
    std::size_t real_size() const { return real_size_; }
    /// Half-spectrum size n^{d-1} (n/2 + 1).
    std::size_t spectral_size() const { return spec_size_; }

    std::span<double> real() { return {real_, real_size_}; }
    std::span<std::complex<double>> spectrum();

    /// real() -> spectrum(), unnormalized.
    void forward();
    /// spectrum() -> real(), unnormalized (multiply by 1/n^d for the inverse). Destroys spectrum().
    void inverse();

private:
    int d_, n_;
    std::size_t real_size_, spec_size_;
    double* real_ = nullptr;
    void* spec_ = nullptr;
    void* fwd_ = nullptr;
    void* inv_ = nullptr;
};

/// Signed integer frequency index of position j on an axis of n points
/// (the Nyquist index maps to -n/2).
inline int signed_index(int j, int n) { return j < n / 2 ? j : j - n; }

/// Visits every half-spectrum entry of an n^d transform, passing the flat index
/// and the signed frequency indices (length d).
template <class F>
void for_each_mode(int d, int n, F&& f) {
    const int last = n / 2 + 1;
    int idx[3] = {0, 0, 0};
    std::size_t flat = 0;
    if (d == 1) {
        for (int a = 0; a < last; ++a, ++flat) {
            idx[0] = a;
            f(flat, idx);
        }
    } else if (d == 2) {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < last; ++b, ++flat) {
                idx[0] = signed_index(a, n);
                idx[1] = b;
                f(flat, idx);
            }
    } else {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < last; ++c, ++flat) {
                    idx[0] = signed_index(a, n);
                    idx[1] = signed_index(b, n);
                    idx[2] = c;
                    f(flat, idx);
                }
    }
}

}  // namespace moderate
