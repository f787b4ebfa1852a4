#pragma once

// Compactly supported bump V, its scaling V^N(x) = N^{d alpha} V(N^alpha x),
// and the tabulated regularized force K*V^N.

#include <span>
#include <vector>

#include "moderate/kernels.hpp"

namespace moderate {

struct MollifierSpec {
    int d = 1;
    double R = 1.0;      // support radius of V
    double alpha = 0.5;  // in [0, 1]
    long N = 1;
    double norm_const = 0.0;  // V(x) = norm_const exp(-1/(1-|x/R|^2))

    /// Validates the parameters and computes norm_const by quadrature.
    static MollifierSpec make(int d, double R, double alpha, long N);

    double scale() const;    // N^alpha
    double support() const;  // R N^{-alpha}

    /// Radial profiles of V and V^N.
    double V_radial(double r) const;
    double VN_radial(double r) const;
};

double eval_V(const MollifierSpec& m, std::span<const double> x);
double eval_VN(const MollifierSpec& m, std::span<const double> x);

/// Radial representation of K*V^N: the value at x is F(|x|) x/|x| (or
/// F(|x|) x_perp/|x| for rotational kernels), by rotation equivariance of both K
/// and the radial bump. Immutable once built.
class ForceTable {
public:
    static constexpr int kDefaultResolution = 2048;
    static constexpr double kDefaultTol = 1e-4;

    /// resolution = samples per 4 h, h = R N^{-alpha}. The table grows from 4 h
    /// by doubling until K*V^N agrees with K to tol, up to 64 h.
    static ForceTable build(const KernelSpec& kernel, const MollifierSpec& mollifier,
                            int resolution = kDefaultResolution, double tol = kDefaultTol);

    const KernelSpec& kernel() const { return kernel_; }
    const MollifierSpec& mollifier() const { return mollifier_; }
    double table_radius() const { return table_radius_; }
    double switch_radius() const { return switch_radius_; }
    double tol() const { return tol_; }
    const std::vector<double>& samples() const { return samples_; }
    double spacing() const { return dr_; }

    /// Interpolated radial profile (raw kernel profile beyond the switch radius).
    double radial(double rho) const;

    /// out = (K*V^N)(x); x and out have length d.
    void force(const double* x, double* out) const;

    /// Fresh quadrature of the radial profile F(rho), independent of the table.
    double quadrature(double rho) const;

private:
    ForceTable(const KernelSpec& k, const MollifierSpec& m) : kernel_(k), mollifier_(m) {}

    KernelSpec kernel_;
    MollifierSpec mollifier_;
    double tol_ = kDefaultTol;
    double table_radius_ = 0.0;
    double switch_radius_ = 0.0;
    double dr_ = 0.0;
    std::vector<double> samples_;
};

/// interaction_force(table, x) as a free function.
Vec interaction_force(const ForceTable& table, std::span<const double> x);

/// Radial profile of K*V^N at rho by direct quadrature.
double regularized_radial_profile(const KernelSpec& kernel, const MollifierSpec& mollifier, double rho);

}  // namespace moderate
