#pragma once

// Interaction kernel catalog: Riesz / Coulomb / Biot-Savart / Keller-Segel /
// attractive-repulsive families, with point evaluation, Fourier symbols,
// integrability norms and the encoded assumption analysis.
//
// Every catalog kernel has the form K(x) = g(|x|) x  (radial type) or
// K(x) = g(|x|) x_perp (Biot-Savart, rotational type), with g a finite sum
// of power laws c r^{-k}. Most of the numerics below only rely on that form.

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace moderate {

enum class Family { Zero, Riesz, Coulomb, BiotSavart, KellerSegel, AttractiveRepulsive };

std::string family_name(Family f);
Family parse_family(const std::string& name);

/// One power-law term c * r^{-k} of the radial factor g.
struct PowerTerm {
    double coef = 0.0;
    double k = 0.0;
    bool operator==(const PowerTerm&) const = default;
};

/// Admissible integrability parameters, encoded from the kernel analysis.
/// K is in L^p(B_1) for every p < p_sup (every p, including infinity, when
/// p_sup is infinite) and in L^q(B_1^c) for every q > q_inf (only q = infinity
/// when q_inf is infinite).
struct AssumptionMeta {
    double p_sup = 0.0;
    double q_inf = 0.0;
    double r_admissible_min = 1.0;  // infimum of admissible r >= max(p', q')
    bool zeta_map = false;          // zeta(z) = 1 - d/z for z in (d, inf]
    bool singular_class = false;    // d-2 < s < d-1
    bool operator==(const AssumptionMeta&) const = default;
};

class KernelSpec {
public:
    static KernelSpec zero(int d);
    static KernelSpec riesz(int d, double s, bool attractive);
    static KernelSpec coulomb(int d);
    static KernelSpec biot_savart();
    /// K(x) = -chi x / |x|^d, taken literally.
    static KernelSpec keller_segel(int d, double chi);
    /// Keller-Segel with chi measured in units of the Newtonian potential,
    /// K = -chi x / (omega_d |x|^d), so that the 2-d critical value is 8 pi.
    static KernelSpec keller_segel_newtonian(int d, double chi);
    /// V(r) = va r^{-a} - vb r^{-b}, K = -grad V.
    static KernelSpec attractive_repulsive(int d, double a, double b, double va, double vb);

    Family family() const { return family_; }
    int dim() const { return d_; }
    double s() const { return s_; }
    bool attractive() const { return attractive_; }
    double chi() const { return chi_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double va() const { return va_; }
    double vb() const { return vb_; }
    const AssumptionMeta& meta() const { return meta_; }

    /// K(x) = g(|x|) * x  or  g(|x|) * x_perp.
    bool rotational() const { return family_ == Family::BiotSavart; }
    const std::vector<PowerTerm>& terms() const { return terms_; }
    double radial_factor(double r) const;
    /// |K(x)| at |x| = r.
    double magnitude(double r) const;
    bool has_symbol() const;

    std::string describe() const;

    bool operator==(const KernelSpec&) const = default;

private:
    KernelSpec() = default;
    void finalize();

    Family family_ = Family::Zero;
    int d_ = 1;
    double s_ = 0.0;
    bool attractive_ = false;
    double chi_ = 0.0;
    double a_ = 0.0, b_ = 0.0, va_ = 0.0, vb_ = 0.0;
    std::vector<PowerTerm> terms_;
    AssumptionMeta meta_;
};

using Vec = std::vector<double>;

/// Closed-form kernel value. Throws DomainError at x = 0.
void eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<double> out);
Vec eval_kernel(const KernelSpec& spec, std::span<const double> x);

/// Fourier multiplier with F[K*f](xi) = sigma(xi) F[f](xi), F[f](xi) = int f e^{-i x.xi}.
/// sigma(0) = 0. Throws UnsupportedSymbol for attractive-repulsive kernels.
std::vector<std::complex<double>> fourier_symbol(const KernelSpec& spec, std::span<const double> xi);

/// Scalar part m(rho) of a power term's symbol: F[x r^{-k}](xi) = i xi m(|xi|).
double power_symbol_scalar(int d, double k, double rho);

struct KernelNorms {
    double inside = 0.0;   // ||K||_{L^p(B_1)}
    double outside = 0.0;  // ||K||_{L^q(B_1^c)}
};

/// Radial-quadrature norms; p or q may be infinity. Throws DivergentNorm when
/// the integrals do not exist, QuadratureFailure when quadrature disagrees
/// with the power-law closed form.
KernelNorms kernel_norms(const KernelSpec& spec, double p, double q);
/// Closed form, available for single power-law kernels (and the zero kernel).
std::optional<KernelNorms> kernel_norms_closed_form(const KernelSpec& spec, double p, double q);

struct ConvolutionBound {
    double p = 0.0;
    double q = 0.0;
    KernelNorms norms;
    double constant = 0.0;
};

/// Constant C_{K,d} with ||K*f||_inf <= C ||f||_{L^1 cap L^r} (sum convention).
ConvolutionBound convolution_bound_choice(const KernelSpec& spec, double r);
double convolution_constant(const KernelSpec& spec, double r);

struct AssumptionReport {
    std::string family;
    int d = 0;
    AssumptionMeta meta;
    bool standard_class = false;
    bool singular_class = false;
    /// For the singular class: admissible beta - d/r_tilde lies in (sigma_lo, 1).
    double sigma_lo = 0.0;
    /// zeta(z) = 1 - d/z (meaningful when meta.zeta_map).
    double zeta(double z) const;
    std::string to_text() const;
};

AssumptionReport assumption_report(const KernelSpec& spec);

/// Surface area of the unit sphere in R^d.
double sphere_area(int d);
/// Hoelder conjugate exponent (1 <-> inf).
double conjugate(double p);

}  // namespace moderate
