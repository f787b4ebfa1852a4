#include "moderate/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "moderate/errors.hpp"

namespace moderate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::Zero: return "zero";
        case Family::Riesz: return "riesz";
        case Family::Coulomb: return "coulomb";
        case Family::BiotSavart: return "biot-savart";
        case Family::KellerSegel: return "keller-segel";
        case Family::AttractiveRepulsive: return "attractive-repulsive";
    }
    return "?";
}

Family parse_family(const std::string& name) {
    for (auto f : {Family::Zero, Family::Riesz, Family::Coulomb, Family::BiotSavart, Family::KellerSegel,
                   Family::AttractiveRepulsive}) {
        if (family_name(f) == name) return f;
    }
    throw OutOfCatalog("unknown kernel family '" + name + "'");
}

double sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double conjugate(double p) {
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return kInf;
    return p / (p - 1.0);
}

// ---------------------------------------------------------------- factories

KernelSpec KernelSpec::zero(int d) {
    if (d < 1) throw OutOfCatalog("dimension must be >= 1");
    KernelSpec k;
    k.family_ = Family::Zero;
    k.d_ = d;
    k.finalize();
    return k;
}

KernelSpec KernelSpec::riesz(int d, double s, bool attractive) {
    if (d < 1) throw OutOfCatalog("dimension must be >= 1");
    if (!(s >= 0.0) || !(s < d - 1.0)) {
        throw OutOfCatalog("Riesz kernel requires 0 <= s < d-1 (got s=" + fmt_num(s) + ", d=" + std::to_string(d) +
                           "); K_s is not locally integrable otherwise");
    }
    KernelSpec k;
    k.family_ = Family::Riesz;
    k.d_ = d;
    k.s_ = s;
    k.attractive_ = attractive;
    k.finalize();
    return k;
}

KernelSpec KernelSpec::coulomb(int d) {
    if (d < 2) throw OutOfCatalog("Coulomb kernel requires d >= 2");
    KernelSpec k;
    k.family_ = Family::Coulomb;
    k.d_ = d;
    k.s_ = d - 2.0;
    k.finalize();
    return k;
}

KernelSpec KernelSpec::biot_savart() {
    KernelSpec k;
    k.family_ = Family::BiotSavart;
    k.d_ = 2;
    k.finalize();
    return k;
}

KernelSpec KernelSpec::keller_segel(int d, double chi) {
    if (d < 1) throw OutOfCatalog("dimension must be >= 1");
    if (!(chi > 0.0) || !std::isfinite(chi)) throw OutOfCatalog("Keller-Segel requires chi > 0");
    KernelSpec k;
    k.family_ = Family::KellerSegel;
    k.d_ = d;
    k.chi_ = chi;
    k.finalize();
    return k;
}

KernelSpec KernelSpec::keller_segel_newtonian(int d, double chi) {
    return keller_segel(d, chi / sphere_area(d));
}

KernelSpec KernelSpec::attractive_repulsive(int d, double a, double b, double va, double vb) {
    if (d < 1) throw OutOfCatalog("dimension must be >= 1");
    if (!(a > 0.0) || !(b > 0.0)) throw OutOfCatalog("attractive-repulsive requires a, b > 0");
    if (!(va > 0.0) || !(vb > 0.0)) throw OutOfCatalog("attractive-repulsive requires va, vb > 0");
    if (!(std::max(a, b) < d - 1.0)) {
        throw OutOfCatalog("attractive-repulsive requires max(a, b) < d-1 for local integrability");
    }
    KernelSpec k;
    k.family_ = Family::AttractiveRepulsive;
    k.d_ = d;
    k.a_ = a;
    k.b_ = b;
    k.va_ = va;
    k.vb_ = vb;
    k.finalize();
    return k;
}

void KernelSpec::finalize() {
    terms_.clear();
    const double sign = attractive_ ? -1.0 : 1.0;
    switch (family_) {
        case Family::Zero: break;
        case Family::Riesz:
        case Family::Coulomb:
            // K = -/+ grad |x|^{-s} = +/- s x |x|^{-s-2}; the log potential (s = 0) gives x/|x|^2.
            terms_.push_back({sign * (s_ > 0.0 ? s_ : 1.0), s_ + 2.0});
            break;
        case Family::BiotSavart: terms_.push_back({1.0 / std::numbers::pi, 2.0}); break;
        case Family::KellerSegel: terms_.push_back({-chi_, static_cast<double>(d_)}); break;
        case Family::AttractiveRepulsive:
            terms_.push_back({a_ * va_, a_ + 2.0});
            terms_.push_back({-b_ * vb_, b_ + 2.0});
            break;
    }

    meta_ = {};
    if (terms_.empty()) {
        meta_.p_sup = kInf;
        meta_.q_inf = 1.0;
        meta_.r_admissible_min = 1.0;
        meta_.zeta_map = true;
        return;
    }
    double k_max = terms_.front().k, k_min = terms_.front().k;
    for (const auto& t : terms_) {
        k_max = std::max(k_max, t.k);
        k_min = std::min(k_min, t.k);
    }
    // |K| ~ r^{1-k}
    meta_.p_sup = k_max > 1.0 ? d_ / (k_max - 1.0) : kInf;
    meta_.q_inf = k_min > 1.0 ? d_ / (k_min - 1.0) : kInf;
    meta_.r_admissible_min = conjugate(meta_.p_sup);
    const double s_eff = k_max - 2.0;
    meta_.singular_class = s_eff > d_ - 2.0 && s_eff < d_ - 1.0;
    meta_.zeta_map = !meta_.singular_class;
}

double KernelSpec::radial_factor(double r) const {
    double g = 0.0;
    for (const auto& t : terms_) g += t.coef * std::pow(r, -t.k);
    return g;
}

double KernelSpec::magnitude(double r) const { return std::abs(radial_factor(r)) * r; }

bool KernelSpec::has_symbol() const { return family_ != Family::AttractiveRepulsive; }

std::string KernelSpec::describe() const {
    std::ostringstream os;
    os << family_name(family_) << "(d=" << d_;
    switch (family_) {
        case Family::Riesz: os << ", s=" << fmt_num(s_) << (attractive_ ? ", attractive" : ", repulsive"); break;
        case Family::KellerSegel: os << ", chi=" << fmt_num(chi_); break;
        case Family::AttractiveRepulsive:
            os << ", a=" << fmt_num(a_) << ", b=" << fmt_num(b_) << ", va=" << fmt_num(va_) << ", vb=" << fmt_num(vb_);
            break;
        default: break;
    }
    os << ")";
    return os.str();
}

// ------------------------------------------------------------- evaluation

void eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<double> out) {
    const int d = spec.dim();
    if (static_cast<int>(x.size()) != d || static_cast<int>(out.size()) != d) {
        throw std::invalid_argument("eval_kernel: dimension mismatch");
    }
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    if (r2 == 0.0) throw DomainError("kernel evaluated at the singularity x = 0");
    const double g = spec.radial_factor(std::sqrt(r2));
    if (spec.rotational()) {
        out[0] = -(g * x[1]);
        out[1] = g * x[0];
    } else {
        for (int i = 0; i < d; ++i) out[i] = g * x[i];
    }
}

Vec eval_kernel(const KernelSpec& spec, std::span<const double> x) {
    Vec out(x.size());
    eval_kernel(spec, x, out);
    return out;
}

double power_symbol_scalar(int d, double k, double rho) {
    // F[|x|^{-s}] = c_{d,s} |xi|^{s-d} and x |x|^{-k} = -grad |x|^{2-k} / (k-2);
    // the s -> 0 limit recovers x/|x|^2 = grad log|x|.
    const double s = k - 2.0;
    const double c = std::pow(std::numbers::pi, 0.5 * d) * std::pow(2.0, d - s - 1.0) * std::tgamma(0.5 * (d - s)) /
                     std::tgamma(0.5 * s + 1.0);
    return -c * std::pow(rho, s - d);
}

std::vector<std::complex<double>> fourier_symbol(const KernelSpec& spec, std::span<const double> xi) {
    const int d = spec.dim();
    if (static_cast<int>(xi.size()) != d) throw std::invalid_argument("fourier_symbol: dimension mismatch");
    if (!spec.has_symbol()) {
        throw UnsupportedSymbol("no closed-form Fourier symbol for " + spec.describe() + "; use particle mode");
    }
    std::vector<std::complex<double>> out(d, {0.0, 0.0});
    double rho2 = 0.0;
    for (double v : xi) rho2 += v * v;
    if (rho2 == 0.0 || spec.terms().empty()) return out;
    const double rho = std::sqrt(rho2);
    double m = 0.0;
    for (const auto& t : spec.terms()) m += t.coef * power_symbol_scalar(d, t.k, rho);
    if (spec.rotational()) {
        out[0] = {0.0, -xi[1] * m};
        out[1] = {0.0, xi[0] * m};
    } else {
        for (int i = 0; i < d; ++i) out[i] = {0.0, xi[i] * m};
    }
    return out;
}

// ------------------------------------------------------------------ norms

namespace {

double sup_on(const KernelSpec& spec, double lo, double hi) {
    // sampled on a log grid; catalog profiles are monotone or unimodal in r
    double best = 0.0;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / n);
        best = std::max(best, spec.magnitude(r));
    }
    return best;
}

// |K(r)| r^e evaluated with the leading power factored out, so that tiny r does
// not overflow before the product is formed.
double scaled_magnitude(const KernelSpec& spec, double r, double e) {
    double k_max = 0.0;
    for (const auto& t : spec.terms()) k_max = std::max(k_max, t.k);
    double g = 0.0;
    for (const auto& t : spec.terms()) g += t.coef * std::pow(r, k_max - t.k);
    return std::abs(g) * std::pow(r, 1.0 - k_max + e);
}

void check_exponents(const KernelSpec& spec, double p, double q) {
    const auto& m = spec.meta();
    if (!(p >= 1.0) || !(q >= 1.0)) throw DivergentNorm("norm exponents must be >= 1");
    if (spec.terms().empty()) return;
    if (!std::isinf(m.p_sup) && !(p < m.p_sup)) {
        throw DivergentNorm("||K||_{L^p(B_1)} diverges: need p < " + fmt_num(m.p_sup) + ", got p=" + fmt_num(p));
    }
    if (std::isinf(m.q_inf) ? !std::isinf(q) : !(q > m.q_inf)) {
        throw DivergentNorm("||K||_{L^q(B_1^c)} diverges: need q > " + fmt_num(m.q_inf) + ", got q=" + fmt_num(q));
    }
}

}  // namespace

std::optional<KernelNorms> kernel_norms_closed_form(const KernelSpec& spec, double p, double q) {
    check_exponents(spec, p, q);
    if (spec.terms().empty()) return KernelNorms{0.0, 0.0};
    if (spec.terms().size() != 1) return std::nullopt;
    const auto t = spec.terms().front();
    const double c = std::abs(t.coef);
    const double w = sphere_area(spec.dim());
    const int d = spec.dim();
    KernelNorms n;
    n.inside = std::isinf(p) ? c : c * std::pow(w / (p * (1.0 - t.k) + d), 1.0 / p);
    n.outside = std::isinf(q) ? c : c * std::pow(w / (q * (t.k - 1.0) - d), 1.0 / q);
    return n;
}

KernelNorms kernel_norms(const KernelSpec& spec, double p, double q) {
    check_exponents(spec, p, q);
    KernelNorms n;
    if (spec.terms().empty()) return n;
    const int d = spec.dim();
    const double w = sphere_area(d);
    const double tol = 1e-14;

    if (std::isinf(p)) {
        n.inside = sup_on(spec, 1e-12, 1.0);
    } else {
        boost::math::quadrature::tanh_sinh<double> ts;
        auto f = [&](double r) { return std::pow(scaled_magnitude(spec, r, (d - 1.0) / p), p); };
        n.inside = std::pow(w * ts.integrate(f, 0.0, 1.0, tol), 1.0 / p);
    }
    if (std::isinf(q)) {
        n.outside = sup_on(spec, 1.0, 1e8);
    } else {
        boost::math::quadrature::exp_sinh<double> es;
        auto f = [&](double r) { return std::pow(scaled_magnitude(spec, r, (d - 1.0) / q), q); };
        n.outside = std::pow(w * es.integrate(f, 1.0, kInf, tol), 1.0 / q);
    }
    if (!std::isfinite(n.inside) || !std::isfinite(n.outside)) {
        throw QuadratureFailure("kernel norm quadrature did not converge for " + spec.describe());
    }
    if (auto cf = kernel_norms_closed_form(spec, p, q)) {
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
        if (rel(n.inside, cf->inside) > 1e-8 || rel(n.outside, cf->outside) > 1e-8) {
            throw QuadratureFailure("kernel norm quadrature disagrees with the closed form for " + spec.describe());
        }
    }
    return n;
}

ConvolutionBound convolution_bound_choice(const KernelSpec& spec, double r) {
    if (!(r >= 1.0)) throw DivergentNorm("r must be >= 1");
    const auto& m = spec.meta();
    ConvolutionBound c;
    if (spec.terms().empty()) {
        c.p = kInf;
        c.q = kInf;
        return c;
    }
    // p' <= r and q' <= r are needed to bound ||f||_{p'}, ||f||_{q'} by ||f||_1 + ||f||_r.
    const double rc = conjugate(r);
    if (std::isinf(m.p_sup)) {
        c.p = kInf;
    } else {
        const double lo = std::max(1.0, rc);
        if (!(lo < m.p_sup)) {
            throw DivergentNorm("r=" + fmt_num(r) + " is not above the admissible minimum " +
                                fmt_num(m.r_admissible_min) + " for " + spec.describe());
        }
        c.p = 0.5 * (lo + m.p_sup);
    }
    c.q = std::isinf(m.q_inf) ? kInf : std::max(2.0 * m.q_inf, rc);
    c.norms = kernel_norms(spec, c.p, c.q);
    c.constant = c.norms.inside + c.norms.outside;
    return c;
}

double convolution_constant(const KernelSpec& spec, double r) { return convolution_bound_choice(spec, r).constant; }

// ------------------------------------------------------------- assumptions

double AssumptionReport::zeta(double z) const { return 1.0 - d / z; }

AssumptionReport assumption_report(const KernelSpec& spec) {
    AssumptionReport rep;
    rep.family = family_name(spec.family());
    rep.d = spec.dim();
    rep.meta = spec.meta();
    rep.singular_class = rep.meta.singular_class;
    rep.standard_class = !rep.singular_class;
    if (rep.singular_class) {
        double k_max = 0.0;
        for (const auto& t : spec.terms()) k_max = std::max(k_max, t.k);
        rep.sigma_lo = std::max(0.0, 2.0 - rep.d + (k_max - 2.0));
    }
    return rep;
}

std::string AssumptionReport::to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "family: " << family << "\n";
    os << "d: " << d << "\n";
    os << "p_sup: " << meta.p_sup << "\n";
    os << "q_inf: " << meta.q_inf << "\n";
    os << "r_admissible_min: " << meta.r_admissible_min << "\n";
    os << "class: " << (singular_class ? "singular" : "standard") << "\n";
    if (meta.zeta_map) os << "zeta(z): 1 - " << d << "/z for z in (" << d << ", inf]\n";
    if (singular_class) {
        os << "zeta: 1\n";
        os << "singular window: r_tilde > " << d << ", beta in (" << d << "/r_tilde, 1), beta - " << d
           << "/r_tilde in (" << sigma_lo << ", 1)\n";
    }
    return os.str();
}

}  // namespace moderate
