#include "moderate/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "moderate/errors.hpp"
#include "moderate/parallel.hpp"

namespace moderate {

namespace {

double bump(double t2) { return t2 < 1.0 ? std::exp(-1.0 / (1.0 - t2)) : 0.0; }

}  // namespace

MollifierSpec MollifierSpec::make(int d, double R, double alpha, long N) {
    if (d < 1) throw ValidationError("mollifier dimension must be >= 1");
    if (!(R > 0.0) || !std::isfinite(R)) throw ValidationError("mollifier radius must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("mollifier alpha must lie in [0, 1]");
    if (N < 1) throw ValidationError("particle number N must be >= 1");
    MollifierSpec m;
    m.d = d;
    m.R = R;
    m.alpha = alpha;
    m.N = N;
    boost::math::quadrature::tanh_sinh<double> ts;
    const double radial = ts.integrate([d](double t) { return bump(t * t) * std::pow(t, d - 1.0); }, 0.0, 1.0, 1e-15);
    m.norm_const = 1.0 / (sphere_area(d) * std::pow(R, d) * radial);
    return m;
}

double MollifierSpec::scale() const { return std::pow(static_cast<double>(N), alpha); }

double MollifierSpec::support() const { return R / scale(); }

double MollifierSpec::V_radial(double r) const { return norm_const * bump((r / R) * (r / R)); }

double MollifierSpec::VN_radial(double r) const {
    const double s = scale();
    return std::pow(s, d) * V_radial(s * r);
}

double eval_V(const MollifierSpec& m, std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return m.norm_const * bump(r2 / (m.R * m.R));
}

double eval_VN(const MollifierSpec& m, std::span<const double> x) {
    const double s = m.scale();
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return std::pow(s, m.d) * m.norm_const * bump(r2 * s * s / (m.R * m.R));
}

// ------------------------------------------------------------ quadrature

double regularized_radial_profile(const KernelSpec& kernel, const MollifierSpec& moll, double rho) {
    if (kernel.terms().empty() || rho == 0.0) return 0.0;
    const int d = moll.d;
    const double h = moll.support();
    const double amp = std::pow(moll.scale(), d) * moll.norm_const;
    auto vn = [&](double r2) { return amp * bump(r2 / (h * h)); };
    // g(r) r^e for the kernel's power terms
    auto gpow = [&](double r, double e) {
        double acc = 0.0;
        for (const auto& t : kernel.terms()) acc += t.coef * std::pow(r, e - t.k);
        return acc;
    };

    std::function<double(double)> outer;
    if (d == 1) {
        outer = [&](double r) {
            const double a = rho - r, b = rho + r;
            return gpow(r, 1.0) * (vn(a * a) - vn(b * b));
        };
    } else {
        outer = [&](double r) {
            const double c0 = (rho * rho + r * r - h * h) / (2.0 * rho * r);
            if (c0 >= 1.0) return 0.0;
            const double th_max = c0 <= -1.0 ? std::numbers::pi : std::acos(c0);
            auto inner = [&](double th) {
                const double c = std::cos(th);
                const double dist2 = std::max(0.0, rho * rho - 2.0 * rho * r * c + r * r);
                return c * std::pow(std::sin(th), d - 2) * vn(dist2);
            };
            const double I = boost::math::quadrature::gauss<double, 30>::integrate(inner, 0.0, th_max);
            return gpow(r, d) * I;
        };
    }

    std::vector<double> cuts{std::max(0.0, rho - h), rho + h};
    const double b = h - rho;
    if (b > cuts.front() && b < cuts.back()) cuts.insert(cuts.begin() + 1, b);

    boost::math::quadrature::tanh_sinh<double> ts;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += ts.integrate(outer, cuts[i], cuts[i + 1], 1e-9);
    const double omega = d == 1 ? 1.0 : sphere_area(d - 1);
    return omega * total;
}

// ------------------------------------------------------------ force table

namespace {

// Sum of term magnitudes: a non-vanishing scale for relative errors, equal to |K|
// for single power-law kernels.
double envelope(const KernelSpec& k, double r) {
    double acc = 0.0;
    for (const auto& t : k.terms()) acc += std::abs(t.coef) * std::pow(r, 1.0 - t.k);
    return acc;
}

}  // namespace

ForceTable ForceTable::build(const KernelSpec& kernel, const MollifierSpec& mollifier, int resolution, double tol) {
    if (kernel.dim() != mollifier.d) throw ValidationError("kernel and mollifier dimensions differ");
    if (resolution < 16) throw ValidationError("force table resolution must be >= 16");
    if (!(tol > 0.0)) throw ValidationError("force table tolerance must be > 0");
    ForceTable t(kernel, mollifier);
    t.tol_ = tol;
    if (kernel.terms().empty()) return t;

    const double h = mollifier.support();
    t.dr_ = 4.0 * h / resolution;
    double radius = 4.0 * h;
    std::size_t switch_index = 0;
    for (;;) {
        const std::size_t n = static_cast<std::size_t>(std::llround(radius / t.dr_)) + 1;
        const std::size_t old = t.samples_.size();
        t.samples_.resize(n);
        parallel_for(n - old, [&](std::size_t b, std::size_t e) {
            for (std::size_t j = old + b; j < old + e; ++j) {
                t.samples_[j] = regularized_radial_profile(kernel, mollifier, j * t.dr_);
            }
        });
        std::size_t j = n;
        while (j > 0) {
            const double r = (j - 1) * t.dr_;
            if (r < h) break;
            const double raw = kernel.radial_factor(r) * r;
            if (!(std::abs(t.samples_[j - 1] - raw) < tol * envelope(kernel, r))) break;
            --j;
        }
        if (j < n) {
            switch_index = j;
            break;
        }
        radius *= 2.0;
        if (radius > 64.0 * h * (1.0 + 1e-12)) {
            throw QuadratureFailure("K*V^N does not approach K to tol=" + std::to_string(tol) + " within 64 h for " +
                                    kernel.describe());
        }
    }
    t.table_radius_ = (t.samples_.size() - 1) * t.dr_;
    t.switch_radius_ = switch_index * t.dr_;

    // interpolation check at midpoints of a sparse subset of intervals
    double scale = 0.0;
    for (double v : t.samples_) scale = std::max(scale, std::abs(v));
    std::vector<std::size_t> probes;
    for (std::size_t j = 0; j + 1 <= switch_index && j + 1 < t.samples_.size(); j += 8) probes.push_back(j);
    std::vector<double> err(probes.size());
    parallel_for(probes.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double mid = (probes[i] + 0.5) * t.dr_;
            const double fresh = regularized_radial_profile(kernel, mollifier, mid);
            const double interp = 0.5 * (t.samples_[probes[i]] + t.samples_[probes[i] + 1]);
            err[i] = std::abs(interp - fresh) / std::max(std::abs(fresh), 1e-3 * scale);
        }
    });
    for (double e : err) {
        if (!(e <= tol)) {
            throw QuadratureFailure("force table interpolation error exceeds tol at resolution " +
                                    std::to_string(resolution) + " for " + kernel.describe());
        }
    }
    return t;
}

double ForceTable::radial(double rho) const {
    if (kernel_.terms().empty() || rho == 0.0) return 0.0;
    if (rho >= switch_radius_) return kernel_.radial_factor(rho) * rho;
    const double u = rho / dr_;
    const std::size_t j = std::min(static_cast<std::size_t>(u), samples_.size() - 2);
    const double f = u - static_cast<double>(j);
    return samples_[j] * (1.0 - f) + samples_[j + 1] * f;
}

void ForceTable::force(const double* x, double* out) const {
    const int d = mollifier_.d;
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) r2 += x[i] * x[i];
    if (r2 == 0.0 || kernel_.terms().empty()) {
        for (int i = 0; i < d; ++i) out[i] = 0.0;
        return;
    }
    const double rho = std::sqrt(r2);
    const double g = rho >= switch_radius_ ? kernel_.radial_factor(rho) : radial(rho) / rho;
    if (kernel_.rotational()) {
        out[0] = -(g * x[1]);
        out[1] = g * x[0];
    } else {
        for (int i = 0; i < d; ++i) out[i] = g * x[i];
    }
}

double ForceTable::quadrature(double rho) const { return regularized_radial_profile(kernel_, mollifier_, rho); }

Vec interaction_force(const ForceTable& table, std::span<const double> x) {
    if (static_cast<int>(x.size()) != table.mollifier().d) throw std::invalid_argument("interaction_force: dimension");
    Vec out(x.size());
    table.force(x.data(), out.data());
    return out;
}

}  // namespace moderate
