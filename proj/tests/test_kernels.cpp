#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "moderate/errors.hpp"
#include "moderate/kernels.hpp"

using namespace moderate;
using std::numbers::pi;

namespace {

std::vector<KernelSpec> catalog_samples() {
    return {KernelSpec::zero(2),
            KernelSpec::riesz(2, 0.0, false),
            KernelSpec::riesz(2, 0.5, true),
            KernelSpec::riesz(3, 1.5, false),
            KernelSpec::coulomb(3),
            KernelSpec::coulomb(2),
            KernelSpec::biot_savart(),
            KernelSpec::keller_segel(1, 2.0),
            KernelSpec::keller_segel(2, 1.0),
            KernelSpec::keller_segel(3, 0.5),
            KernelSpec::attractive_repulsive(3, 0.5, 1.5, 1.0, 2.0)};
}

Vec random_point(std::mt19937_64& gen, int d) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Vec x(d);
    for (auto& v : x) v = u(gen);
    return x;
}

// Radial profile h with (K*g)(x) = h(|x|) x/|x| for a standard Gaussian g in d = 2,
// computed by plain 2-d quadrature in polar coordinates centred at the origin of K.
double convolution_by_quadrature_2d(const KernelSpec& k, double R) {
    auto g = [](double r2) { return std::exp(-0.5 * r2) / (2.0 * pi); };
    boost::math::quadrature::tanh_sinh<double> ts;
    auto radial = [&](double r) {
        const int n = 256;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            const double th = 2.0 * pi * (j + 0.5) / n;
            const double r2 = R * R - 2.0 * R * r * std::cos(th) + r * r;
            acc += g(r2) * std::cos(th);
        }
        double gr2 = 0.0;
        for (const auto& t : k.terms()) gr2 += t.coef * std::pow(r, 2.0 - t.k);
        return acc * (2.0 * pi / n) * gr2;
    };
    return ts.integrate(radial, 0.0, R + 12.0, 1e-12);
}

// The same profile from the Fourier symbol: inverse transform of sigma(xi) e^{-|xi|^2/2}
// reduced to a Hankel transform of order 1.
double convolution_by_symbol_2d(const KernelSpec& k, double R) {
    auto f = [&](double rho) {
        if (rho == 0.0) return 0.0;
        double m = 0.0;
        for (const auto& t : k.terms()) m += t.coef * power_symbol_scalar(2, t.k, rho);
        return m * std::exp(-0.5 * rho * rho) * rho * rho * std::cyl_bessel_j(1.0, rho * R);
    };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 14.0, 15, 1e-13);
    return -integral / (2.0 * pi);
}

}  // namespace

TEST_CASE("closed-form values") {
    auto bs = eval_kernel(KernelSpec::biot_savart(), Vec{1.0, 0.0});
    CHECK(bs[0] == 0.0);
    CHECK(bs[1] == doctest::Approx(1.0 / pi).epsilon(1e-15));

    auto ks = eval_kernel(KernelSpec::keller_segel(2, 1.0), Vec{1.0, 0.0});
    CHECK(ks[0] == -1.0);
    CHECK(ks[1] == 0.0);

    // repulsive log kernel: x/|x|^2
    auto r0 = eval_kernel(KernelSpec::riesz(2, 0.0, false), Vec{0.0, 2.0});
    CHECK(r0[1] == doctest::Approx(0.5));
    // s x / |x|^{s+2}, attractive flips the sign
    auto r1 = eval_kernel(KernelSpec::riesz(3, 1.0, true), Vec{2.0, 0.0, 0.0});
    CHECK(r1[0] == doctest::Approx(-0.25));

    CHECK_THROWS_AS(eval_kernel(KernelSpec::keller_segel(2, 1.0), Vec{0.0, 0.0}), DomainError);
}

TEST_CASE("catalog invariants") {
    CHECK_THROWS_AS(KernelSpec::riesz(2, 1.2, false), OutOfCatalog);
    CHECK_THROWS_AS(KernelSpec::riesz(3, 2.0, false), OutOfCatalog);
    CHECK_THROWS_AS(KernelSpec::riesz(2, -0.1, false), OutOfCatalog);
    CHECK_THROWS_AS(KernelSpec::coulomb(1), OutOfCatalog);
    CHECK_THROWS_AS(KernelSpec::keller_segel(2, 0.0), OutOfCatalog);
    CHECK_THROWS_AS(KernelSpec::attractive_repulsive(2, 0.5, 1.0, 1.0, 1.0), OutOfCatalog);
    CHECK_THROWS_AS(parse_family("lennard-jones"), OutOfCatalog);
    CHECK(parse_family("biot-savart") == Family::BiotSavart);
    CHECK(KernelSpec::coulomb(3).s() == 1.0);
}

TEST_CASE("oddness, orthogonality and attractivity on random points") {
    std::mt19937_64 gen(7);
    for (const auto& k : catalog_samples()) {
        for (int i = 0; i < 200; ++i) {
            auto x = random_point(gen, k.dim());
            Vec mx(x.size());
            for (size_t j = 0; j < x.size(); ++j) mx[j] = -x[j];
            auto a = eval_kernel(k, x);
            auto b = eval_kernel(k, mx);
            for (size_t j = 0; j < x.size(); ++j) REQUIRE(a[j] == -b[j]);
        }
    }
    for (int i = 0; i < 200; ++i) {
        auto x = random_point(gen, 2);
        auto v = eval_kernel(KernelSpec::biot_savart(), x);
        const double dot = x[0] * v[0] + x[1] * v[1];
        CHECK(std::abs(dot) <= 4.0 * std::numeric_limits<double>::epsilon() * std::hypot(v[0], v[1]) * std::hypot(x[0], x[1]));
        auto w = eval_kernel(KernelSpec::keller_segel(2, 3.0), x);
        CHECK(x[0] * w[0] + x[1] * w[1] < 0.0);
    }
}

TEST_CASE("Fourier symbols") {
    std::mt19937_64 gen(11);
    for (const auto& k : catalog_samples()) {
        if (!k.has_symbol()) {
            CHECK_THROWS_AS(fourier_symbol(k, Vec(k.dim(), 1.0)), UnsupportedSymbol);
            continue;
        }
        auto zero = fourier_symbol(k, Vec(k.dim(), 0.0));
        for (auto z : zero) CHECK(z == std::complex<double>(0.0, 0.0));
        for (int i = 0; i < 100; ++i) {
            auto xi = random_point(gen, k.dim());
            Vec mxi(xi.size());
            for (size_t j = 0; j < xi.size(); ++j) mxi[j] = -xi[j];
            auto a = fourier_symbol(k, xi);
            auto b = fourier_symbol(k, mxi);
            // real kernel: sigma(-xi) = conj(sigma(xi)); odd kernel: sigma(-xi) = -sigma(xi)
            for (size_t j = 0; j < xi.size(); ++j) {
                CHECK(b[j] == std::conj(a[j]));
                CHECK(b[j] == -a[j]);
                CHECK(a[j].real() == 0.0);
            }
        }
    }
    // Newtonian Keller-Segel: K = -chi grad Phi, sigma = chi i xi / |xi|^2.
    auto ks = fourier_symbol(KernelSpec::keller_segel_newtonian(2, 2.0 * pi), Vec{0.0, 2.0});
    CHECK(ks[1].imag() == doctest::Approx(pi).epsilon(1e-14));
    // x/|x|^3 = -grad(1/|x|) and F[1/|x|] = 4 pi / |xi|^2
    auto c3 = fourier_symbol(KernelSpec::coulomb(3), Vec{0.5, 0.0, 0.0});
    CHECK(c3[0].imag() == doctest::Approx(-4.0 * pi * 0.5 / 0.25));
    // Biot-Savart: 2 i xi_perp / |xi|^2 with the 1/pi normalisation, sign from grad-perp of the log.
    auto bs = fourier_symbol(KernelSpec::biot_savart(), Vec{1.0, 0.0});
    CHECK(bs[0] == std::complex<double>(0.0, 0.0));
    CHECK(bs[1].imag() == doctest::Approx(-2.0));
}

TEST_CASE("symbol agrees with direct quadrature of K*g for Gaussian g") {
    for (const auto& k : {KernelSpec::keller_segel(2, 1.0), KernelSpec::riesz(2, 0.0, false),
                          KernelSpec::riesz(2, 0.5, true), KernelSpec::biot_savart()}) {
        // Biot-Savart shares the radial profile of the log kernel, rotated by 90 degrees.
        for (double R : {0.1, 0.3, 0.5, 0.8, 1.0, 1.4, 2.0, 2.7, 3.5, 5.0}) {
            const double direct = convolution_by_quadrature_2d(k, R);
            const double spectral = convolution_by_symbol_2d(k, R);
            CHECK(spectral == doctest::Approx(direct).epsilon(1e-4));
        }
    }
    // Newton's shell theorem as an independent check of the log kernel: (x/|x|^2)*g = m(R)/R with m(R) the enclosed mass.
    const auto k = KernelSpec::riesz(2, 0.0, false);
    for (double R : {0.5, 1.0, 2.0}) {
        const double enclosed = 1.0 - std::exp(-0.5 * R * R);
        CHECK(convolution_by_quadrature_2d(k, R) == doctest::Approx(enclosed / R).epsilon(1e-8));
    }
}

TEST_CASE("kernel norms") {
    auto z = kernel_norms(KernelSpec::zero(3), 1.0, 1.0);
    CHECK(z.inside == 0.0);
    CHECK(z.outside == 0.0);

    const auto log2d = KernelSpec::riesz(2, 0.0, false);
    // |K| = 1/r: int_0^1 2 pi r / r dr = 2 pi ; int_1^inf 2 pi r r^-3 dr = 2 pi (cube of the L^3 norm)
    auto n = kernel_norms(log2d, 1.0, 3.0);
    CHECK(n.inside == doctest::Approx(2.0 * pi).epsilon(1e-10));
    CHECK(std::pow(n.outside, 3.0) == doctest::Approx(2.0 * pi).epsilon(1e-10));

    CHECK_THROWS_AS(kernel_norms(log2d, 2.0, 3.0), DivergentNorm);
    CHECK_THROWS_AS(kernel_norms(log2d, 1.0, 2.0), DivergentNorm);

    // quadrature vs closed form across the catalog
    for (const auto& k : catalog_samples()) {
        const auto& m = k.meta();
        const double p = std::isinf(m.p_sup) ? 2.0 : 1.0 + 0.5 * (m.p_sup - 1.0);
        const double q = std::isinf(m.q_inf) ? std::numeric_limits<double>::infinity() : 1.5 * m.q_inf;
        auto num = kernel_norms(k, p, q);
        if (auto cf = kernel_norms_closed_form(k, p, q)) {
            CHECK(num.inside == doctest::Approx(cf->inside).epsilon(1e-8));
            CHECK(num.outside == doctest::Approx(cf->outside).epsilon(1e-8));
        }
        CHECK(std::isfinite(num.inside));
        CHECK(std::isfinite(num.outside));
    }

    // monotone in p
    double prev = 0.0;
    for (double p : {1.0, 1.2, 1.4, 1.6, 1.8, 1.95}) {
        const double v = std::pow(kernel_norms(log2d, p, 3.0).inside, p);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("convolution constant") {
    CHECK(convolution_constant(KernelSpec::zero(2), 2.0) == 0.0);
    // log kernel d=2, r=inf: p = 3/2 (midpoint of [1, 2)), q = 4 (twice q_inf).
    auto c = convolution_bound_choice(KernelSpec::riesz(2, 0.0, false), std::numeric_limits<double>::infinity());
    CHECK(c.p == 1.5);
    CHECK(c.q == 4.0);
    const double inside = std::pow(2.0 * pi / 0.5, 1.0 / 1.5);
    const double outside = std::pow(2.0 * pi / 2.0, 0.25);
    CHECK(c.constant == doctest::Approx(inside + outside).epsilon(1e-10));
    CHECK(c.constant == doctest::Approx(c.norms.inside + c.norms.outside).epsilon(1e-15));
    // r at the admissible minimum is excluded (p would have to equal p_sup)
    CHECK_THROWS_AS(convolution_constant(KernelSpec::riesz(2, 0.0, false), 2.0), DivergentNorm);
    CHECK(convolution_constant(KernelSpec::riesz(2, 0.0, false), 4.0) > 0.0);
}

TEST_CASE("assumption report") {
    auto c = assumption_report(KernelSpec::riesz(3, 1.0, false));
    CHECK(c.standard_class);
    CHECK(c.meta.p_sup == 1.5);
    CHECK(c.meta.q_inf == 1.5);
    CHECK(c.meta.zeta_map);
    CHECK(c.zeta(6.0) == doctest::Approx(0.5));
    CHECK(c.meta.r_admissible_min == doctest::Approx(3.0));

    auto s = assumption_report(KernelSpec::riesz(3, 1.5, false));
    CHECK(s.singular_class);
    CHECK_FALSE(s.standard_class);
    CHECK(s.sigma_lo == doctest::Approx(0.5));

    auto bs = assumption_report(KernelSpec::biot_savart());
    CHECK(bs.standard_class);
    CHECK(bs.meta.p_sup == 2.0);
    CHECK(bs.meta.q_inf == 2.0);

    auto ks1 = assumption_report(KernelSpec::keller_segel(1, 1.0));
    CHECK(std::isinf(ks1.meta.p_sup));
    CHECK(std::isinf(ks1.meta.q_inf));
    CHECK(ks1.to_text().find("standard") != std::string::npos);
}
