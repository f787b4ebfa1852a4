#include "moderate/cutoff.hpp"

#include <cmath>

#include "moderate/errors.hpp"

namespace moderate {

namespace {

// q(t) = t - 6 t^3 + 8 t^4 - 3 t^5: q(0) = 0, q'(0) = 1, q''(0) = 0, q(1) = q'(1) = q''(1) = 0.
// Peak q(1/3) = 16/81, and |q'| <= 1 on [0, 1].
double bridge(double t) { return t * (1.0 + t * t * (-6.0 + t * (8.0 - 3.0 * t))); }
double bridge_d(double t) { return 1.0 + t * t * (-18.0 + t * (32.0 - 15.0 * t)); }

}  // namespace

CutoffFn::CutoffFn(double A) : A_(A) {
    if (!(A > 0.0) || !std::isfinite(A)) throw ValidationError("cutoff level A must be finite and > 0");
}

double CutoffFn::operator()(double x) const {
    const double a = std::abs(x);
    double y;
    if (a <= A_) return x;
    if (a >= A_ + 1.0) {
        y = A_;
    } else {
        y = A_ + bridge(a - A_);
    }
    return x < 0.0 ? -y : y;
}

double CutoffFn::derivative(double x) const {
    const double a = std::abs(x);
    if (a <= A_) return 1.0;
    if (a >= A_ + 1.0) return 0.0;
    return bridge_d(a - A_);
}

double CutoffFn::max_value() const { return A_ + 16.0 / 81.0; }

void CutoffFn::apply(std::span<double> v) const {
    for (auto& x : v) x = (*this)(x);
}

}  // namespace moderate
