#pragma once

// Smooth componentwise clamp F_A: identity on [-A, A], constant +-A beyond
// +-(A+1), joined by a C^2 quintic bridge; odd.

#include <span>

namespace moderate {

class CutoffFn {
public:
    explicit CutoffFn(double A);

    double A() const { return A_; }
    double operator()(double x) const;
    double derivative(double x) const;

    /// Largest value of f_A on the bridge, A + 16/81.
    double max_value() const;

    void apply(std::span<double> v) const;

private:
    double A_;
};

}  // namespace moderate
