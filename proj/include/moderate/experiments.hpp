#pragma once

// Theoretical convergence rates and the Monte-Carlo harnesses that measure
// them: error sweeps over N against a PDE reference, and the coupling gap
// between the particle system and McKean-Vlasov copies driven by the same noise.
//
// Rate formulas are templates so they can run on exact rationals
// (boost::rational) as well as doubles. Exponents r are passed as 1/r, with
// 0 standing for r = infinity.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moderate/errors.hpp"
#include "moderate/measures.hpp"
#include "moderate/particles.hpp"
#include "moderate/spectral_pde.hpp"

namespace moderate {

namespace detail {
template <class T>
T tmin(const T& a, const T& b) {
    return b < a ? b : a;
}
template <class T>
T tmax(const T& a, const T& b) {
    return a < b ? b : a;
}
}  // namespace detail

template <class T>
struct Rate {
    T rho;
    bool admissible;
};

template <class T>
struct BestAlpha {
    T alpha;
    T rho;
    bool at_boundary;  // the optimum sits on the open admissibility bound (a supremum)
};

/// kappa_r = (d (1 - 2/r)) v 0.
template <class T>
T kappa(int d, const T& inv_r) {
    return detail::tmax(T(0), T(d) * (T(1) - T(2) * inv_r));
}

/// Supremum of admissible alpha for the standard class: 1 / (d + kappa_r).
template <class T>
T alpha_bound(int d, const T& inv_r) {
    return T(1) / (T(d) + kappa(d, inv_r));
}

/// rho = min(alpha zeta, (1 - alpha (d + kappa_r)) / 2).
template <class T>
Rate<T> theoretical_rate(int d, const T& alpha, const T& zeta, const T& inv_r) {
    const T rho = detail::tmin(alpha * zeta, (T(1) - alpha * (T(d) + kappa(d, inv_r))) / T(2));
    const bool ok = T(0) < alpha && alpha < alpha_bound(d, inv_r) && T(0) < zeta && !(T(1) < zeta) &&
                    !(inv_r < T(0)) && !(T(1) < inv_r);
    return {rho, ok};
}

/// Singular class: rho~ = min(alpha zeta, 1/2 - alpha d), admissible for
/// 0 < alpha < 1/(d + 2 beta + kappa_{r~}) with r~ > d and beta in (d/r~, 1).
template <class T>
bool singular_window(int d, const T& beta, const T& inv_r_tilde) {
    return inv_r_tilde < T(1) / T(d) && !(inv_r_tilde < T(0)) && T(d) * inv_r_tilde < beta && beta < T(1);
}

template <class T>
T alpha_bound_singular(int d, const T& beta, const T& inv_r_tilde) {
    return T(1) / (T(d) + T(2) * beta + kappa(d, inv_r_tilde));
}

template <class T>
Rate<T> theoretical_rate_singular(int d, const T& alpha, const T& zeta, const T& beta, const T& inv_r_tilde) {
    const T rho = detail::tmin(alpha * zeta, T(1) / T(2) - alpha * T(d));
    const bool ok = singular_window(d, beta, inv_r_tilde) && T(0) < alpha &&
                    alpha < alpha_bound_singular(d, beta, inv_r_tilde) && T(0) < zeta && !(T(1) < zeta);
    return {rho, ok};
}

/// alpha* = 1 / (2 zeta + d + kappa_r), where both branches of rho meet.
/// Throws EmptyWindow for zeta outside (0, 1].
template <class T>
BestAlpha<T> best_alpha(int d, const T& zeta, const T& inv_r) {
    if (!(T(0) < zeta) || T(1) < zeta) throw EmptyWindow("zeta must lie in (0, 1]");
    if (inv_r < T(0) || T(1) < inv_r) throw EmptyWindow("r must be >= 1");
    const T a = T(1) / (T(2) * zeta + T(d) + kappa(d, inv_r));
    const T bound = alpha_bound(d, inv_r);
    if (a < bound) return {a, a * zeta, false};
    return {bound, theoretical_rate(d, bound, zeta, inv_r).rho, true};
}

/// alpha* = 1 / (2 zeta + 2 d), clipped to the singular admissibility bound.
template <class T>
BestAlpha<T> best_alpha_singular(int d, const T& zeta, const T& beta, const T& inv_r_tilde) {
    if (!(T(0) < zeta) || T(1) < zeta) throw EmptyWindow("zeta must lie in (0, 1]");
    if (!singular_window(d, beta, inv_r_tilde)) throw EmptyWindow("singular window needs r~ > d and d/r~ < beta < 1");
    const T a = T(1) / (T(2) * zeta + T(2) * T(d));
    const T bound = alpha_bound_singular(d, beta, inv_r_tilde);
    if (a < bound) return {a, a * zeta, false};
    return {bound, theoretical_rate_singular(d, bound, zeta, beta, inv_r_tilde).rho, true};
}

struct SobolevExponent {
    double gamma = 0.0;
    double factor = 0.0;          // gamma / beta
    bool holder_embedding = false;  // gamma > d / (r~ - delta)
};

/// gamma = beta r~ (r~ - 1 - delta) / ((r~ - delta)(r~ - 1)). Throws
/// DeltaOutOfRange for delta outside (0, 1), or, when require_condition is
/// set, unless (r~ - delta - 1)/(r~ - 1) > (d / r~) / beta.
SobolevExponent sobolev_rate_exponent(int d, double beta, double r_tilde, double delta, bool require_condition = false);

// ------------------------------------------------------------ statistics

struct SlopeFit {
    double slope = 0.0;       // -d log(err) / d log(N)
    double half_width = 0.0;  // 1.96 jackknife standard errors (infinite with fewer than 3 points)
    double intercept = 0.0;
};

/// Least-squares fit of log(err) against log(N); requires positive errors.
SlopeFit fit_slope(const std::vector<double>& n, const std::vector<double>& err);

// ------------------------------------------------------------ sweeps

enum class ErrorMetric { L1, L1CapLr, KR };

std::string metric_name(ErrorMetric m);
ErrorMetric parse_metric(const std::string& s);

struct RateRow {
    long n = 0;
    int reps = 0;
    double mean_err = 0.0;  // (mean err^m)^{1/m}
    double std_err = 0.0;   // standard error of the mean of err
};

struct RateReport {
    std::vector<RateRow> rows;
    SlopeFit fit;
    ErrorMetric metric = ErrorMetric::L1CapLr;
    double rho_theory = 0.0;
    bool admissible = false;
    double saturated_fraction = 0.0;  // drift components that hit the cutoff
};

struct SweepOptions {
    int reps = 10;
    ErrorMetric metric = ErrorMetric::L1CapLr;
    double moment = 1.0;  // m in the L^m(Omega) estimate
    int burn_in = 0;      // smallest N values left out of the slope fit
    KrOptions kr;
};

/// For each N, reps independent runs (seed derive_seed(base.seed, rep)); the
/// error of a run is the sup over snapshot times of the metric between u^N
/// (or mu^N for KR) and the reference snapshot at the same time. Snapshot
/// times must match the reference run, which must be completed.
RateReport rate_sweep(const SimulationConfig& base, const std::vector<long>& n_list, const SweepOptions& opt,
                      const PdeRun& reference);

struct ChaosRow {
    long n = 0;
    int rep = 0;
    double gap = 0.0;  // max_i sup_t |X^i - X~^i|
};

/// Particles X^i and McKean-Vlasov copies X~^i with drift F_A(K*u_t)(X~)
/// share initial positions and Brownian increments. u_t is the reference
/// run, linear in time between snapshots (spacing at most 8 dt) and
/// multilinear in space.
std::vector<ChaosRow> chaos_coupling(const SimulationConfig& base, const std::vector<long>& n_list, int reps,
                                     const PdeRun& reference);

/// Median of the gaps of rows with the given N.
double median_gap(const std::vector<ChaosRow>& rows, long n);

}  // namespace moderate
