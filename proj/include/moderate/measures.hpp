#pragma once

// Empirical measures: deposition of u^N = V^N * mu^N on a grid, L^p and Bessel
// norms of grid fields, and the bounded-Lipschitz (Kantorovich-Rubinstein) distance.

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "moderate/grid.hpp"
#include "moderate/mollifier.hpp"

namespace moderate {

struct WeightedPointSet {
    int d = 1;
    std::vector<double> points;   // M x d, row-major
    std::vector<double> weights;  // M

    std::size_t size() const { return weights.size(); }
    /// Equal weights 1/M.
    static WeightedPointSet empirical(int d, std::vector<double> points);
    /// Throws NonProbability unless weights are >= 0 and sum to 1 within 1e-12.
    void validate() const;
};

struct DepositStats {
    std::size_t wrapped = 0;  // points outside [-L, L)^d, wrapped onto the torus
};

/// u^N at grid nodes: sum_k w_k V^N(x - X_k), visiting only the nodes inside each
/// bump support. Throws BumpUnderresolved when R N^{-alpha} < 2 dx.
GridField deposit_uN(const WeightedPointSet& points, const MollifierSpec& mollifier, const GridSpec& grid,
                     DepositStats* stats = nullptr);

/// Riemann-sum L^p norm of a scalar field (p = infinity gives the max).
double lp_norm(const GridField& f, double p);
/// ||f||_{L^1} + ||f||_{L^r}.
double l1_cap_lr(const GridField& f, double r);
/// || F^{-1} (1+|xi|^2)^{beta/2} F f ||_{L^r} with torus frequencies.
double bessel_norm(const GridField& f, double beta, double r);
/// Riemann-sum integral of a scalar field.
double integral(const GridField& f);

/// Sum of |f| dx^d over nodes within `width` of the boundary of [-L, L)^d.
double boundary_mass(const GridField& f, double width);

using Measure = std::variant<WeightedPointSet, GridField>;

struct KrOptions {
    /// Grid fields are summed over blocks of 2^coarsen nodes per axis first.
    int coarsen = 0;
    std::size_t max_pivots = 50'000'000;
    /// Allowed deviation of total mass from 1 for grid inputs.
    double grid_mass_tol = 1e-6;
};

/// Bounded-Lipschitz distance sup { int phi d(mu - nu) : |phi| <= 1, Lip(phi) <= 1 }
/// with the l^1 metric between atoms. Point sets are compared atom to atom;
/// any grid input puts both measures on that grid's nodes (points binned to the
/// nearest node). Solved exactly as a transshipment problem.
double kr_distance(const Measure& mu, const Measure& nu, const KrOptions& opt = {});

}  // namespace moderate
