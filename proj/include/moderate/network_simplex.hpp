#pragma once

// Primal network simplex for uncapacitated min-cost transshipment.

#include <cstddef>
#include <vector>

namespace moderate {

struct Transshipment {
    struct Arc {
        int from = 0;
        int to = 0;
        double cost = 0.0;  // >= 0
    };
    int nodes = 0;
    std::vector<double> supply;  // net outflow required at each node; must sum to 0
    std::vector<Arc> arcs;
};

struct TransshipmentSolution {
    double cost = 0.0;
    std::vector<double> flow;       // per arc
    std::vector<double> potential;  // dual: potential[u] - potential[v] <= cost(u, v), max sum supply * potential
    std::size_t pivots = 0;
};

/// Throws NoConvergence past max_pivots, ValidationError on unbalanced supplies
/// or an infeasible network.
TransshipmentSolution solve_transshipment(const Transshipment& problem, std::size_t max_pivots);

}  // namespace moderate
