#include "moderate/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moderate/errors.hpp"

namespace moderate {

namespace {

// Spanning-tree basis rooted at an artificial node. Strongly feasible
// throughout (Cunningham's leaving-arc rule), which rules out cycling.
class Solver {
public:
    explicit Solver(const Transshipment& p) : real_arcs_(p.arcs.size()) {
        const int n = p.nodes;
        root_ = n;
        nodes_ = n + 1;
        double max_cost = 0.0, total = 0.0;
        for (const auto& a : p.arcs) {
            if (a.from < 0 || a.from >= n || a.to < 0 || a.to >= n) throw ValidationError("arc endpoint out of range");
            if (!(a.cost >= 0.0)) throw ValidationError("arc costs must be >= 0");
            from_.push_back(a.from);
            to_.push_back(a.to);
            cost_.push_back(a.cost);
            max_cost = std::max(max_cost, a.cost);
        }
        double balance = 0.0;
        for (double b : p.supply) {
            balance += b;
            total += std::abs(b);
        }
        if (std::abs(balance) > 1e-9 * std::max(1.0, total)) throw ValidationError("transshipment supplies do not balance");
        const double big = (max_cost + 1.0) * (n + 1);
        tol_ = 1e-15 * std::max(1.0, total);
        flow_.assign(real_arcs_, 0.0);
        for (int i = 0; i < n; ++i) {
            const double b = p.supply[i];
            if (b > 0.0) {
                from_.push_back(i);
                to_.push_back(root_);
                flow_.push_back(b);
            } else {
                from_.push_back(root_);
                to_.push_back(i);
                flow_.push_back(-b);
            }
            cost_.push_back(big);
        }
        in_tree_.assign(from_.size(), false);
        tree_adj_.assign(nodes_, {});
        for (std::size_t e = real_arcs_; e < from_.size(); ++e) link(static_cast<int>(e));
        parent_.assign(nodes_, -1);
        parent_arc_.assign(nodes_, -1);
        depth_.assign(nodes_, 0);
        y_.assign(nodes_, 0.0);
        rebuild();
    }

    std::size_t run(std::size_t max_pivots) {
        const std::size_t m = real_arcs_;
        if (m == 0) return 0;
        const std::size_t block = std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(double(m))));
        std::size_t next = 0, pivots = 0;
        for (;;) {
            int best = -1;
            double best_rc = -1e-12;
            std::size_t scanned = 0;
            while (scanned < m) {
                const std::size_t stop = std::min(m, scanned + block);
                for (; scanned < stop; ++scanned) {
                    const std::size_t e = next;
                    next = next + 1 == m ? 0 : next + 1;
                    if (in_tree_[e]) continue;
                    const double rc = cost_[e] + y_[from_[e]] - y_[to_[e]];
                    if (rc < best_rc) {
                        best_rc = rc;
                        best = static_cast<int>(e);
                    }
                }
                if (best >= 0) break;
            }
            if (best < 0) return pivots;
            if (++pivots > max_pivots) {
                throw NoConvergence("network simplex exceeded " + std::to_string(max_pivots) + " pivots");
            }
            pivot(best);
        }
    }

    TransshipmentSolution result(std::size_t pivots) const {
        TransshipmentSolution s;
        s.pivots = pivots;
        s.flow.assign(flow_.begin(), flow_.begin() + real_arcs_);
        for (std::size_t e = 0; e < real_arcs_; ++e) s.cost += cost_[e] * flow_[e];
        for (std::size_t e = real_arcs_; e < flow_.size(); ++e) {
            if (flow_[e] > 1e-9) throw ValidationError("transshipment problem is infeasible");
        }
        s.potential.resize(root_);
        for (int i = 0; i < root_; ++i) s.potential[i] = -y_[i];
        return s;
    }

private:
    void link(int e) {
        in_tree_[e] = true;
        tree_adj_[from_[e]].push_back(e);
        tree_adj_[to_[e]].push_back(e);
    }

    void unlink(int e) {
        in_tree_[e] = false;
        for (int v : {from_[e], to_[e]}) {
            auto& adj = tree_adj_[v];
            adj.erase(std::find(adj.begin(), adj.end(), e));
        }
    }

    // parent pointers, depths and potentials (y_to = y_from + cost on tree arcs)
    void rebuild() {
        stack_.clear();
        stack_.push_back(root_);
        parent_[root_] = -1;
        parent_arc_[root_] = -1;
        depth_[root_] = 0;
        y_[root_] = 0.0;
        while (!stack_.empty()) {
            const int u = stack_.back();
            stack_.pop_back();
            for (int e : tree_adj_[u]) {
                if (e == parent_arc_[u]) continue;
                const int v = from_[e] == u ? to_[e] : from_[e];
                parent_[v] = u;
                parent_arc_[v] = e;
                depth_[v] = depth_[u] + 1;
                y_[v] = from_[e] == u ? y_[u] + cost_[e] : y_[u] - cost_[e];
                stack_.push_back(v);
            }
        }
    }

    void pivot(int entering) {
        const int u = from_[entering], v = to_[entering];
        path_u_.clear();
        path_v_.clear();
        int a = u, b = v;
        while (depth_[a] > depth_[b]) {
            path_u_.push_back(a);
            a = parent_[a];
        }
        while (depth_[b] > depth_[a]) {
            path_v_.push_back(b);
            b = parent_[b];
        }
        while (a != b) {
            path_u_.push_back(a);
            path_v_.push_back(b);
            a = parent_[a];
            b = parent_[b];
        }
        // cycle orientation: apex -> ... -> u -> v -> ... -> apex
        // on path_u the walk goes parent -> child; on path_v child -> parent.
        auto backward_u = [&](int x) { return from_[parent_arc_[x]] == x; };
        auto backward_v = [&](int x) { return from_[parent_arc_[x]] != x; };
        double delta = INFINITY;
        for (int x : path_u_)
            if (backward_u(x)) delta = std::min(delta, flow_[parent_arc_[x]]);
        for (int x : path_v_)
            if (backward_v(x)) delta = std::min(delta, flow_[parent_arc_[x]]);
        if (!std::isfinite(delta)) throw ValidationError("transshipment problem is unbounded");

        int leaving = -1;
        for (int x : path_v_)
            if (backward_v(x) && flow_[parent_arc_[x]] <= delta + tol_) leaving = parent_arc_[x];
        if (leaving < 0) {
            for (int x : path_u_) {
                if (backward_u(x) && flow_[parent_arc_[x]] <= delta + tol_) {
                    leaving = parent_arc_[x];
                    break;
                }
            }
        }

        auto push = [&](int e, double amount) {
            flow_[e] += amount;
            if (std::abs(flow_[e]) <= tol_) flow_[e] = 0.0;
        };
        for (int x : path_u_) push(parent_arc_[x], backward_u(x) ? -delta : delta);
        for (int x : path_v_) push(parent_arc_[x], backward_v(x) ? -delta : delta);
        flow_[entering] = delta;
        flow_[leaving] = 0.0;
        unlink(leaving);
        link(entering);
        rebuild();
    }

    std::size_t real_arcs_;
    int root_ = 0, nodes_ = 0;
    double tol_ = 0.0;
    std::vector<int> from_, to_;
    std::vector<double> cost_, flow_;
    std::vector<bool> in_tree_;
    std::vector<std::vector<int>> tree_adj_;
    std::vector<int> parent_, parent_arc_, depth_;
    std::vector<double> y_;
    std::vector<int> stack_, path_u_, path_v_;
};

}  // namespace

TransshipmentSolution solve_transshipment(const Transshipment& problem, std::size_t max_pivots) {
    if (static_cast<int>(problem.supply.size()) != problem.nodes) throw ValidationError("supply size != node count");
    Solver s(problem);
    const std::size_t pivots = s.run(max_pivots);
    return s.result(pivots);
}

}  // namespace moderate
