#include "moderate/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "moderate/errors.hpp"
#include "moderate/network_simplex.hpp"

namespace moderate {

WeightedPointSet WeightedPointSet::empirical(int d, std::vector<double> points) {
    WeightedPointSet s;
    s.d = d;
    const std::size_t m = points.size() / d;
    s.points = std::move(points);
    s.weights.assign(m, m ? 1.0 / static_cast<double>(m) : 0.0);
    return s;
}

void WeightedPointSet::validate() const {
    if (d < 1 || points.size() != weights.size() * d) throw ValidationError("point set shape mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw NonProbability("negative or non-finite weight in point set");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw NonProbability("point set weights sum to " + std::to_string(sum) + ", not 1");
}

// ------------------------------------------------------------ deposition

GridField deposit_uN(const WeightedPointSet& pts, const MollifierSpec& moll, const GridSpec& grid, DepositStats* stats) {
    grid.validate();
    if (pts.d != grid.d || moll.d != grid.d) throw ValidationError("deposit: dimension mismatch");
    const double h = moll.support();
    const double dx = grid.dx();
    if (h < 2.0 * dx) {
        throw BumpUnderresolved("bump support R N^-alpha = " + std::to_string(h) + " is below two grid cells (dx = " +
                                std::to_string(dx) + "); refine the grid or lower alpha");
    }
    const int d = grid.d, G = grid.G;
    const double period = 2.0 * grid.L;
    const double s = moll.scale();
    const double amp = std::pow(s, d) * moll.norm_const;
    const double inv_r2 = s * s / (moll.R * moll.R);
    GridField u(grid);
    std::size_t wrapped = 0;
    const int reach = static_cast<int>(std::ceil(h / dx)) + 1;

    // Each stencil is rescaled so its Riemann sum is exactly w: a plain node
    // sampling of the bump misses unit mass by ~1e-5 at 16 cells per radius.
    const double cell = std::pow(dx, d);
    std::vector<std::pair<std::size_t, double>> stencil;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        double x[3];
        bool outside = false;
        for (int a = 0; a < d; ++a) {
            double v = pts.points[k * d + a];
            if (v < -grid.L || v >= grid.L) {
                outside = true;
                v = v - period * std::floor((v + grid.L) / period);
                if (v >= grid.L) v -= period;
            }
            x[a] = v;
        }
        if (outside) ++wrapped;
        int base[3];
        for (int a = 0; a < d; ++a) base[a] = static_cast<int>(std::floor((x[a] + grid.L) / dx));
        int off[3] = {-reach, -reach, -reach};
        stencil.clear();
        double sum = 0.0;
        for (;;) {
            double r2 = 0.0;
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) {
                const int i = base[a] + off[a];
                const double diff = -grid.L + i * dx - x[a];
                r2 += diff * diff;
                flat = flat * G + static_cast<std::size_t>(((i % G) + G) % G);
            }
            const double t2 = r2 * inv_r2;
            if (t2 < 1.0) {
                const double v = amp * std::exp(-1.0 / (1.0 - t2));
                stencil.emplace_back(flat, v);
                sum += v;
            }
            int a = d - 1;
            while (a >= 0 && ++off[a] > reach) off[a--] = -reach;
            if (a < 0) break;
        }
        const double scale = pts.weights[k] / (sum * cell);
        for (const auto& [flat, v] : stencil) u.values[flat] += scale * v;
    }
    if (stats) stats->wrapped = wrapped;
    return u;
}

// ------------------------------------------------------------ norms

double integral(const GridField& f) {
    double acc = 0.0;
    for (double v : f.component(0)) acc += v;
    return acc * std::pow(f.grid.dx(), f.grid.d);
}

double lp_norm(const GridField& f, double p) {
    if (!(p >= 1.0)) throw ValidationError("L^p norm requires p >= 1");
    const auto v = f.component(0);
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    const double cell = std::pow(f.grid.dx(), f.grid.d);
    double acc = 0.0;
    if (p == 1.0) {
        for (double x : v) acc += std::abs(x);
        return acc * cell;
    }
    if (p == 2.0) {
        for (double x : v) acc += x * x;
        return std::sqrt(acc * cell);
    }
    for (double x : v) acc += std::pow(std::abs(x), p);
    return std::pow(acc * cell, 1.0 / p);
}

double l1_cap_lr(const GridField& f, double r) { return lp_norm(f, 1.0) + lp_norm(f, r); }

double bessel_norm(const GridField& f, double beta, double r) {
    const auto& g = f.grid;
    RealFft fft(g.d, g.G);
    auto src = f.component(0);
    std::copy(src.begin(), src.end(), fft.real().begin());
    fft.forward();
    auto spec = fft.spectrum();
    const double k0 = std::numbers::pi / g.L;
    const double norm = 1.0 / static_cast<double>(g.size());
    if (r == 2.0) {
        // Plancherel: sum over the full spectrum, half-spectrum entries counted twice
        // except on the self-conjugate planes of the last axis.
        double acc = 0.0;
        for_each_mode(g.d, g.G, [&](std::size_t flat, const int* idx) {
            double n2 = 0.0;
            for (int a = 0; a < g.d; ++a) n2 += double(idx[a]) * idx[a];
            const double m = std::pow(1.0 + k0 * k0 * n2, beta);
            const int last = idx[g.d - 1];
            const double mult = (last == 0 || last == g.G / 2) ? 1.0 : 2.0;
            acc += mult * m * std::norm(spec[flat]);
        });
        return std::sqrt(acc * norm * std::pow(g.dx(), g.d));
    }
    for_each_mode(g.d, g.G, [&](std::size_t flat, const int* idx) {
        double n2 = 0.0;
        for (int a = 0; a < g.d; ++a) n2 += double(idx[a]) * idx[a];
        spec[flat] *= std::pow(1.0 + k0 * k0 * n2, 0.5 * beta) * norm;
    });
    fft.inverse();
    GridField out(g);
    std::copy(fft.real().begin(), fft.real().end(), out.values.begin());
    return lp_norm(out, r);
}

double boundary_mass(const GridField& f, double width) {
    const auto& g = f.grid;
    const auto v = f.component(0);
    double acc = 0.0;
    for (std::size_t flat = 0; flat < v.size(); ++flat) {
        std::size_t rest = flat;
        bool edge = false;
        for (int a = 0; a < g.d; ++a) {
            const int i = static_cast<int>(rest % g.G);
            rest /= g.G;
            const double x = g.coord(i);
            edge = edge || x < -g.L + width || x > g.L - width;
        }
        if (edge) acc += std::abs(v[flat]);
    }
    return acc * std::pow(g.dx(), g.d);
}

// ------------------------------------------------------------ KR distance

namespace {

struct Atoms {
    int d = 1;
    std::vector<double> x;       // location per atom
    std::vector<double> weight;  // signed: mu - nu
};

double kr_from_supplies(const std::vector<double>& b, std::vector<Transshipment::Arc> arcs, std::size_t max_pivots) {
    Transshipment p;
    const int n = static_cast<int>(b.size());
    p.nodes = n + 1;  // last node: ground, reachable from every atom at cost 1
    p.supply = b;
    double total = 0.0;
    for (double v : b) total += v;
    p.supply.push_back(-total);
    for (int i = 0; i < n; ++i) {
        arcs.push_back({i, n, 1.0});
        arcs.push_back({n, i, 1.0});
    }
    p.arcs = std::move(arcs);
    return solve_transshipment(p, max_pivots).cost;
}

struct CoarseGrid {
    int d, G;
    double x0, dx;
};

CoarseGrid coarse_of(const GridSpec& g, int coarsen) {
    if (coarsen < 0 || (g.G >> coarsen) < 1) throw ValidationError("KR coarsening factor too large for the grid");
    const int f = 1 << coarsen;
    return {g.d, g.G / f, g.coord(0) + 0.5 * (f - 1) * g.dx(), g.dx() * f};
}

void add_grid_field(const GridField& f, const CoarseGrid& c, double sign, double tol, std::vector<double>& b) {
    if (f.components != 1) throw ValidationError("KR distance needs a scalar field");
    const double cell = std::pow(f.grid.dx(), f.grid.d);
    const int factor = f.grid.G / c.G;
    double mass = 0.0;
    const auto v = f.component(0);
    for (std::size_t flat = 0; flat < v.size(); ++flat) {
        std::size_t rest = flat, cflat = 0, mul = 1;
        for (int a = f.grid.d - 1; a >= 0; --a) {
            const int i = static_cast<int>(rest % f.grid.G);
            rest /= f.grid.G;
            cflat += mul * (i / factor);
            mul *= c.G;
        }
        b[cflat] += sign * v[flat] * cell;
        mass += v[flat] * cell;
    }
    if (std::abs(mass - 1.0) > tol) throw NonProbability("grid field mass " + std::to_string(mass) + " is not 1");
}

void add_points(const WeightedPointSet& s, const CoarseGrid& c, double sign, std::vector<double>& b) {
    s.validate();
    if (s.d != c.d) throw ValidationError("KR distance: dimension mismatch");
    for (std::size_t k = 0; k < s.size(); ++k) {
        std::size_t cflat = 0;
        for (int a = 0; a < c.d; ++a) {
            const long i = std::lround((s.points[k * c.d + a] - c.x0) / c.dx);
            cflat = cflat * c.G + static_cast<std::size_t>(std::clamp<long>(i, 0, c.G - 1));
        }
        b[cflat] += sign * s.weights[k];
    }
}

}  // namespace

double kr_distance(const Measure& mu, const Measure& nu, const KrOptions& opt) {
    const auto* pm = std::get_if<WeightedPointSet>(&mu);
    const auto* pn = std::get_if<WeightedPointSet>(&nu);
    if (pm && pn) {
        pm->validate();
        pn->validate();
        if (pm->d != pn->d) throw ValidationError("KR distance: dimension mismatch");
        const int d = pm->d;
        const std::size_t n = pm->size() + pn->size();
        if (n > 4000) throw ValidationError("KR distance between point sets is limited to 4000 atoms; deposit on a grid");
        std::vector<const double*> loc;
        std::vector<double> b;
        for (std::size_t k = 0; k < pm->size(); ++k) {
            loc.push_back(&pm->points[k * d]);
            b.push_back(pm->weights[k]);
        }
        for (std::size_t k = 0; k < pn->size(); ++k) {
            loc.push_back(&pn->points[k * d]);
            b.push_back(-pn->weights[k]);
        }
        std::vector<Transshipment::Arc> arcs;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                double dist = 0.0;
                for (int a = 0; a < d; ++a) dist += std::abs(loc[i][a] - loc[j][a]);
                // paths through the ground node already cost 2
                if (dist < 2.0) arcs.push_back({static_cast<int>(i), static_cast<int>(j), dist});
            }
        return kr_from_supplies(b, std::move(arcs), opt.max_pivots);
    }

    const GridSpec* grid = nullptr;
    if (const auto* g = std::get_if<GridField>(&mu)) grid = &g->grid;
    if (const auto* g = std::get_if<GridField>(&nu)) {
        if (grid && !(*grid == g->grid)) throw ValidationError("KR distance: grid fields live on different grids");
        grid = &g->grid;
    }
    const CoarseGrid c = coarse_of(*grid, opt.coarsen);
    std::size_t nodes = 1;
    for (int a = 0; a < c.d; ++a) nodes *= c.G;
    std::vector<double> b(nodes, 0.0);
    int sign = 1;
    for (const Measure* m : {&mu, &nu}) {
        if (const auto* g = std::get_if<GridField>(m)) {
            add_grid_field(*g, c, sign, opt.grid_mass_tol, b);
        } else {
            add_points(std::get<WeightedPointSet>(*m), c, sign, b);
        }
        sign = -1;
    }
    std::vector<Transshipment::Arc> arcs;
    std::size_t stride = 1;
    for (int a = c.d - 1; a >= 0; --a) {
        for (std::size_t flat = 0; flat < nodes; ++flat) {
            const std::size_t i = (flat / stride) % c.G;
            if (i + 1 < static_cast<std::size_t>(c.G)) {
                const int u = static_cast<int>(flat), v = static_cast<int>(flat + stride);
                arcs.push_back({u, v, c.dx});
                arcs.push_back({v, u, c.dx});
            }
        }
        stride *= c.G;
    }
    return kr_from_supplies(b, std::move(arcs), opt.max_pivots);
}

}  // namespace moderate
