#include "moderate/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moderate/parallel.hpp"

namespace moderate {

SobolevExponent sobolev_rate_exponent(int d, double beta, double r_tilde, double delta, bool require_condition) {
    if (!(delta > 0.0 && delta < 1.0)) throw DeltaOutOfRange("delta must lie in (0, 1)");
    if (!(r_tilde > 1.0 + delta)) throw DeltaOutOfRange("r~ must exceed 1 + delta");
    if (!(beta > 0.0)) throw ValidationError("beta must be > 0");
    if (require_condition && !((r_tilde - delta - 1.0) / (r_tilde - 1.0) > (d / r_tilde) / beta)) {
        throw DeltaOutOfRange("delta too large for the Hoelder embedding: (r~-delta-1)/(r~-1) <= (d/r~)/beta");
    }
    SobolevExponent e;
    e.factor = r_tilde * (r_tilde - 1.0 - delta) / ((r_tilde - delta) * (r_tilde - 1.0));
    e.gamma = beta * e.factor;
    e.holder_embedding = e.gamma > d / (r_tilde - delta);
    return e;
}

SlopeFit fit_slope(const std::vector<double>& n, const std::vector<double>& err) {
    if (n.size() != err.size() || n.size() < 2) throw ValidationError("slope fit needs at least two (N, error) pairs");
    auto fit = [&](std::size_t skip) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (i == skip) continue;
            if (!(n[i] > 0.0) || !(err[i] > 0.0)) throw ValidationError("slope fit needs positive N and errors");
            const double x = std::log(n[i]), y = std::log(err[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            m += 1.0;
        }
        const double b = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        return std::pair{-b, (sy - b * sx) / m};
    };
    SlopeFit f;
    std::tie(f.slope, f.intercept) = fit(n.size());
    const std::size_t k = n.size();
    if (k < 3) {
        f.half_width = INFINITY;
        return f;
    }
    std::vector<double> loo(k);
    double mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        loo[i] = fit(i).first;
        mean += loo[i] / k;
    }
    double var = 0.0;
    for (double s : loo) var += (s - mean) * (s - mean);
    var *= double(k - 1) / double(k);
    f.half_width = 1.96 * std::sqrt(var);
    return f;
}

std::string metric_name(ErrorMetric m) {
    switch (m) {
        case ErrorMetric::L1: return "l1";
        case ErrorMetric::L1CapLr: return "l1-lr";
        case ErrorMetric::KR: return "kr";
    }
    return "?";
}

ErrorMetric parse_metric(const std::string& s) {
    for (auto m : {ErrorMetric::L1, ErrorMetric::L1CapLr, ErrorMetric::KR}) {
        if (metric_name(m) == s) return m;
    }
    throw ValidationError("unknown error metric '" + s + "' (expected l1, l1-lr or kr)");
}

namespace {

const GridField& reference_at(const PdeRun& ref, double t) {
    for (const auto& s : ref.snapshots) {
        if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return s;
    }
    throw ValidationError("reference run has no snapshot at t = " + std::to_string(t));
}

void check_reference(const SimulationConfig& cfg, const PdeRun& ref) {
    if (ref.status != PdeStatus::Completed) throw NotCompleted("the reference PDE run did not complete");
    if (ref.snapshots.empty() || !(ref.snapshots.front().grid == cfg.grid)) {
        throw ValidationError("reference run and simulation must share the grid");
    }
}

}  // namespace

RateReport rate_sweep(const SimulationConfig& base, const std::vector<long>& n_list, const SweepOptions& opt,
                      const PdeRun& ref) {
    if (n_list.empty()) throw ValidationError("rate sweep needs at least one N");
    if (opt.reps < 1) throw ValidationError("rate sweep needs reps >= 1");
    if (!(opt.moment >= 1.0)) throw ValidationError("moment m must be >= 1");
    check_reference(base, ref);
    for (double t : base.snapshot_times) reference_at(ref, t);
    reference_at(ref, 0.0);
    reference_at(ref, base.T);

    RateReport rep;
    rep.metric = opt.metric;
    const Rate<double> rate = theoretical_rate(base.kernel.dim(), base.alpha, 1.0, std::isinf(ref.r) ? 0.0 : 1.0 / ref.r);
    rep.rho_theory = rate.rho;
    rep.admissible = rate.admissible;
    std::vector<long> ns = n_list;
    std::sort(ns.begin(), ns.end());
    std::size_t evals = 0, saturated = 0;
    for (long n : ns) {
        std::vector<double> errs;
        for (int r = 0; r < opt.reps; ++r) {
            SimulationConfig cfg = base;
            cfg.N = n;
            cfg.seed = derive_seed(base.seed, static_cast<std::uint64_t>(r));
            cfg.deposit = opt.metric != ErrorMetric::KR;
            const auto sim = simulate(cfg);
            evals += sim.stats.evaluations;
            saturated += sim.stats.saturated;
            double worst = 0.0;
            for (std::size_t j = 0; j < sim.snapshots.size(); ++j) {
                const double t = sim.snapshots[j].t;
                const GridField& u = reference_at(ref, t);
                double e = 0.0;
                if (opt.metric == ErrorMetric::KR) {
                    const auto mu = WeightedPointSet::empirical(cfg.kernel.dim(), sim.snapshots[j].positions);
                    e = kr_distance(mu, u, opt.kr);
                } else {
                    GridField diff = sim.fields[j];
                    for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= u.values[i];
                    e = lp_norm(diff, 1.0);
                    if (opt.metric == ErrorMetric::L1CapLr) e += lp_norm(diff, ref.r);
                }
                worst = std::max(worst, e);
            }
            errs.push_back(worst);
        }
        RateRow row;
        row.n = n;
        row.reps = opt.reps;
        double m = 0.0, mm = 0.0;
        for (double e : errs) {
            m += e / errs.size();
            mm += std::pow(e, opt.moment) / errs.size();
        }
        row.mean_err = std::pow(mm, 1.0 / opt.moment);
        double var = 0.0;
        for (double e : errs) var += (e - m) * (e - m);
        row.std_err = errs.size() > 1 ? std::sqrt(var / (errs.size() - 1) / errs.size()) : 0.0;
        rep.rows.push_back(row);
    }
    if (opt.burn_in < 0) throw ValidationError("burn_in must be >= 0");
    if (rep.rows.size() >= 2 + static_cast<std::size_t>(opt.burn_in)) {
        std::vector<double> x, y;
        for (std::size_t i = opt.burn_in; i < rep.rows.size(); ++i) {
            const auto& r = rep.rows[i];
            x.push_back(static_cast<double>(r.n));
            y.push_back(r.mean_err);
        }
        rep.fit = fit_slope(x, y);
    }
    rep.saturated_fraction = evals ? double(saturated) / double(evals) : 0.0;
    return rep;
}

// ------------------------------------------------------------ coupling

namespace {

// K*u_t at the reference snapshots, linear in time and multilinear in space;
// points off the grid sum the raw kernel over the nodes.
class ReferenceDrift {
public:
    ReferenceDrift(const KernelSpec& kernel, const PdeRun& ref) : kernel_(kernel), ref_(ref) {
        grid_ = ref.snapshots.front().grid;
        if (kernel.terms().empty()) return;
        FreeSpaceConvolver conv(kernel, grid_);
        for (const auto& s : ref.snapshots) {
            w_.push_back(std::vector<double>(grid_.d * grid_.size()));
            conv.apply(s.values, w_.back());
        }
    }

    void operator()(double t, const double* x, double* out) const {
        const int d = grid_.d;
        for (int a = 0; a < d; ++a) out[a] = 0.0;
        if (w_.empty()) return;
        const auto& snaps = ref_.snapshots;
        std::size_t j = 0;
        while (j + 2 < snaps.size() && snaps[j + 1].t <= t) ++j;
        const double t0 = snaps[j].t, t1 = snaps[j + 1].t;
        const double theta = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        bool inside = true;
        for (int a = 0; a < d; ++a) {
            if (!(x[a] >= -grid_.L && x[a] <= grid_.L - grid_.dx())) inside = false;
        }
        double v0[3], v1[3];
        if (inside) {
            interpolate_vector(grid_, w_[j], x, v0);
            interpolate_vector(grid_, w_[j + 1], x, v1);
        } else {
            far(snaps[j], x, v0);
            far(snaps[j + 1], x, v1);
        }
        for (int a = 0; a < d; ++a) out[a] = (1.0 - theta) * v0[a] + theta * v1[a];
    }

private:
    void far(const GridField& u, const double* x, double* out) const {
        const int d = grid_.d, G = grid_.G;
        const double cell = std::pow(grid_.dx(), d);
        double y[3], k[3];
        for (int a = 0; a < d; ++a) out[a] = 0.0;
        for (std::size_t flat = 0; flat < u.values.size(); ++flat) {
            if (u.values[flat] == 0.0) continue;
            std::size_t rest = flat;
            double r2 = 0.0;
            for (int a = d - 1; a >= 0; --a) {
                y[a] = x[a] - grid_.coord(static_cast<int>(rest % G));
                rest /= G;
                r2 += y[a] * y[a];
            }
            if (r2 == 0.0) continue;
            eval_kernel(kernel_, std::span<const double>(y, d), std::span<double>(k, d));
            for (int a = 0; a < d; ++a) out[a] += k[a] * u.values[flat] * cell;
        }
    }

    KernelSpec kernel_;
    const PdeRun& ref_;
    GridSpec grid_;
    std::vector<std::vector<double>> w_;
};

}  // namespace

std::vector<ChaosRow> chaos_coupling(const SimulationConfig& base, const std::vector<long>& n_list, int reps,
                                     const PdeRun& ref) {
    if (reps < 1) throw ValidationError("coupling needs reps >= 1");
    check_reference(base, ref);
    base.validate();
    const auto& snaps = ref.snapshots;
    if (snaps.size() < 2 || std::abs(snaps.front().t) > 1e-12 || snaps.back().t < base.T - 1e-9) {
        throw ValidationError("reference run must cover [0, T]");
    }
    for (std::size_t j = 1; j < snaps.size(); ++j) {
        if (snaps[j].t - snaps[j - 1].t > 8.0 * base.dt * (1.0 + 1e-9)) {
            throw ValidationError("reference snapshots must be at most 8 dt apart");
        }
    }
    const int d = base.kernel.dim();
    const ReferenceDrift mv(base.kernel, ref);
    std::optional<CutoffFn> cutoff;
    if (base.cutoff) cutoff.emplace(*base.cutoff);
    const long steps = std::lround(base.T / base.dt);

    std::vector<ChaosRow> rows;
    std::vector<long> ns = n_list;
    std::sort(ns.begin(), ns.end());
    for (long n : ns) {
        const auto moll = MollifierSpec::make(d, base.R, base.alpha, n);
        SimulationConfig cfg = base;
        cfg.N = n;
        InteractionDrift interaction(base.kernel, moll, base.cutoff, resolve_drift_path(cfg), base.grid,
                                     base.table_resolution, base.table_tol);
        for (int r = 0; r < reps; ++r) {
            const CounterRng rng(derive_seed(base.seed, static_cast<std::uint64_t>(r)));
            ParticleState x;
            x.d = d;
            x.x = sample_initial(base.init, static_cast<std::size_t>(n), rng);
            ParticleState y = x;
            std::vector<double> fx(x.x.size(), 0.0), fy(x.x.size(), 0.0);
            double gap = 0.0;
            for (long k = 0; k < steps; ++k) {
                const double t = k * base.dt;
                interaction(x, fx);
                parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i) {
                        mv(t, &y.x[i * d], &fy[i * d]);
                        if (cutoff) {
                            for (int a = 0; a < d; ++a) fy[i * d + a] = (*cutoff)(fy[i * d + a]);
                        }
                    }
                });
                em_step(x, base.dt, fx, rng, base.noise);
                em_step(y, base.dt, fy, rng, base.noise);
                for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
                    double s = 0.0;
                    for (int a = 0; a < d; ++a) s += std::pow(x.x[i * d + a] - y.x[i * d + a], 2);
                    gap = std::max(gap, std::sqrt(s));
                }
            }
            rows.push_back({n, r, gap});
        }
    }
    return rows;
}

double median_gap(const std::vector<ChaosRow>& rows, long n) {
    std::vector<double> g;
    for (const auto& r : rows) {
        if (r.n == n) g.push_back(r.gap);
    }
    if (g.empty()) throw ValidationError("no coupling rows for N = " + std::to_string(n));
    std::sort(g.begin(), g.end());
    const std::size_t m = g.size() / 2;
    return g.size() % 2 ? g[m] : 0.5 * (g[m - 1] + g[m]);
}

}  // namespace moderate
