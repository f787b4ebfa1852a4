#include "moderate/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "moderate/errors.hpp"
#include "moderate/measures.hpp"
#include "moderate/parallel.hpp"

namespace moderate {

// ------------------------------------------------------------ initial law

InitialLaw InitialLaw::gaussian(int d, double var) {
    InitialLaw law;
    law.d = d;
    law.components.push_back({1.0, std::vector<double>(d, 0.0), var});
    return law;
}

void InitialLaw::validate() const {
    if (d < 1 || d > 3) throw BadMixture("initial law dimension must be 1..3");
    if (components.empty()) throw BadMixture("initial law has no components");
    double sum = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0)) throw BadMixture("mixture weights must be > 0");
        if (!(c.var > 0.0) || !std::isfinite(c.var)) throw BadMixture("mixture variances must be finite and > 0");
        if (static_cast<int>(c.mean.size()) != d) throw BadMixture("mixture mean has the wrong dimension");
        for (double m : c.mean) {
            if (!std::isfinite(m)) throw BadMixture("mixture mean is not finite");
        }
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw BadMixture("mixture weights sum to " + std::to_string(sum) + ", not 1");
}

GridField InitialLaw::density(const GridSpec& grid) const {
    validate();
    if (grid.d != d) throw ValidationError("initial law and grid dimensions differ");
    GridField f(grid);
    const int G = grid.G;
    for (std::size_t flat = 0; flat < f.values.size(); ++flat) {
        double x[3];
        std::size_t rest = flat;
        for (int a = d - 1; a >= 0; --a) {
            x[a] = grid.coord(static_cast<int>(rest % G));
            rest /= G;
        }
        double v = 0.0;
        for (const auto& c : components) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += (x[a] - c.mean[a]) * (x[a] - c.mean[a]);
            v += c.weight * std::exp(-r2 / (2.0 * c.var)) / std::pow(2.0 * std::numbers::pi * c.var, 0.5 * d);
        }
        f.values[flat] = v;
    }
    return f;
}

std::vector<double> sample_initial(const InitialLaw& law, std::size_t N, const CounterRng& rng) {
    law.validate();
    const int d = law.d;
    std::vector<double> x(N * d);
    parallel_for(N, [&](std::size_t lo, std::size_t hi) {
        double z[3];
        for (std::size_t i = lo; i < hi; ++i) {
            std::size_t comp = 0;
            if (law.components.size() > 1) {
                const double u = rng.uniforms(Stream::Mixture, i, 0, 0)[0];
                double acc = 0.0;
                comp = law.components.size() - 1;
                for (std::size_t c = 0; c < law.components.size(); ++c) {
                    acc += law.components[c].weight;
                    if (u < acc) {
                        comp = c;
                        break;
                    }
                }
            }
            const auto& c = law.components[comp];
            rng.normals(Stream::Initial, i, 0, std::span<double>(z, d));
            const double sd = std::sqrt(c.var);
            for (int a = 0; a < d; ++a) x[i * d + a] = c.mean[a] + sd * z[a];
        }
    });
    return x;
}

// ------------------------------------------------------------ drift

namespace {

void finish_drift(std::vector<double>& drift, const std::optional<CutoffFn>& cutoff, DriftStats* stats) {
    std::size_t saturated = 0;
    if (cutoff) {
        const double A = cutoff->A();
        for (double& v : drift) {
            if (std::abs(v) > A) ++saturated;
            v = (*cutoff)(v);
        }
    }
    if (stats) {
        stats->evaluations += drift.size();
        stats->saturated += saturated;
    }
}

}  // namespace

std::vector<double> drift_direct(const ParticleState& s, const ForceTable& table, const std::optional<CutoffFn>& cutoff,
                                 DriftStats* stats) {
    const int d = s.d;
    const std::size_t N = s.size();
    std::vector<double> drift(N * d, 0.0);
    if (table.kernel().dim() != d) throw ValidationError("force table and particle dimensions differ");
    if (table.kernel().terms().empty() || N == 0) {
        finish_drift(drift, cutoff, stats);
        return drift;
    }
    const double inv_n = 1.0 / static_cast<double>(N);
    parallel_for(N, [&](std::size_t lo, std::size_t hi) {
        double diff[3], f[3];
        for (std::size_t i = lo; i < hi; ++i) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (std::size_t k = 0; k < N; ++k) {
                for (int a = 0; a < d; ++a) diff[a] = s.x[i * d + a] - s.x[k * d + a];
                table.force(diff, f);
                for (int a = 0; a < d; ++a) acc[a] += f[a];
            }
            for (int a = 0; a < d; ++a) drift[i * d + a] = acc[a] * inv_n;
        }
    });
    finish_drift(drift, cutoff, stats);
    return drift;
}

void interpolate_vector(const GridSpec& g, const std::vector<double>& w, const double* x, double* out) {
    const int d = g.d, G = g.G;
    const double dx = g.dx();
    const std::size_t n = g.size();
    int base[3];
    double frac[3];
    for (int a = 0; a < d; ++a) {
        const double u = (x[a] + g.L) / dx;
        int i = static_cast<int>(std::floor(u));
        i = std::clamp(i, 0, G - 2);
        base[a] = i;
        frac[a] = std::clamp(u - i, 0.0, 1.0);
    }
    for (int c = 0; c < d; ++c) out[c] = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double weight = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            const int bit = (corner >> (d - 1 - a)) & 1;
            weight *= bit ? frac[a] : 1.0 - frac[a];
            flat = flat * G + static_cast<std::size_t>(base[a] + bit);
        }
        if (weight == 0.0) continue;
        for (int c = 0; c < d; ++c) out[c] += weight * w[c * n + flat];
    }
}

GridDrift::GridDrift(const KernelSpec& kernel, const MollifierSpec& mollifier, const GridSpec& grid)
    : kernel_(kernel), mollifier_(mollifier), grid_(grid) {
    grid.validate();
    if (kernel.dim() != grid.d || mollifier.d != grid.d) throw ValidationError("grid drift: dimension mismatch");
    if (!kernel.terms().empty()) conv_ = std::make_unique<FreeSpaceConvolver>(kernel, grid);
    w_.resize(grid.d * grid.size());
}

std::vector<double> GridDrift::operator()(const ParticleState& s, const ForceTable* table,
                                          const std::optional<CutoffFn>& cutoff, DriftStats* stats) {
    const int d = s.d;
    const std::size_t N = s.size();
    if (d != grid_.d) throw ValidationError("grid drift: dimension mismatch");
    std::vector<double> drift(N * d, 0.0);
    if (!conv_ || N == 0) {
        finish_drift(drift, cutoff, stats);
        return drift;
    }
    const double dx = grid_.dx();
    const double margin = mollifier_.support() + 2.0 * dx;
    std::vector<std::size_t> inside, outside;
    for (std::size_t i = 0; i < N; ++i) {
        bool in = true;
        for (int a = 0; a < d; ++a) {
            const double v = s.x[i * d + a];
            if (!(v >= -grid_.L + margin && v <= grid_.L - margin)) in = false;
        }
        (in ? inside : outside).push_back(i);
    }
    if (!outside.empty() && !table) throw DomainError("particles left the grid and no force table is available");

    const double inv_n = 1.0 / static_cast<double>(N);
    WeightedPointSet pts;
    pts.d = d;
    pts.points.reserve(inside.size() * d);
    for (std::size_t i : inside) {
        for (int a = 0; a < d; ++a) pts.points.push_back(s.x[i * d + a]);
        pts.weights.push_back(inv_n);
    }
    DepositStats dst;
    const GridField u = deposit_uN(pts, mollifier_, grid_, &dst);
    conv_->apply(u.values, w_);

    parallel_for(inside.size(), [&](std::size_t lo, std::size_t hi) {
        double diff[3], f[3], w[3];
        for (std::size_t m = lo; m < hi; ++m) {
            const std::size_t i = inside[m];
            interpolate_vector(grid_, w_, &s.x[i * d], w);
            for (std::size_t k : outside) {
                for (int a = 0; a < d; ++a) diff[a] = s.x[i * d + a] - s.x[k * d + a];
                table->force(diff, f);
                for (int a = 0; a < d; ++a) w[a] += f[a] * inv_n;
            }
            for (int a = 0; a < d; ++a) drift[i * d + a] = w[a];
        }
    });
    parallel_for(outside.size(), [&](std::size_t lo, std::size_t hi) {
        double diff[3], f[3];
        for (std::size_t m = lo; m < hi; ++m) {
            const std::size_t i = outside[m];
            double acc[3] = {0.0, 0.0, 0.0};
            for (std::size_t k = 0; k < N; ++k) {
                for (int a = 0; a < d; ++a) diff[a] = s.x[i * d + a] - s.x[k * d + a];
                table->force(diff, f);
                for (int a = 0; a < d; ++a) acc[a] += f[a];
            }
            for (int a = 0; a < d; ++a) drift[i * d + a] = acc[a] * inv_n;
        }
    });
    if (stats) {
        stats->outliers += outside.size();
        stats->wrapped += dst.wrapped;
    }
    finish_drift(drift, cutoff, stats);
    return drift;
}

void em_step(ParticleState& s, double dt, const std::vector<double>& drift, const CounterRng& rng, bool noise) {
    if (!(dt > 0.0)) throw ValidationError("em_step requires dt > 0");
    const int d = s.d;
    const std::size_t N = s.size();
    if (drift.size() != s.x.size()) throw ValidationError("drift size does not match the state");
    const double amp = std::sqrt(2.0 * dt);
    parallel_for(N, [&](std::size_t lo, std::size_t hi) {
        double z[3] = {0.0, 0.0, 0.0};
        for (std::size_t i = lo; i < hi; ++i) {
            if (noise) rng.normals(Stream::Noise, i, s.step, std::span<double>(z, d));
            for (int a = 0; a < d; ++a) s.x[i * d + a] += drift[i * d + a] * dt + amp * z[a];
        }
    });
    ++s.step;
    s.t += dt;
}

// ------------------------------------------------------------ driver

void SimulationConfig::validate() const {
    std::vector<std::string> errs;
    const int d = kernel.dim();
    if (init.d != d) errs.push_back("initial law dimension differs from the kernel dimension");
    if (grid.d != d) errs.push_back("grid dimension differs from the kernel dimension");
    if (N < 1) errs.push_back("N must be >= 1");
    if (!(R > 0.0)) errs.push_back("mollifier radius must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) errs.push_back("alpha must lie in [0, 1]");
    if (!(T > 0.0)) errs.push_back("T must be > 0");
    if (!(dt > 0.0)) errs.push_back("dt must be > 0");
    if (cutoff && !(*cutoff > 0.0)) errs.push_back("cutoff A must be > 0");
    if (T > 0.0 && dt > 0.0) {
        const double steps = T / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) errs.push_back("T must be a multiple of dt");
        for (double t : snapshot_times) {
            if (!(t >= 0.0 && t <= T)) errs.push_back("snapshot time " + std::to_string(t) + " outside [0, T]");
            else if (std::abs(t / dt - std::round(t / dt)) > 1e-6) errs.push_back("snapshot time " + std::to_string(t) + " is not a multiple of dt");
        }
    }
    try {
        grid.validate();
        if (N >= 1 && R > 0.0 && alpha >= 0.0 && alpha <= 1.0 && (deposit || drift_path == DriftPath::Grid)) {
            const double h = R * std::pow(static_cast<double>(N), -alpha);
            if (h < 2.0 * grid.dx()) errs.push_back("bump support R N^-alpha is below two grid cells");
        }
    } catch (const ValidationError& e) {
        errs.push_back(e.what());
    }
    try {
        init.validate();
    } catch (const ValidationError& e) {
        errs.push_back(e.what());
    }
    if (drift_path == DriftPath::Grid && !kernel.has_symbol()) errs.push_back("grid drift needs a kernel with a Fourier symbol");
    if (!errs.empty()) {
        std::ostringstream os;
        os << "invalid simulation config:";
        for (const auto& e : errs) os << "\n  - " << e;
        throw ValidationError(os.str());
    }
}

DriftPath resolve_drift_path(const SimulationConfig& cfg) {
    if (cfg.drift_path != DriftPath::Auto) return cfg.drift_path;
    return cfg.kernel.has_symbol() && cfg.N > 2048 ? DriftPath::Grid : DriftPath::Direct;
}

std::vector<std::pair<double, long>> snapshot_schedule(std::vector<double> times, double T, double dt) {
    times.push_back(0.0);
    times.push_back(T);
    std::vector<std::pair<double, long>> out;
    for (double t : times) out.emplace_back(t, std::lround(t / dt));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second == b.second; }),
              out.end());
    return out;
}

InteractionDrift::InteractionDrift(const KernelSpec& kernel, const MollifierSpec& mollifier, std::optional<double> cutoff,
                                   DriftPath path, const GridSpec& grid, int table_resolution, double table_tol)
    : interacting_(!kernel.terms().empty()), path_(path) {
    if (path == DriftPath::Auto) {
        path_ = kernel.has_symbol() && mollifier.N > 2048 ? DriftPath::Grid : DriftPath::Direct;
    }
    if (cutoff) cutoff_.emplace(*cutoff);
    if (!interacting_) return;
    table_ = ForceTable::build(kernel, mollifier, table_resolution, table_tol);
    if (path_ == DriftPath::Grid) grid_ = std::make_unique<GridDrift>(kernel, mollifier, grid);
}

InteractionDrift::~InteractionDrift() = default;

void InteractionDrift::operator()(const ParticleState& s, std::vector<double>& drift) {
    if (!interacting_) {
        drift.assign(s.x.size(), 0.0);
        return;
    }
    drift = grid_ ? (*grid_)(s, &*table_, cutoff_, &stats_) : drift_direct(s, *table_, cutoff_, &stats_);
}

SimulationResult simulate(const SimulationConfig& cfg) {
    cfg.validate();
    const int d = cfg.kernel.dim();
    const CounterRng rng(cfg.seed);
    const auto moll = MollifierSpec::make(d, cfg.R, cfg.alpha, cfg.N);
    SimulationResult res;
    res.path = resolve_drift_path(cfg);
    InteractionDrift interaction(cfg.kernel, moll, cfg.cutoff, res.path, cfg.grid, cfg.table_resolution, cfg.table_tol);

    ParticleState s;
    s.d = d;
    s.x = sample_initial(cfg.init, static_cast<std::size_t>(cfg.N), rng);
    const auto schedule = snapshot_schedule(cfg.snapshot_times, cfg.T, cfg.dt);
    const long steps = std::lround(cfg.T / cfg.dt);
    std::size_t next = 0;
    auto record = [&](long k) {
        while (next < schedule.size() && schedule[next].second == k) {
            res.snapshots.push_back({schedule[next].first, s.x});
            if (cfg.deposit) {
                GridField u = deposit_uN(WeightedPointSet::empirical(d, s.x), moll, cfg.grid);
                u.t = schedule[next].first;
                res.fields.push_back(std::move(u));
            }
            ++next;
        }
    };
    record(0);
    std::vector<double> drift(s.x.size(), 0.0);
    for (long k = 0; k < steps; ++k) {
        interaction(s, drift);
        em_step(s, cfg.dt, drift, rng, cfg.noise);
        s.t = (k + 1) * cfg.dt;
        record(k + 1);
    }
    res.stats = interaction.stats();
    return res;
}

}  // namespace moderate
