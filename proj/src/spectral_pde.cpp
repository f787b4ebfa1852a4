#include "moderate/spectral_pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "moderate/errors.hpp"
#include "moderate/measures.hpp"

namespace moderate {

namespace {

std::vector<double> squared_frequencies(const GridSpec& g) {
    const double k0 = std::numbers::pi / g.L;
    std::vector<double> k2(static_cast<std::size_t>(std::pow(g.G, g.d - 1)) * (g.G / 2 + 1));
    for_each_mode(g.d, g.G, [&](std::size_t flat, const int* idx) {
        double s = 0.0;
        for (int a = 0; a < g.d; ++a) s += double(idx[a]) * idx[a];
        k2[flat] = k0 * k0 * s;
    });
    return k2;
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

GridField heat_propagate(const GridField& f, double t) {
    if (!(t >= 0.0)) throw ValidationError("heat_propagate requires t >= 0");
    const auto& g = f.grid;
    g.validate();
    GridField out = f;
    out.t = f.t + t;
    if (t == 0.0) return out;
    RealFft fft(g.d, g.G);
    const auto k2 = squared_frequencies(g);
    const std::size_t n = g.size();
    const double norm = 1.0 / static_cast<double>(n);
    for (int c = 0; c < f.components; ++c) {
        auto src = f.component(c);
        std::copy(src.begin(), src.end(), fft.real().begin());
        fft.forward();
        auto spec = fft.spectrum();
        for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= std::exp(-k2[i] * t) * norm;
        fft.inverse();
        auto dst = out.component(c);
        std::copy(fft.real().begin(), fft.real().end(), dst.begin());
    }
    return out;
}

double default_norm_exponent(const KernelSpec& kernel) {
    const double r = kernel.meta().r_admissible_min;
    return std::isinf(r) ? r : 2.0 * r;
}

// ------------------------------------------------------------ solver

SpectralSolver::SpectralSolver(const KernelSpec& kernel, const GridSpec& grid, std::optional<double> cutoff, bool heun)
    : kernel_(kernel), grid_(grid), heun_(heun), fft_((grid.validate(), grid.d), grid.G) {
    if (kernel.dim() != grid.d) throw ValidationError("kernel and grid dimensions differ");
    if (cutoff) cutoff_.emplace(*cutoff);
    if (!kernel.terms().empty()) conv_ = std::make_unique<FreeSpaceConvolver>(kernel, grid);
    const std::size_t n = grid.size();
    w_.resize(grid.d * n);
    flux_.resize(n);
    k2_ = squared_frequencies(grid);
    const std::size_t m = k2_.size();
    uhat_.resize(m);
    nhat_.resize(m);
    nhat2_.resize(m);
    flux_hat_.resize(m);
    tmp_.resize(m);
}

SpectralSolver::~SpectralSolver() = default;

void SpectralSolver::transform(const GridField& u, Spectrum& out) {
    std::copy(u.values.begin(), u.values.begin() + grid_.size(), fft_.real().begin());
    fft_.forward();
    auto s = fft_.spectrum();
    std::copy(s.begin(), s.end(), out.begin());
}

// N^ = sum_a i xi_a F[u F_A(w_a)]
void SpectralSolver::nonlinear(const GridField& u, Spectrum& out) {
    std::fill(out.begin(), out.end(), std::complex<double>{});
    if (!conv_) return;
    const int d = grid_.d, G = grid_.G;
    const std::size_t n = grid_.size();
    conv_->apply(std::span<const double>(u.values.data(), n), w_);
    const double k0 = std::numbers::pi / grid_.L;
    for (int a = 0; a < d; ++a) {
        auto fr = fft_.real();
        for (std::size_t i = 0; i < n; ++i) {
            const double wv = w_[a * n + i];
            fr[i] = u.values[i] * (cutoff_ ? (*cutoff_)(wv) : wv);
        }
        fft_.forward();
        auto s = fft_.spectrum();
        for_each_mode(d, G, [&](std::size_t flat, const int* idx) {
            const int j = idx[a];
            if (j == -G / 2 || j == G / 2) return;
            out[flat] += std::complex<double>(0.0, k0 * j) * s[flat];
        });
    }
}

GridField SpectralSolver::synthesize(const Spectrum& s, double t) {
    auto dst = fft_.spectrum();
    const double norm = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t i = 0; i < s.size(); ++i) dst[i] = s[i] * norm;
    fft_.inverse();
    GridField out(grid_);
    out.t = t;
    std::copy(fft_.real().begin(), fft_.real().end(), out.values.begin());
    return out;
}

GridField SpectralSolver::flux_divergence(const GridField& u) {
    if (!(u.grid == grid_) || u.components != 1) throw ValidationError("flux_divergence: grid mismatch");
    nonlinear(u, nhat_);
    return synthesize(nhat_, u.t);
}

GridField SpectralSolver::step(const GridField& u, double dt) {
    if (!(dt > 0.0)) throw ValidationError("pde step requires dt > 0");
    if (!(u.grid == grid_) || u.components != 1) throw ValidationError("pde step: grid mismatch");
    transform(u, uhat_);
    nonlinear(u, nhat_);
    for (std::size_t i = 0; i < uhat_.size(); ++i) {
        // mode 0 of the divergence is exactly zero, so the mass is untouched
        tmp_[i] = std::exp(-k2_[i] * dt) * (uhat_[i] - dt * nhat_[i]);
    }
    GridField next = synthesize(tmp_, u.t + dt);
    if (heun_ && all_finite(next.values)) {
        nonlinear(next, nhat2_);
        for (std::size_t i = 0; i < uhat_.size(); ++i) {
            const double e = std::exp(-k2_[i] * dt);
            tmp_[i] = e * uhat_[i] - 0.5 * dt * (e * nhat_[i] + nhat2_[i]);
        }
        next = synthesize(tmp_, u.t + dt);
    }
    if (!all_finite(next.values)) {
        throw BlowUpDetected("non-finite values at t = " + std::to_string(next.t));
    }
    return next;
}

GridField pde_step(const GridField& u, double dt, const KernelSpec& kernel, std::optional<double> cutoff, bool heun) {
    SpectralSolver s(kernel, u.grid, cutoff, heun);
    return s.step(u, dt);
}

// ------------------------------------------------------------ driver

PdeRun solve_pde(const GridField& u0, const KernelSpec& kernel, const PdeOptions& opt) {
    const auto& g = u0.grid;
    g.validate();
    if (u0.components != 1) throw ValidationError("initial datum must be a scalar field");
    if (!(opt.T > 0.0) || !(opt.dt > 0.0)) throw ValidationError("solve_pde requires T > 0 and dt > 0");
    if (!(opt.guard > 0.0)) throw ValidationError("blow-up guard must be > 0");
    if (opt.trace_every < 1) throw ValidationError("trace_every must be >= 1");
    for (double v : u0.values) {
        if (!(v >= 0.0)) throw ValidationError("initial datum must be nonnegative and finite");
    }
    const double m0 = integral(u0);
    if (std::abs(m0 - 1.0) > 1e-6) throw ValidationError("initial datum must have mass 1 (got " + std::to_string(m0) + ")");

    PdeRun run;
    run.r = opt.r > 0.0 ? opt.r : default_norm_exponent(kernel);
    if (!(run.r >= 1.0)) throw ValidationError("norm exponent r must be >= 1");
    std::vector<double> times = opt.snapshot_times;
    for (double t : times) {
        if (!(t >= 0.0 && t <= opt.T)) throw ValidationError("snapshot time outside [0, T]");
    }
    times.push_back(0.0);
    times.push_back(opt.T);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    const double width = 4.0 * g.dx();
    auto sample = [&](const GridField& u) {
        NormSample s;
        s.t = u.t;
        s.l1 = lp_norm(u, 1.0);
        s.lr = lp_norm(u, run.r);
        s.mass = integral(u);
        s.min = *std::min_element(u.values.begin(), u.values.end());
        run.norm_trace.push_back(s);
        run.mass_trace.push_back(s.mass);
        run.max_boundary_mass = std::max(run.max_boundary_mass, boundary_mass(u, width));
        return s;
    };

    SpectralSolver solver(kernel, g, opt.cutoff, opt.heun);
    GridField u = u0;
    u.t = 0.0;
    sample(u);
    std::size_t next_snap = 0;
    const double eps = 1e-9 * opt.dt;
    auto take_snapshots = [&] {
        while (next_snap < times.size() && times[next_snap] <= u.t + eps) {
            GridField s = u;
            s.t = times[next_snap];
            run.snapshots.push_back(std::move(s));
            ++next_snap;
        }
    };
    take_snapshots();
    const long steps = static_cast<long>(std::ceil(opt.T / opt.dt - 1e-9));
    for (long k = 0; k < steps; ++k) {
        // the last step lands exactly on T; a snapshot time inside a step is taken at its end
        const double dt = std::min(opt.dt, opt.T - u.t);
        if (!(dt > eps)) break;
        try {
            u = solver.step(u, dt);
        } catch (const BlowUpDetected& e) {
            run.status = PdeStatus::BlowUpDetected;
            run.t_blow = u.t + dt;
            run.blow_reason = e.what();
            return run;
        }
        if (k + 1 == steps) u.t = opt.T;
        const bool last = k + 1 == steps;
        if (last || (k + 1) % opt.trace_every == 0) {
            const auto s = sample(u);
            if (!(s.lr <= opt.guard)) {
                run.status = PdeStatus::BlowUpDetected;
                run.t_blow = u.t;
                run.blow_reason = "||u||_{L^r} = " + std::to_string(s.lr) + " exceeds the guard";
                return run;
            }
        }
        take_snapshots();
    }
    return run;
}

double compute_cutoff_A(const PdeRun& run, double C) {
    if (run.status != PdeStatus::Completed) throw NotCompleted("cutoff level needs a completed PDE run");
    if (!(C > 0.0)) throw ValidationError("constant C must be > 0");
    double m = 0.0;
    for (const auto& s : run.norm_trace) m = std::max(m, s.l1 + s.lr);
    return C * m;
}

}  // namespace moderate
