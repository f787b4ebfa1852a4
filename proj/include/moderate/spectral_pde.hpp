#pragma once

// Pseudo-spectral solver for du/dt = Lap u - div(u F_A(K*u)) on the torus
// [-L, L)^d, in mild (integrating-factor) form. K*u is a free-space
// convolution, so the only periodic effect is on mass reaching the boundary.

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "moderate/convolution.hpp"
#include "moderate/cutoff.hpp"
#include "moderate/grid.hpp"
#include "moderate/kernels.hpp"

namespace moderate {

/// e^{t Lap} f with the torus frequencies; mode 0 is left unchanged.
GridField heat_propagate(const GridField& f, double t);

struct NormSample {
    double t = 0.0;
    double l1 = 0.0;
    double lr = 0.0;
    double mass = 0.0;
    double min = 0.0;
};

enum class PdeStatus { Completed, BlowUpDetected };

struct PdeOptions {
    double T = 1.0;
    double dt = 1e-3;
    std::optional<double> cutoff;  // A; none = no cutoff
    bool heun = false;
    double r = 0.0;               // norm exponent; 0 = default_norm_exponent(kernel)
    double guard = 1e6;           // blow-up threshold on ||u||_{L^r}
    std::vector<double> snapshot_times;  // 0 and T are always recorded
    int trace_every = 1;          // steps between norm-trace samples (the last step is always sampled)
};

struct PdeRun {
    std::vector<GridField> snapshots;
    std::vector<double> mass_trace;
    std::vector<NormSample> norm_trace;
    PdeStatus status = PdeStatus::Completed;
    double t_blow = 0.0;
    std::string blow_reason;
    double r = 0.0;
    double max_boundary_mass = 0.0;  // over the trace, within 4 dx of the boundary
};

/// Smallest convenient exponent strictly above the kernel's admissible infimum: 2 r_min.
double default_norm_exponent(const KernelSpec& kernel);

/// One time step on a fixed grid, reusing transforms and the convolution kernel.
class SpectralSolver {
public:
    SpectralSolver(const KernelSpec& kernel, const GridSpec& grid, std::optional<double> cutoff = {}, bool heun = false);
    ~SpectralSolver();
    SpectralSolver(const SpectralSolver&) = delete;
    SpectralSolver& operator=(const SpectralSolver&) = delete;

    const GridSpec& grid() const { return grid_; }

    /// div(u F_A(K*u)) evaluated spectrally (derivatives vanish at the Nyquist index).
    GridField flux_divergence(const GridField& u);

    /// Exponential Euler step (ETD2 trapezoid corrector when heun is set).
    /// Throws BlowUpDetected on non-finite values.
    GridField step(const GridField& u, double dt);

private:
    using Spectrum = std::vector<std::complex<double>>;
    void transform(const GridField& u, Spectrum& out);
    void nonlinear(const GridField& u, Spectrum& out);
    GridField synthesize(const Spectrum& s, double t);

    KernelSpec kernel_;
    GridSpec grid_;
    std::optional<CutoffFn> cutoff_;
    bool heun_;
    std::unique_ptr<FreeSpaceConvolver> conv_;
    RealFft fft_;
    std::vector<double> w_, flux_;
    Spectrum uhat_, nhat_, nhat2_, flux_hat_, tmp_;
    std::vector<double> k2_;
};

GridField pde_step(const GridField& u, double dt, const KernelSpec& kernel, std::optional<double> cutoff = {},
                   bool heun = false);

/// Steps u0 to T. Stops with status BlowUpDetected on non-finite values or
/// ||u||_{L^r} > guard. Throws ValidationError unless u0 is nonnegative with
/// mass 1 +- 1e-6.
PdeRun solve_pde(const GridField& u0, const KernelSpec& kernel, const PdeOptions& opt);

/// C * max over the trace of ||u_t||_{L^1} + ||u_t||_{L^r}. Throws NotCompleted.
double compute_cutoff_A(const PdeRun& run, double C);

}  // namespace moderate
