#pragma once

// Euler-Maruyama simulation of the moderately interacting particle system
//   dX^i = F_A( (1/N) sum_k (K*V^N)(X^i - X^k) ) dt + sqrt(2) dW^i
// with a direct O(N^2) drift and a grid drift that deposits u^N = V^N*mu^N
// and evaluates K*u^N by free-space convolution.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "moderate/convolution.hpp"
#include "moderate/cutoff.hpp"
#include "moderate/grid.hpp"
#include "moderate/kernels.hpp"
#include "moderate/mollifier.hpp"
#include "moderate/rng.hpp"

namespace moderate {

struct ParticleState {
    int d = 1;
    std::vector<double> x;  // N x d, row-major
    double t = 0.0;
    std::uint64_t step = 0;  // RNG epoch

    std::size_t size() const { return x.size() / d; }
};

struct GaussianComponent {
    double weight = 1.0;
    std::vector<double> mean;  // length d
    double var = 1.0;          // isotropic variance
    bool operator==(const GaussianComponent&) const = default;
};

/// Finite isotropic Gaussian mixture.
struct InitialLaw {
    int d = 1;
    std::vector<GaussianComponent> components;

    static InitialLaw gaussian(int d, double var);
    /// Throws BadMixture unless weights are > 0 and sum to 1 (1e-12), variances
    /// are > 0 and means have length d.
    void validate() const;
    /// Density at grid nodes.
    GridField density(const GridSpec& grid) const;
};

/// N i.i.d. samples; particle i uses its own counter stream.
std::vector<double> sample_initial(const InitialLaw& law, std::size_t N, const CounterRng& rng);

struct DriftStats {
    std::size_t evaluations = 0;  // drift components computed
    std::size_t saturated = 0;    // components with |pre-cutoff value| > A
    std::size_t outliers = 0;     // grid path: particles handled directly
    std::size_t wrapped = 0;

    double saturated_fraction() const { return evaluations ? double(saturated) / double(evaluations) : 0.0; }
};

/// F_A((1/N) sum_k force(X_i - X_k)), self term included. Parallel over i.
std::vector<double> drift_direct(const ParticleState& s, const ForceTable& table, const std::optional<CutoffFn>& cutoff,
                                 DriftStats* stats = nullptr);

/// Drift through the grid: particles whose bump stays 2 cells inside [-L, L)^d
/// are deposited and read K*u^N back by multilinear interpolation; particles
/// outside are paired with everyone directly through the force table.
class GridDrift {
public:
    GridDrift(const KernelSpec& kernel, const MollifierSpec& mollifier, const GridSpec& grid);

    const GridSpec& grid() const { return grid_; }
    std::vector<double> operator()(const ParticleState& s, const ForceTable* table, const std::optional<CutoffFn>& cutoff,
                                   DriftStats* stats = nullptr);

private:
    KernelSpec kernel_;
    MollifierSpec mollifier_;
    GridSpec grid_;
    std::unique_ptr<FreeSpaceConvolver> conv_;
    std::vector<double> w_;
};

/// Multilinear interpolation of the d-component field w (d G^d values) at x.
void interpolate_vector(const GridSpec& grid, const std::vector<double>& w, const double* x, double* out);

/// X_i += drift_i dt + sqrt(2 dt) xi_i, xi_i from the noise stream at (i, s.step).
void em_step(ParticleState& s, double dt, const std::vector<double>& drift, const CounterRng& rng, bool noise = true);

enum class DriftPath { Direct, Grid, Auto };

struct SimulationConfig {
    KernelSpec kernel = KernelSpec::zero(1);
    InitialLaw init = InitialLaw::gaussian(1, 1.0);
    long N = 256;
    double R = 1.0;
    double alpha = 0.25;
    double T = 1.0;
    double dt = 0.01;
    std::uint64_t seed = 1;
    std::optional<double> cutoff;
    DriftPath drift_path = DriftPath::Auto;
    GridSpec grid{1, 256, 8.0};  // grid drift and u^N snapshots
    bool deposit = true;         // record u^N at snapshot times
    std::vector<double> snapshot_times;  // 0 and T always included
    int table_resolution = ForceTable::kDefaultResolution;
    double table_tol = ForceTable::kDefaultTol;
    bool noise = true;

    /// Throws ValidationError listing every violated constraint.
    void validate() const;
};

/// Grid path when the kernel has a symbol and N > 2048, otherwise direct.
DriftPath resolve_drift_path(const SimulationConfig& cfg);

/// The interacting part of the dynamics for one (kernel, mollifier, cutoff):
/// owns the force table and, on the grid path, the grid drift.
class InteractionDrift {
public:
    InteractionDrift(const KernelSpec& kernel, const MollifierSpec& mollifier, std::optional<double> cutoff, DriftPath path,
                     const GridSpec& grid, int table_resolution = ForceTable::kDefaultResolution,
                     double table_tol = ForceTable::kDefaultTol);
    ~InteractionDrift();

    DriftPath path() const { return path_; }
    const DriftStats& stats() const { return stats_; }
    const std::optional<CutoffFn>& cutoff() const { return cutoff_; }
    /// Overwrites drift (size N d).
    void operator()(const ParticleState& s, std::vector<double>& drift);

private:
    bool interacting_;
    DriftPath path_;
    std::optional<CutoffFn> cutoff_;
    std::optional<ForceTable> table_;
    std::unique_ptr<GridDrift> grid_;
    DriftStats stats_;
};

struct ParticleSnapshot {
    double t = 0.0;
    std::vector<double> positions;
};

struct SimulationResult {
    std::vector<ParticleSnapshot> snapshots;
    std::vector<GridField> fields;  // u^N at the snapshot times (when deposit is set)
    DriftStats stats;
    DriftPath path = DriftPath::Direct;
};

/// Snapshot times (with 0 and T) and their step indices on the dt lattice.
std::vector<std::pair<double, long>> snapshot_schedule(std::vector<double> times, double T, double dt);

/// Deterministic function of (cfg, cfg.seed) for any thread count.
SimulationResult simulate(const SimulationConfig& cfg);

}  // namespace moderate
