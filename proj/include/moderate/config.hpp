#pragma once

// Experiment configuration: a flat, line-oriented `section.key = value`
// format. Blank lines and text after '#' are ignored; `inf` is accepted
// wherever a real number is.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moderate/experiments.hpp"
#include "moderate/kernels.hpp"
#include "moderate/particles.hpp"
#include "moderate/spectral_pde.hpp"

namespace moderate {

enum class CutoffMode { None, Auto, Value };

struct ExperimentConfig {
    std::string experiment = "simulate";  // pde | simulate | rate | chaos

    struct Kernel {
        std::string family = "zero";  // zero | riesz | coulomb | biot-savart | keller-segel | attractive-repulsive
        int d = 1;
        double s = 0.0;
        bool attractive = false;
        double chi = 0.0;
        bool newtonian = true;  // chi in units of the Newtonian potential (8 pi critical in d = 2)
        double a = 0.0, b = 0.0, va = 0.0, vb = 0.0;
        bool operator==(const Kernel&) const = default;
    } kernel;

    std::vector<GaussianComponent> init{{1.0, {0.0}, 1.0}};

    struct Grid {
        int G = 256;
        double L = 8.0;
        bool operator==(const Grid&) const = default;
    } grid;

    struct Mollifier {
        double radius = 1.0;
        double alpha = 0.25;
        int table_resolution = ForceTable::kDefaultResolution;
        double table_tol = ForceTable::kDefaultTol;
        bool operator==(const Mollifier&) const = default;
    } mollifier;

    struct Particles {
        long n = 256;
        std::vector<long> n_list;
        double dt = 0.01;
        double t_end = 1.0;
        std::uint64_t seed = 1;
        CutoffMode cutoff = CutoffMode::None;
        double cutoff_a = 0.0;
        double cutoff_c = 0.0;  // A = c max ||u_t||_{L^1 cap L^r}; 0 = the kernel's convolution constant
        DriftPath drift_path = DriftPath::Auto;
        std::vector<double> snapshot_times;
        int reps = 10;
        bool noise = true;
        bool operator==(const Particles&) const = default;
    } particles;

    struct Pde {
        double dt = 1e-3;
        double r = 0.0;  // 0 = default for the kernel
        bool heun = false;
        double guard = 1e6;
        std::vector<double> snapshot_times;
        int trace_every = 1;
        bool operator==(const Pde&) const = default;
    } pde;

    struct Rate {
        ErrorMetric metric = ErrorMetric::L1CapLr;
        double moment = 1.0;
        int burn_in = 0;
        int kr_coarsen = 0;
        bool operator==(const Rate&) const = default;
    } rate;

    std::string out_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;

    KernelSpec kernel_spec() const;
    InitialLaw initial_law() const;
    GridSpec grid_spec() const;
    /// Reference PDE options for this experiment (T = particles.t_end); chaos
    /// runs record a snapshot every particle step.
    PdeOptions pde_options() const;
    /// Particle configuration; an automatic cutoff needs the reference run.
    SimulationConfig simulation(const PdeRun* reference = nullptr) const;
    SweepOptions sweep_options() const;
    std::vector<long> n_values() const;

    /// Throws ConfigError listing every violated constraint.
    void validate() const;
};

/// Throws ConfigError listing every malformed or unknown line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& c);

/// Decimal text with 17 significant digits; "inf" / "-inf" for infinities.
std::string format_real(double x);
/// Accepts decimals, "inf" and fractions p/q.
double parse_real(const std::string& s);

}  // namespace moderate
