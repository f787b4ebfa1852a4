#pragma once

// Result files: CSV tables, the binary grid container and small helpers.
// Reals in CSV files are written with 17 significant digits.

#include <string>
#include <vector>

#include "moderate/config.hpp"
#include "moderate/experiments.hpp"
#include "moderate/grid.hpp"
#include "moderate/kernels.hpp"
#include "moderate/spectral_pde.hpp"

namespace moderate {

/// Version string of the build (git describe when available).
std::string version_string();

std::string norm_trace_csv(const PdeRun& run);        // t,l1,lr,mass,min
std::string rate_csv(const RateReport& report);       // n,reps,mean_err,std_err
std::string chaos_csv(const std::vector<ChaosRow>& rows);  // n,rep,gap
std::string positions_csv(int d, const std::vector<double>& x);  // i,x1,...,xd

/// Reads an i,x1,...,xd file back; returns d and the positions.
std::pair<int, std::vector<double>> read_positions_csv(const std::string& path);

/// "MIPGRID1", a little-endian u64 header length, a JSON header
/// {d, G, L, t, components, kernel}, then the values as little-endian f64.
std::string encode_grid(const GridField& f, const std::string& kernel_description);
GridField decode_grid(const std::string& bytes);
GridField read_grid(const std::string& path);

/// JSON summaries; each embeds the version and the config text echo.
std::string pde_summary_json(const ExperimentConfig& cfg, const PdeRun& run);
std::string simulate_summary_json(const ExperimentConfig& cfg, const SimulationConfig& sim, const SimulationResult& res);
std::string rate_summary_json(const ExperimentConfig& cfg, const SimulationConfig& sim, const RateReport& report);
std::string chaos_summary_json(const ExperimentConfig& cfg, const SimulationConfig& sim, const std::vector<ChaosRow>& rows);

std::string read_file(const std::string& path);
/// Creates parent directories as needed.
void write_file(const std::string& path, const std::string& contents);

}  // namespace moderate
