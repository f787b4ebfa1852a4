#pragma once

// Runs a configured experiment and renders its result files in memory, so
// the CLI and the acceptance harness produce byte-identical outputs.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moderate/config.hpp"

namespace moderate {

struct ExperimentOutput {
    std::vector<std::pair<std::string, std::string>> files;  // name relative to out_dir, contents
    std::string message;                                     // short human-readable summary

    std::optional<PdeRun> reference;
    std::optional<SimulationResult> simulation;
    std::optional<RateReport> rate;
    std::vector<ChaosRow> chaos;
};

/// Validates cfg and runs cfg.experiment (pde, simulate, rate or chaos).
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Writes every file under cfg.out_dir.
void write_outputs(const ExperimentConfig& cfg, const ExperimentOutput& out);

}  // namespace moderate
