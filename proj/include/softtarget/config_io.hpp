#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "softtarget/experiment.hpp"

namespace softtarget {

/// Reads an experiment config from a JSON file. The schema is documented in the
/// README; every CLI flag mirrors a config key and flags win over file values.
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

/// Reads a report.json written by write_report_files.
TrainReport load_report(const std::string& path);

/// Named built-in configs: "mnist-desk" (10k-sample subset, 30 epochs) and
/// "mnist-full" (full training set, 100 epochs). Throws ValueError for unknown
/// names.
ExperimentConfig preset_config(const std::string& name);

/// The grid section of a grid config: every architecture x regime x seed cell
/// becomes one experiment derived from the base config.
struct GridSpec {
    std::vector<std::pair<std::size_t, std::size_t>> architectures;  // (hidden_layers, units)
    std::vector<std::string> regimes;  // "vanilla", "dropout:P", "softtarget", "softtarget+dropout:P"
    std::vector<std::uint64_t> seeds;
};

std::pair<ExperimentConfig, GridSpec> load_grid_config(const std::string& path);

/// Applies a regime string to a base config (sets/clears softtarget and dropout).
ExperimentConfig apply_regime(const ExperimentConfig& base, const std::string& regime);

/// epochs.csv: deterministic per-epoch series (no wall-clock column).
void write_epochs_csv(const TrainReport& report, const std::string& path);

/// report.json + epochs.csv under dir (created if needed).
void write_report_files(const TrainReport& report, const ExperimentConfig& config,
                        const std::string& dir);

}  // namespace softtarget
