#pragma once

#include "snq/config.hpp"

namespace snq {

// Executes cfg.mode and writes its artifacts under cfg.output_dir.
// Returns 0 on success, 1 when verify-mode checks fail. Schema and numeric
// errors propagate as exceptions for the CLI to map to exit codes 2 and 3.
int run_experiment(const ExperimentConfig& cfg);

void write_simulate_artifacts(const ExperimentConfig& cfg);
void write_analyze_artifacts(const ExperimentConfig& cfg);
void write_fclt_artifacts(const ExperimentConfig& cfg);

}  // namespace snq
