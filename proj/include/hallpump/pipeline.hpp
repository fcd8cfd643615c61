#pragma once

#include "hallpump/config.hpp"
#include "hallpump/io.hpp"

namespace hallpump::pipeline {

using config::ExperimentConfig;

struct StageOutcome {
    std::string stage;
    bool ok = true;
    std::string diagnostic;
};

struct PipelineResult {
    std::vector<io::SummaryCheck> checks;
    std::vector<StageOutcome> stages;
    int exit_code = 0;
    // headline numbers for callers/tests
    double dq_parallel = 0.0;
    double fit_slope = 0.0;
    int oracle_chern = 0;
    double min_gap = 0.0;
};

/// Execute the configured stages, writing CSVs, plots and the summary file to
/// cfg.out_dir. Exit code 0 iff every enabled check passes.
PipelineResult run_experiment(const ExperimentConfig& cfg);

/// The Chern integer of the configured filling (oracle subcommand).
int oracle_chern_number(const ExperimentConfig& cfg);

} // namespace hallpump::pipeline
