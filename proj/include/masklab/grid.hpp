#pragma once

#include "masklab/config.hpp"

namespace masklab {

// Stable 64-bit key over everything that shapes a run's records: dataset id,
// model shape, variant, drop rate and training settings. Log files are named
// <key>.jsonl, which is what makes the grid resumable.
std::string run_key(const ExperimentConfig& cfg, const RegularizerKind& variant,
                    double drop_rate);

struct RunStatusEntry {
    std::string key;
    std::string variant;
    double drop_rate = 0.0;
    std::string status;         // done | incompatible
    std::string error;          // incompatible runs only
    std::size_t n_records = 0;
};

struct GridSummary {
    std::size_t executed = 0;
    std::size_t resumed = 0;    // complete logs found and skipped
    std::size_t incompatible = 0;
    std::vector<RunStatusEntry> runs;
};

// Full variants x drop_rates sweep on a worker pool. Each run owns its RNG
// streams, so results do not depend on scheduling; per-run config errors
// (MaskEnsemble divisibility) are recorded and the grid continues.
GridSummary run_grid(const ExperimentConfig& cfg, std::size_t jobs = 1);

// All records from <runs_dir>/*.jsonl in filename order.
std::vector<TrainRecord> read_run_logs(const std::filesystem::path& runs_dir);

struct BenchRow {
    std::string variant;
    double mean_seconds = 0.0;
    double std_seconds = 0.0;
    std::size_t epochs = 0;
    std::string error;          // set when the variant could not run
};

// Times at least 5 epochs per variant on identical data and model shape, at
// the first configured drop rate.
std::vector<BenchRow> run_bench(const ExperimentConfig& cfg);

} // namespace masklab
