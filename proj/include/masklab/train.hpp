#pragma once

#include <string>

#include "masklab/dataset.hpp"
#include "masklab/model.hpp"
#include "masklab/optimizer.hpp"

namespace masklab {

struct TrainConfig {
    std::vector<double> drop_rates = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::size_t batch_size = 128;
    std::size_t epochs = 20;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 0;    // 0 disables early stopping

    void validate() const;                  // throws ConfigError
};

// One epoch-end snapshot. Clean metrics are measured after the epoch's
// updates, in eval mode, over the full training set. Non-finite metrics
// (diverged runs) serialize as JSON null and parse back as NaN.
struct TrainRecord {
    std::string variant;
    double drop_rate = 0.0;
    std::size_t epoch = 0;                  // 1-based
    double val_loss = 0.0;
    double val_acc = 0.0;
    double train_loss_clean = 0.0;
    double train_acc_clean = 0.0;
    double epoch_wall_seconds = 0.0;
    bool diverged = false;
};

std::string to_jsonl(const TrainRecord& record);
TrainRecord train_record_from_jsonl(const std::string& line);

struct EvalMetrics {
    double loss = 0.0;
    double acc = 0.0;
};

// Chunked full-set evaluation (eval mode, no mask stream). The fixed chunk
// size keeps the accumulation order, and therefore the result, reproducible.
EvalMetrics evaluate(const Model& model, const Dataset& data, std::size_t chunk = 256);

struct TrainOutcome {
    std::vector<TrainRecord> records;
    Model model;
};

// Full training run: Adam on minibatches, one record per epoch. A non-finite
// loss or parameter aborts the run after writing a diverged record. All
// randomness (init, shuffling, masks) derives from cfg.seed, so identical
// inputs give identical records.
TrainOutcome train_model(const ModelConfig& mcfg, const TrainConfig& cfg,
                         const SplitDataset& data);

} // namespace masklab
