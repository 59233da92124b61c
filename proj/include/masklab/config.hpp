#pragma once

#include <optional>
#include <string>

#include "masklab/dataset.hpp"
#include "masklab/train.hpp"

namespace masklab {

struct SyntheticDatasetSpec {
    std::string kind;               // gaussian_blobs | two_spirals | noisy_label_memorization
    std::size_t n_samples = 256;
    std::size_t n_features = 8;
    std::size_t n_classes = 2;
    double label_noise = 0.0;
    double noise = 0.15;            // two_spirals jitter
    std::uint64_t seed = 0;
};

struct DatasetConfig {
    std::optional<SyntheticDatasetSpec> synthetic;
    std::filesystem::path features_csv;     // used when synthetic is absent
    std::filesystem::path labels_csv;

    std::string id() const;                 // stable string for run keys
};

// Parsed experiment file: dataset source, shared model shape, training
// settings, and the variant list the grid crosses with train.drop_rates.
// Unknown or inapplicable keys are rejected with the offending name.
struct ExperimentConfig {
    DatasetConfig dataset;
    std::vector<std::size_t> hidden_widths;
    std::size_t dense_units = 64;
    std::optional<std::size_t> reg_position;    // default: end of the stack
    OutputKind output = OutputKind::Softmax;
    TrainConfig train;
    double val_fraction = 0.2;
    std::vector<RegularizerKind> variants;
    std::filesystem::path out_dir = "runs";

    // Model for one variant at one drop rate, dims taken from the data.
    ModelConfig model_for(const RegularizerKind& variant, double drop_rate,
                          const Dataset& data) const;
};

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

Dataset load_dataset(const DatasetConfig& cfg);

} // namespace masklab
