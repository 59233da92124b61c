#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "masklab/tensor.hpp"

namespace masklab {

// Labels are one-hot rows; sample_ids are stable across shuffles and splits,
// which is what keys fixed per-sample masks.
struct Dataset {
    Tensor features;                        // n x d
    Tensor labels;                          // n x k
    std::vector<std::uint64_t> sample_ids;

    std::size_t size() const { return sample_ids.size(); }
    std::size_t feature_dim() const { return features.dim(1); }
    std::size_t n_classes() const { return labels.dim(1); }
};

struct SplitDataset {
    Dataset train;
    Dataset val;
};

// k isotropic Gaussian clusters (centers drawn at scale 3, unit noise),
// classes assigned round-robin so counts are balanced.
Dataset make_gaussian_blobs(std::size_t n, std::size_t dim, std::size_t k,
                            std::uint64_t seed);

// Two interleaved planar spirals with Gaussian jitter of the given scale.
Dataset make_two_spirals(std::size_t n, double noise, std::uint64_t seed);

// Random-teacher labels on Gaussian features, then each label is replaced by
// a uniform class draw with probability label_noise. The noisy fraction can
// only be memorized, which is what the generalization-gap probes need.
Dataset make_noisy_memorization(std::size_t n, std::size_t dim, std::size_t k,
                                double label_noise, std::uint64_t seed);

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows);

// Deterministic shuffled split; val gets round(n * val_fraction) rows.
SplitDataset split_dataset(const Dataset& data, double val_fraction, std::uint64_t seed);

// Two aligned files: features with header sample_id,f0..f{d-1} and labels
// with header sample_id,label (class index). Readers require matching ids.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& features_csv,
                       const std::filesystem::path& labels_csv);
Dataset read_dataset_csv(const std::filesystem::path& features_csv,
                         const std::filesystem::path& labels_csv);

} // namespace masklab
