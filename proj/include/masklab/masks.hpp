#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "masklab/tensor.hpp"

namespace masklab {

enum class Stir { Bernoulli, Gaussian, PartialGaussian };
enum class Granularity { Node, Connection };
enum class MaskMode { Dynamic, Fixed };
// Fixed masks can be keyed per input (default) or once per model instance.
enum class FixedScope { PerSample, PerModel };
enum class RunMode { Train, Eval };

// Full description of one stochastic perturbation. A single drop_rate axis
// drives every stir type; for the Gaussian stirs the noise scale is the
// standard correspondence sigma^2 = p / (1 - p).
struct MaskSpec {
    Stir stir = Stir::Bernoulli;
    double drop_rate = 0.0;                 // p in [0, 1)
    Granularity granularity = Granularity::Node;
    MaskMode mode = MaskMode::Dynamic;
    FixedScope fixed_scope = FixedScope::PerSample;
    std::uint64_t seed = 0;
    double partial_threshold = 0.5;         // PartialGaussian only, in [0, 1]

    double sigma() const;                   // sqrt(p / (1 - p))
    void validate() const;                  // throws DomainError
};

// Raw masks: no inverse scaling anywhere; evaluation compensates by scaling
// activations with expected_mask_value() instead.
Tensor sample_bernoulli_mask(const MaskSpec& spec, const Shape& shape, RngStream& stream);
Tensor sample_gaussian_mask(const MaskSpec& spec, const Shape& shape, RngStream& stream);
Tensor sample_partial_gaussian_mask(const MaskSpec& spec, const Shape& shape,
                                    RngStream& stream);
Tensor sample_mask(const MaskSpec& spec, const Shape& shape, RngStream& stream);

// E[m]: 1-p for Bernoulli, 1 for the mean-preserving Gaussian stirs.
double expected_mask_value(const MaskSpec& spec);

// Var(m): p(1-p) Bernoulli, sigma^2 Gaussian, threshold * sigma^2 for the
// partial-Gaussian mixture.
double mask_variance(const MaskSpec& spec);

} // namespace masklab
