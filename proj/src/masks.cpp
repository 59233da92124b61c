#include "masklab/masks.hpp"

#include <cmath>
#include <string>

#include "masklab/error.hpp"

namespace masklab {

double MaskSpec::sigma() const {
    return std::sqrt(drop_rate / (1.0 - drop_rate));
}

void MaskSpec::validate() const {
    if (!(drop_rate >= 0.0 && drop_rate < 1.0))
        throw DomainError("drop_rate must be in [0,1), got " + std::to_string(drop_rate));
    if (!(partial_threshold >= 0.0 && partial_threshold <= 1.0))
        throw DomainError("partial_threshold must be in [0,1], got " +
                          std::to_string(partial_threshold));
}

Tensor sample_bernoulli_mask(const MaskSpec& spec, const Shape& shape, RngStream& stream) {
    if (spec.stir != Stir::Bernoulli)
        throw ContractError("sample_bernoulli_mask: spec.stir is not Bernoulli");
    spec.validate();
    const double keep = 1.0 - spec.drop_rate;
    if (spec.drop_rate == 0.0) return Tensor(shape, 1.0);
    Tensor m(shape);
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = stream.next_uniform() < keep ? 1.0 : 0.0;
    return m;
}

Tensor sample_gaussian_mask(const MaskSpec& spec, const Shape& shape, RngStream& stream) {
    if (spec.stir != Stir::Gaussian)
        throw ContractError("sample_gaussian_mask: spec.stir is not Gaussian");
    spec.validate();
    const double sigma = spec.sigma();
    if (sigma == 0.0) return Tensor(shape, 1.0);
    return draw_normal(stream, 1.0, sigma, shape);
}

Tensor sample_partial_gaussian_mask(const MaskSpec& spec, const Shape& shape,
                                    RngStream& stream) {
    if (spec.stir != Stir::PartialGaussian)
        throw ContractError("sample_partial_gaussian_mask: spec.stir is not PartialGaussian");
    spec.validate();
    const double sigma = spec.sigma();
    if (sigma == 0.0 || spec.partial_threshold == 0.0) return Tensor(shape, 1.0);
    Tensor m(shape, 1.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double r = stream.next_uniform();
        if (r <= spec.partial_threshold) m[i] = stream.next_normal(1.0, sigma);
    }
    return m;
}

Tensor sample_mask(const MaskSpec& spec, const Shape& shape, RngStream& stream) {
    switch (spec.stir) {
    case Stir::Bernoulli: return sample_bernoulli_mask(spec, shape, stream);
    case Stir::Gaussian: return sample_gaussian_mask(spec, shape, stream);
    case Stir::PartialGaussian: return sample_partial_gaussian_mask(spec, shape, stream);
    }
    throw ContractError("sample_mask: unknown stir type");
}

double expected_mask_value(const MaskSpec& spec) {
    spec.validate();
    switch (spec.stir) {
    case Stir::Bernoulli: return 1.0 - spec.drop_rate;
    case Stir::Gaussian:
    case Stir::PartialGaussian: return 1.0; // both branches have mean 1
    }
    throw ContractError("expected_mask_value: unknown stir type");
}

double mask_variance(const MaskSpec& spec) {
    spec.validate();
    const double p = spec.drop_rate;
    switch (spec.stir) {
    case Stir::Bernoulli: return p * (1.0 - p);
    case Stir::Gaussian: return p / (1.0 - p);
    case Stir::PartialGaussian: return spec.partial_threshold * p / (1.0 - p);
    }
    throw ContractError("mask_variance: unknown stir type");
}

} // namespace masklab
