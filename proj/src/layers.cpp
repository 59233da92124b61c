#include "masklab/layers.hpp"

#include <string>

#include "masklab/error.hpp"

namespace masklab {

namespace {

Shape per_sample_shape(const MaskSpec& spec, std::size_t din, std::size_t dout) {
    if (spec.granularity == Granularity::Node) return Shape{din};
    return Shape{din, dout};
}

void copy_row(Tensor& dst, std::size_t row, const Tensor& src) {
    const std::size_t stride = src.size();
    for (std::size_t i = 0; i < stride; ++i) dst[row * stride + i] = src[i];
}

} // namespace

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
    if (x.rank() != 2 || bias.rank() != 1 || bias.dim(0) != x.dim(1))
        throw ShapeError("add_row_bias: " + x.shape_str() + " + " + bias.shape_str());
    Tensor y = x;
    for (std::size_t i = 0; i < y.dim(0); ++i)
        for (std::size_t j = 0; j < y.dim(1); ++j) y(i, j) += bias[j];
    return y;
}

Tensor pernodedrop_sample_mask(const MaskSpec& spec, std::size_t batch, std::size_t din,
                               std::size_t dout,
                               const std::vector<std::uint64_t>* sample_ids,
                               RngStream* stream) {
    spec.validate();
    const Shape full = spec.granularity == Granularity::Node
                           ? Shape{batch, din}
                           : Shape{batch, din, dout};
    if (spec.mode == MaskMode::Dynamic) {
        if (stream == nullptr)
            throw ContractError("pernodedrop: dynamic mask sampling requires a stream");
        return sample_mask(spec, full, *stream);
    }

    // Fixed mode: per-sample masks keyed on (seed, sample_id); per-model
    // masks keyed on the seed alone and repeated for every row.
    Tensor m(full);
    const Shape row_shape = per_sample_shape(spec, din, dout);
    if (spec.fixed_scope == FixedScope::PerModel) {
        RngStream s = RngStream::keyed(spec.seed, 0);
        const Tensor row = sample_mask(spec, row_shape, s);
        for (std::size_t k = 0; k < batch; ++k) copy_row(m, k, row);
        return m;
    }
    if (sample_ids == nullptr || sample_ids->size() != batch)
        throw ContractError("pernodedrop: fixed mode requires one sample_id per batch row");
    for (std::size_t k = 0; k < batch; ++k) {
        RngStream s = RngStream::keyed(spec.seed, (*sample_ids)[k]);
        copy_row(m, k, sample_mask(spec, row_shape, s));
    }
    return m;
}

Tensor pernodedrop_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                           const MaskSpec& spec, RunMode mode,
                           const std::vector<std::uint64_t>& sample_ids,
                           RngStream* stream) {
    if (mode == RunMode::Eval) {
        Tensor y = mul(matmul(x, w), expected_mask_value(spec));
        return add_row_bias(y, bias);
    }
    const Tensor m = pernodedrop_sample_mask(spec, x.dim(0), x.dim(1), w.dim(1),
                                             sample_ids.empty() ? nullptr : &sample_ids,
                                             stream);
    return add_row_bias(batched_masked_matmul(x, w, m), bias);
}

Tensor dropout_forward(const Tensor& x, const MaskSpec& spec, RunMode mode,
                       RngStream* stream) {
    spec.validate();
    if (mode == RunMode::Eval) return mul(x, 1.0 - spec.drop_rate);
    if (stream == nullptr)
        throw ContractError("dropout: train mode requires a stream");
    MaskSpec bspec = spec;
    bspec.stir = Stir::Bernoulli;
    return mul(x, sample_bernoulli_mask(bspec, x.shape(), *stream));
}

Tensor gaussian_dropout_forward(const Tensor& x, const MaskSpec& spec, RunMode mode,
                                RngStream* stream) {
    spec.validate();
    if (mode == RunMode::Eval) return x;
    if (stream == nullptr)
        throw ContractError("gaussian_dropout: train mode requires a stream");
    MaskSpec gspec = spec;
    gspec.stir = Stir::Gaussian;
    return mul(x, sample_gaussian_mask(gspec, x.shape(), *stream));
}

Tensor dropconnect_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                           const MaskSpec& spec, RunMode mode, RngStream* stream) {
    spec.validate();
    if (mode == RunMode::Eval) {
        Tensor y = matmul(x, mul(w, 1.0 - spec.drop_rate));
        return add_row_bias(y, bias);
    }
    if (stream == nullptr)
        throw ContractError("dropconnect: train mode requires a stream");
    // One mask per forward call, identical for every sample in the batch.
    MaskSpec bspec = spec;
    bspec.stir = Stir::Bernoulli;
    const Tensor m = sample_bernoulli_mask(bspec, w.shape(), *stream);
    return add_row_bias(matmul(x, mul(w, m)), bias);
}

Tensor maskensemble_group_masks(const MaskSpec& spec, std::size_t din,
                                std::size_t mask_groups) {
    spec.validate();
    if (mask_groups == 0 || din % mask_groups != 0)
        throw ConfigError("maskensemble: mask_groups " + std::to_string(mask_groups) +
                          " does not divide input dimension " + std::to_string(din));
    const std::size_t block = din / mask_groups;
    const double keep = 1.0 - spec.drop_rate;
    Tensor masks({mask_groups, din}, 1.0);
    if (spec.drop_rate == 0.0) return masks;
    for (std::size_t g = 0; g < mask_groups; ++g) {
        RngStream s = RngStream::keyed(spec.seed, 0xa5c3u + g);
        for (std::size_t b = 0; b < mask_groups; ++b) {
            const double on = s.next_uniform() < keep ? 1.0 : 0.0;
            for (std::size_t i = 0; i < block; ++i) masks(g, b * block + i) = on;
        }
    }
    return masks;
}

Tensor maskensemble_routing_mask(const MaskSpec& spec, std::size_t batch, std::size_t din,
                                 std::size_t mask_groups) {
    const Tensor groups = maskensemble_group_masks(spec, din, mask_groups);
    Tensor m({batch, din});
    for (std::size_t k = 0; k < batch; ++k)
        for (std::size_t i = 0; i < din; ++i) m(k, i) = groups(k % mask_groups, i);
    return m;
}

Tensor maskensemble_forward(const Tensor& x, const MaskSpec& spec,
                            std::size_t mask_groups, RunMode) {
    // Same masks in train and eval; the routing is the regularizer.
    return mul(x, maskensemble_routing_mask(spec, x.dim(0), x.dim(1), mask_groups));
}

} // namespace masklab
