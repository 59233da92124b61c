#pragma once

#include "masklab/masks.hpp"

namespace masklab {

// Reference forward passes for every regularization layer. These are the
// plain-tensor semantics; the training module applies the same mask logic on
// the autodiff tape. All dense-style layers return pre-activations
// (x . W + bias); the activation is the caller's.

// Mask for one PerNodeDrop batch at the spec's granularity: (batch x din) for
// node masks, (batch x din x dout) for connection masks. Dynamic mode draws
// from `stream`; Fixed mode regenerates each sample's mask from
// (spec.seed, sample_id) so nothing has to be stored between epochs.
Tensor pernodedrop_sample_mask(const MaskSpec& spec, std::size_t batch, std::size_t din,
                               std::size_t dout,
                               const std::vector<std::uint64_t>* sample_ids,
                               RngStream* stream);

// Train: per-sample mask applied inside the product. Eval: no sampling,
// activations scaled by the expected mask value.
Tensor pernodedrop_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                           const MaskSpec& spec, RunMode mode,
                           const std::vector<std::uint64_t>& sample_ids,
                           RngStream* stream);

// Per-sample, per-activation Bernoulli mask on the input. Eval scales by 1-p.
Tensor dropout_forward(const Tensor& x, const MaskSpec& spec, RunMode mode,
                       RngStream* stream);

// Multiplicative N(1, sigma^2) noise on the input. Eval is the identity.
Tensor gaussian_dropout_forward(const Tensor& x, const MaskSpec& spec, RunMode mode,
                                RngStream* stream);

// One Bernoulli weight mask per forward call, shared by every batch row.
// Eval scales the weights by 1-p.
Tensor dropconnect_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                           const MaskSpec& spec, RunMode mode, RngStream* stream);

// Fixed block-structured group masks, regenerated deterministically from
// spec.seed. Row k of a batch is routed to group (k mod mask_groups); the
// masks persist for the life of the model, in train and eval alike.
Tensor maskensemble_group_masks(const MaskSpec& spec, std::size_t din,
                                std::size_t mask_groups);
Tensor maskensemble_routing_mask(const MaskSpec& spec, std::size_t batch, std::size_t din,
                                 std::size_t mask_groups);
Tensor maskensemble_forward(const Tensor& x, const MaskSpec& spec,
                            std::size_t mask_groups, RunMode mode);

// Row-broadcast bias add.
Tensor add_row_bias(const Tensor& x, const Tensor& bias);

} // namespace masklab
