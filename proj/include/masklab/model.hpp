#pragma once

#include <string>

#include "masklab/autodiff.hpp"
#include "masklab/layers.hpp"

namespace masklab {

enum class OutputKind { Softmax, Sigmoid };
enum class RegularizerTag { Dropout, GaussianDropout, DropConnect, MaskEnsemble, PerNodeDrop };

struct RegularizerKind {
    RegularizerTag tag = RegularizerTag::PerNodeDrop;
    MaskSpec spec;
    std::size_t mask_groups = 4;    // MaskEnsemble only
};

// Human-readable variant tag used in logs and reports, e.g.
// "PerNodeBernoulli_F" for a fixed-mask Bernoulli PerNodeDrop.
std::string variant_label(const RegularizerKind& kind);

struct ModelConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_widths;
    RegularizerKind regularizer;
    std::size_t reg_position = 0;       // slot index in [0, hidden_widths.size()]
    OutputKind output = OutputKind::Softmax;
    std::size_t n_outputs = 0;
    std::size_t dense_units = 64;       // width of the slot's dense layer

    void validate() const;              // throws ConfigError
    LossKind loss_kind() const;
};

// Feedforward stack: the hidden widths with the regularizer slot inserted at
// reg_position, then a linear output layer. The slot always owns a dense
// layer of width dense_units (PerNodeDrop and DropConnect mask that layer's
// product; the activation-level variants precede it), so trainable parameter
// counts are identical across variants for a shared config.
class Model {
public:
    struct Graph {
        Tape tape;
        Tape::NodeId probs = 0;
        std::vector<Tape::NodeId> weight_ids;
        std::vector<Tape::NodeId> bias_ids;
    };

    static Model init(const ModelConfig& cfg, RngStream& init_stream,
                      std::uint64_t mask_seed = 0);

    Graph forward(const Tensor& x, RunMode mode,
                  const std::vector<std::uint64_t>& sample_ids,
                  RngStream* mask_stream) const;

    // Train-mode forward with a caller-supplied slot mask; used to freeze a
    // mask across repeated evaluations (gradient checks, probes).
    Graph forward_with_slot_mask(const Tensor& x, const Tensor& slot_mask) const;

    // The train-mode mask the slot would draw for this batch.
    Tensor sample_slot_mask(std::size_t batch,
                            const std::vector<std::uint64_t>& sample_ids,
                            RngStream* mask_stream) const;

    // Probabilities only (tape discarded).
    Tensor predict(const Tensor& x, RunMode mode,
                   const std::vector<std::uint64_t>& sample_ids,
                   RngStream* mask_stream) const;

    const ModelConfig& config() const { return cfg_; }
    std::size_t param_count() const;
    std::vector<Tensor>& weights() { return weights_; }
    std::vector<Tensor>& biases() { return biases_; }
    const std::vector<Tensor>& weights() const { return weights_; }
    const std::vector<Tensor>& biases() const { return biases_; }
    std::uint64_t mask_seed() const { return mask_seed_; }

private:
    enum class SlotPhase { BeforeDense, Product, None };

    Graph build(const Tensor& x, RunMode mode, const Tensor* slot_mask,
                const std::vector<std::uint64_t>* sample_ids,
                RngStream* mask_stream) const;

    ModelConfig cfg_;
    std::vector<std::size_t> dims_;     // input, stack widths..., n_outputs
    std::size_t slot_layer_ = 0;        // layer index of the regularizer slot
    std::vector<Tensor> weights_;
    std::vector<Tensor> biases_;
    std::uint64_t mask_seed_ = 0;
};

// Fraction of rows whose argmax matches (softmax targets are one-hot rows);
// for sigmoid outputs, fraction of entries on the right side of 0.5.
double accuracy_value(const Tensor& probs, const Tensor& targets, LossKind kind);

} // namespace masklab
