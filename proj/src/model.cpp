#include "masklab/model.hpp"

#include <cmath>

#include "masklab/error.hpp"

namespace masklab {

std::string variant_label(const RegularizerKind& kind) {
    switch (kind.tag) {
    case RegularizerTag::Dropout: return "Dropout";
    case RegularizerTag::GaussianDropout: return "GaussianDropout";
    case RegularizerTag::DropConnect: return "DropConnect";
    case RegularizerTag::MaskEnsemble: return "MaskEnsemble";
    case RegularizerTag::PerNodeDrop: break;
    }
    std::string label = "PerNode";
    switch (kind.spec.stir) {
    case Stir::Bernoulli: label += "Bernoulli"; break;
    case Stir::Gaussian: label += "Gaussian"; break;
    case Stir::PartialGaussian: label += "PartialGaussian"; break;
    }
    if (kind.spec.granularity == Granularity::Connection) label += "_Conn";
    if (kind.spec.mode == MaskMode::Fixed) label += "_F";
    return label;
}

void ModelConfig::validate() const {
    if (input_dim == 0) throw ConfigError("model.input_dim must be positive");
    if (n_outputs == 0) throw ConfigError("model.n_outputs must be positive");
    if (output == OutputKind::Softmax && n_outputs < 2)
        throw ConfigError("model.n_outputs: softmax output needs at least 2 classes");
    if (dense_units == 0) throw ConfigError("model.dense_units must be positive");
    for (std::size_t w : hidden_widths)
        if (w == 0) throw ConfigError("model.hidden_widths entries must be positive");
    if (reg_position > hidden_widths.size())
        throw ConfigError("model.reg_position " + std::to_string(reg_position) +
                          " exceeds stack depth " + std::to_string(hidden_widths.size()));
    if (regularizer.tag == RegularizerTag::MaskEnsemble && regularizer.mask_groups == 0)
        throw ConfigError("model.mask_groups must be positive");
    try {
        regularizer.spec.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

LossKind ModelConfig::loss_kind() const {
    return output == OutputKind::Softmax ? LossKind::CategoricalCE : LossKind::BinaryCE;
}

Model Model::init(const ModelConfig& cfg, RngStream& init_stream, std::uint64_t mask_seed) {
    cfg.validate();
    Model m;
    m.cfg_ = cfg;
    m.mask_seed_ = mask_seed;
    m.dims_.push_back(cfg.input_dim);
    for (std::size_t i = 0; i <= cfg.hidden_widths.size(); ++i) {
        if (i == cfg.reg_position) m.dims_.push_back(cfg.dense_units);
        if (i < cfg.hidden_widths.size()) m.dims_.push_back(cfg.hidden_widths[i]);
    }
    m.dims_.push_back(cfg.n_outputs);
    m.slot_layer_ = cfg.reg_position;
    for (std::size_t l = 0; l + 1 < m.dims_.size(); ++l) {
        const std::size_t fan_in = m.dims_[l], fan_out = m.dims_[l + 1];
        Tensor w({fan_in, fan_out});
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = init_stream.next_normal(0.0, stddev);
        m.weights_.push_back(std::move(w));
        m.biases_.push_back(Tensor({fan_out}));
    }
    return m;
}

std::size_t Model::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l)
        n += dims_[l] * dims_[l + 1] + dims_[l + 1];
    return n;
}

namespace {

RngStream& require_stream(RngStream* stream, const char* what) {
    if (stream == nullptr)
        throw ContractError(std::string("train-mode ") + what +
                            " forward requires a mask stream");
    return *stream;
}

} // namespace

Tensor Model::sample_slot_mask(std::size_t batch,
                               const std::vector<std::uint64_t>& sample_ids,
                               RngStream* mask_stream) const {
    MaskSpec spec = cfg_.regularizer.spec;
    spec.seed = mask_seed_;
    const std::size_t din = dims_[slot_layer_];
    const std::size_t dout = dims_[slot_layer_ + 1];
    switch (cfg_.regularizer.tag) {
    case RegularizerTag::PerNodeDrop:
        return pernodedrop_sample_mask(spec, batch, din, dout, &sample_ids, mask_stream);
    case RegularizerTag::Dropout: {
        spec.stir = Stir::Bernoulli;
        return sample_bernoulli_mask(spec, {batch, din}, require_stream(mask_stream, "Dropout"));
    }
    case RegularizerTag::GaussianDropout: {
        spec.stir = Stir::Gaussian;
        return sample_gaussian_mask(spec, {batch, din},
                                    require_stream(mask_stream, "GaussianDropout"));
    }
    case RegularizerTag::DropConnect: {
        spec.stir = Stir::Bernoulli;
        return sample_bernoulli_mask(spec, {din, dout},
                                     require_stream(mask_stream, "DropConnect"));
    }
    case RegularizerTag::MaskEnsemble:
        return maskensemble_routing_mask(spec, batch, din, cfg_.regularizer.mask_groups);
    }
    throw ContractError("sample_slot_mask: unknown regularizer tag");
}

Model::Graph Model::build(const Tensor& x, RunMode mode, const Tensor* slot_mask,
                          const std::vector<std::uint64_t>* sample_ids,
                          RngStream* mask_stream) const {
    if (x.rank() != 2 || x.dim(1) != cfg_.input_dim)
        throw ShapeError("model forward: input " + x.shape_str() + " does not match input_dim " +
                         std::to_string(cfg_.input_dim));
    const RegularizerTag tag = cfg_.regularizer.tag;
    MaskSpec spec = cfg_.regularizer.spec;
    spec.seed = mask_seed_;

    Tensor mask;
    const bool slot_needs_mask =
        mode == RunMode::Train || tag == RegularizerTag::MaskEnsemble;
    if (slot_needs_mask) {
        if (slot_mask != nullptr) {
            mask = *slot_mask;
        } else {
            static const std::vector<std::uint64_t> kNoIds;
            mask = sample_slot_mask(x.dim(0), sample_ids ? *sample_ids : kNoIds, mask_stream);
        }
    }

    Graph g;
    Tape& t = g.tape;
    Tape::NodeId cur = t.input(x);
    const std::size_t layers = dims_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const Tape::NodeId wid = t.input(weights_[l]);
        const Tape::NodeId bid = t.input(biases_[l]);
        g.weight_ids.push_back(wid);
        g.bias_ids.push_back(bid);
        Tape::NodeId z;
        if (l != slot_layer_) {
            z = t.matmul(cur, wid);
        } else {
            switch (tag) {
            case RegularizerTag::PerNodeDrop:
                z = mode == RunMode::Train
                        ? t.masked_matmul(cur, wid, mask)
                        : t.scale(t.matmul(cur, wid), expected_mask_value(spec));
                break;
            case RegularizerTag::Dropout:
                z = mode == RunMode::Train
                        ? t.matmul(t.mul_const(cur, mask), wid)
                        : t.matmul(t.scale(cur, 1.0 - spec.drop_rate), wid);
                break;
            case RegularizerTag::GaussianDropout:
                z = mode == RunMode::Train ? t.matmul(t.mul_const(cur, mask), wid)
                                           : t.matmul(cur, wid);
                break;
            case RegularizerTag::DropConnect:
                z = mode == RunMode::Train
                        ? t.weight_masked_matmul(cur, wid, mask)
                        : t.scale(t.matmul(cur, wid), 1.0 - spec.drop_rate);
                break;
            case RegularizerTag::MaskEnsemble:
                z = t.matmul(t.mul_const(cur, mask), wid);
                break;
            }
        }
        z = t.add_bias(z, bid);
        cur = l + 1 < layers ? t.relu(z) : z;
    }
    g.probs = cfg_.output == OutputKind::Softmax ? t.softmax_rows(cur) : t.sigmoid(cur);
    return g;
}

Model::Graph Model::forward(const Tensor& x, RunMode mode,
                            const std::vector<std::uint64_t>& sample_ids,
                            RngStream* mask_stream) const {
    return build(x, mode, nullptr, &sample_ids, mask_stream);
}

Model::Graph Model::forward_with_slot_mask(const Tensor& x, const Tensor& slot_mask) const {
    return build(x, RunMode::Train, &slot_mask, nullptr, nullptr);
}

Tensor Model::predict(const Tensor& x, RunMode mode,
                      const std::vector<std::uint64_t>& sample_ids,
                      RngStream* mask_stream) const {
    Graph g = forward(x, mode, sample_ids, mask_stream);
    return g.tape.value(g.probs);
}

double accuracy_value(const Tensor& probs, const Tensor& targets, LossKind kind) {
    if (!probs.same_shape(targets))
        throw ShapeError("accuracy: predictions " + probs.shape_str() + " vs targets " +
                         targets.shape_str());
    if (probs.rank() != 2)
        throw ShapeError("accuracy: expected rank-2 predictions, got " + probs.shape_str());
    if (kind == LossKind::BinaryCE) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < probs.size(); ++i)
            hits += (probs[i] > 0.5) == (targets[i] > 0.5) ? 1 : 0;
        return static_cast<double>(hits) / static_cast<double>(probs.size());
    }
    std::size_t hits = 0;
    for (std::size_t r = 0; r < probs.dim(0); ++r) {
        std::size_t pa = 0, ta = 0;
        for (std::size_t c = 1; c < probs.dim(1); ++c) {
            if (probs(r, c) > probs(r, pa)) pa = c;
            if (targets(r, c) > targets(r, ta)) ta = c;
        }
        hits += pa == ta ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(probs.dim(0));
}

} // namespace masklab
