#include "masklab/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "masklab/error.hpp"

namespace masklab {

namespace {

using nlohmann::json;

double json_metric(const json& j, const char* key) {
    const json& v = j.at(key);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return v.get<double>();
}

std::size_t shuffle_index(RngStream& rng, std::size_t bound) {
    auto idx = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(bound));
    return std::min(idx, bound - 1);
}

bool params_finite(const Model& model) {
    for (const Tensor& w : model.weights())
        if (!all_finite(w)) return false;
    for (const Tensor& b : model.biases())
        if (!all_finite(b)) return false;
    return true;
}

} // namespace

void TrainConfig::validate() const {
    if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
    if (epochs == 0) throw ConfigError("train.epochs must be positive");
    if (learning_rate < 0.0) throw ConfigError("train.learning_rate must be non-negative");
    if (drop_rates.empty()) throw ConfigError("train.drop_rates must not be empty");
    for (double p : drop_rates)
        if (!(p >= 0.0 && p < 1.0))
            throw ConfigError("train.drop_rates entries must lie in [0, 1)");
}

std::string to_jsonl(const TrainRecord& r) {
    json j;
    j["variant"] = r.variant;
    j["drop_rate"] = r.drop_rate;
    j["epoch"] = r.epoch;
    j["val_loss"] = r.val_loss;
    j["val_acc"] = r.val_acc;
    j["train_loss_clean"] = r.train_loss_clean;
    j["train_acc_clean"] = r.train_acc_clean;
    j["epoch_wall_seconds"] = r.epoch_wall_seconds;
    j["diverged"] = r.diverged;
    return j.dump();
}

TrainRecord train_record_from_jsonl(const std::string& line) {
    json j = json::parse(line);
    TrainRecord r;
    r.variant = j.at("variant").get<std::string>();
    r.drop_rate = json_metric(j, "drop_rate");
    r.epoch = j.at("epoch").get<std::size_t>();
    r.val_loss = json_metric(j, "val_loss");
    r.val_acc = json_metric(j, "val_acc");
    r.train_loss_clean = json_metric(j, "train_loss_clean");
    r.train_acc_clean = json_metric(j, "train_acc_clean");
    r.epoch_wall_seconds = json_metric(j, "epoch_wall_seconds");
    r.diverged = j.at("diverged").get<bool>();
    return r;
}

EvalMetrics evaluate(const Model& model, const Dataset& data, std::size_t chunk) {
    if (chunk == 0) throw ContractError("evaluate: chunk size must be positive");
    const LossKind kind = model.config().loss_kind();
    const std::size_t n = data.size();
    double loss_total = 0.0, acc_total = 0.0, denom = 0.0;
    std::vector<std::size_t> rows;
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t stop = std::min(n, start + chunk);
        rows.resize(stop - start);
        for (std::size_t i = start; i < stop; ++i) rows[i - start] = i;
        Dataset part = take_rows(data, rows);
        Tensor probs = model.predict(part.features, RunMode::Eval, part.sample_ids, nullptr);
        const double w = kind == LossKind::CategoricalCE
                             ? static_cast<double>(part.size())
                             : static_cast<double>(probs.size());
        loss_total += cross_entropy_value(probs, part.labels, kind) * w;
        acc_total += accuracy_value(probs, part.labels, kind) * w;
        denom += w;
    }
    return {loss_total / denom, acc_total / denom};
}

TrainOutcome train_model(const ModelConfig& mcfg, const TrainConfig& cfg,
                         const SplitDataset& data) {
    mcfg.validate();
    cfg.validate();
    if (data.train.size() == 0 || data.val.size() == 0)
        throw ConfigError("train: empty train or validation split");
    if (data.train.feature_dim() != mcfg.input_dim)
        throw ConfigError("train: dataset feature dim " +
                          std::to_string(data.train.feature_dim()) +
                          " does not match model input_dim " + std::to_string(mcfg.input_dim));
    if (data.train.n_classes() != mcfg.n_outputs)
        throw ConfigError("train: dataset classes " + std::to_string(data.train.n_classes()) +
                          " do not match model n_outputs " + std::to_string(mcfg.n_outputs));

    RngStream init_rng = RngStream::keyed(cfg.seed, 11);
    RngStream shuffle_rng = RngStream::keyed(cfg.seed, 12);
    RngStream mask_rng = RngStream::keyed(cfg.seed, 13);
    const std::uint64_t mask_seed = mix64(cfg.seed ^ 0x6d61736bULL);

    TrainOutcome out{.records = {}, .model = Model::init(mcfg, init_rng, mask_seed)};
    Model& model = out.model;

    std::vector<Tensor*> params;
    for (Tensor& w : model.weights()) params.push_back(&w);
    for (Tensor& b : model.biases()) params.push_back(&b);
    AdamState adam;
    adam.init(params);
    const AdamConfig acfg{.learning_rate = cfg.learning_rate};

    const std::string variant = variant_label(mcfg.regularizer);
    const double drop_rate = mcfg.regularizer.spec.drop_rate;
    const LossKind kind = mcfg.loss_kind();
    const std::size_t n_train = data.train.size();

    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    double best_val = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = n_train; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_index(shuffle_rng, i)]);

        bool diverged = false;
        std::vector<std::size_t> rows;
        for (std::size_t start = 0; start < n_train && !diverged; start += cfg.batch_size) {
            const std::size_t stop = std::min(n_train, start + cfg.batch_size);
            rows.assign(order.begin() + static_cast<long>(start),
                        order.begin() + static_cast<long>(stop));
            Dataset batch = take_rows(data.train, rows);
            Model::Graph g =
                model.forward(batch.features, RunMode::Train, batch.sample_ids, &mask_rng);
            Tape::NodeId loss = g.tape.cross_entropy(g.probs, batch.labels, kind);
            if (!all_finite(g.tape.value(loss))) {
                diverged = true;
                break;
            }
            auto grads = g.tape.backward(loss);
            std::vector<const Tensor*> grad_ptrs;
            for (Tape::NodeId id : g.weight_ids) grad_ptrs.push_back(&grads.at(id));
            for (Tape::NodeId id : g.bias_ids) grad_ptrs.push_back(&grads.at(id));
            adam_step(params, grad_ptrs, adam, acfg);
        }
        if (!diverged && !params_finite(model)) diverged = true;
        const auto t1 = std::chrono::steady_clock::now();

        TrainRecord rec;
        rec.variant = variant;
        rec.drop_rate = drop_rate;
        rec.epoch = epoch;
        rec.epoch_wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        rec.diverged = diverged;
        if (diverged) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            rec.val_loss = rec.val_acc = rec.train_loss_clean = rec.train_acc_clean = nan;
            out.records.push_back(std::move(rec));
            break;
        }
        const EvalMetrics val = evaluate(model, data.val);
        const EvalMetrics clean = evaluate(model, data.train);
        rec.val_loss = val.loss;
        rec.val_acc = val.acc;
        rec.train_loss_clean = clean.loss;
        rec.train_acc_clean = clean.acc;
        out.records.push_back(std::move(rec));

        if (cfg.early_stop_patience > 0) {
            if (val.loss < best_val) {
                best_val = val.loss;
                stale = 0;
            } else if (++stale >= cfg.early_stop_patience) {
                break;
            }
        }
    }
    return out;
}

} // namespace masklab
