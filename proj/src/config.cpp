#include "masklab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "masklab/error.hpp"

namespace masklab {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::string& section,
                 std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (ok.find(key) == ok.end())
            throw ConfigError("unknown key " + section + "." + key);
}

const json& require(const json& j, const std::string& section, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing key " + section + "." + key);
    return *it;
}

template <typename T>
T as(const json& v, const std::string& section, const char* key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for " + section + "." + key);
    }
}

template <typename T>
T field_or(const json& j, const std::string& section, const char* key, T def) {
    auto it = j.find(key);
    return it == j.end() ? def : as<T>(*it, section, key);
}

std::string enum_value(const json& j, const std::string& section, const char* key,
                       std::initializer_list<const char*> allowed, const char* def) {
    const std::string v = field_or<std::string>(j, section, key, def);
    for (const char* a : allowed)
        if (v == a) return v;
    throw ConfigError("bad value for " + section + "." + key + ": '" + v + "'");
}

RegularizerKind parse_variant(const json& j, const std::string& section) {
    if (!j.is_object()) throw ConfigError(section + " must be an object");
    expect_keys(j, section,
                {"tag", "stir", "granularity", "mode", "fixed_scope", "partial_threshold",
                 "mask_groups"});
    const std::string tag = as<std::string>(require(j, section, "tag"), section, "tag");
    RegularizerKind kind;
    if (tag == "Dropout") kind.tag = RegularizerTag::Dropout;
    else if (tag == "GaussianDropout") kind.tag = RegularizerTag::GaussianDropout;
    else if (tag == "DropConnect") kind.tag = RegularizerTag::DropConnect;
    else if (tag == "MaskEnsemble") kind.tag = RegularizerTag::MaskEnsemble;
    else if (tag == "PerNodeDrop") kind.tag = RegularizerTag::PerNodeDrop;
    else throw ConfigError("bad value for " + section + ".tag: '" + tag + "'");

    if (kind.tag != RegularizerTag::PerNodeDrop)
        for (const char* key : {"stir", "granularity", "mode", "fixed_scope",
                                "partial_threshold"})
            if (j.contains(key))
                throw ConfigError(section + "." + key + " only applies to PerNodeDrop");
    if (kind.tag != RegularizerTag::MaskEnsemble && j.contains("mask_groups"))
        throw ConfigError(section + ".mask_groups only applies to MaskEnsemble");

    if (kind.tag == RegularizerTag::PerNodeDrop) {
        const std::string stir = enum_value(
            j, section, "stir", {"bernoulli", "gaussian", "partial_gaussian"}, "bernoulli");
        kind.spec.stir = stir == "bernoulli"  ? Stir::Bernoulli
                         : stir == "gaussian" ? Stir::Gaussian
                                              : Stir::PartialGaussian;
        kind.spec.granularity =
            enum_value(j, section, "granularity", {"node", "connection"}, "node") == "node"
                ? Granularity::Node
                : Granularity::Connection;
        kind.spec.mode =
            enum_value(j, section, "mode", {"dynamic", "fixed"}, "dynamic") == "dynamic"
                ? MaskMode::Dynamic
                : MaskMode::Fixed;
        kind.spec.fixed_scope =
            enum_value(j, section, "fixed_scope", {"per_sample", "per_model"}, "per_sample") ==
                    "per_sample"
                ? FixedScope::PerSample
                : FixedScope::PerModel;
        kind.spec.partial_threshold =
            field_or<double>(j, section, "partial_threshold", 0.5);
    } else if (kind.tag == RegularizerTag::MaskEnsemble) {
        kind.mask_groups = field_or<std::size_t>(j, section, "mask_groups", 4);
    }
    return kind;
}

} // namespace

std::string DatasetConfig::id() const {
    std::ostringstream s;
    if (synthetic) {
        const SyntheticDatasetSpec& sp = *synthetic;
        s << sp.kind << ":n=" << sp.n_samples << ":d=" << sp.n_features
          << ":k=" << sp.n_classes << ":ln=" << sp.label_noise << ":noise=" << sp.noise
          << ":seed=" << sp.seed;
    } else {
        s << "csv:" << features_csv.string() << ':' << labels_csv.string();
    }
    return s.str();
}

ModelConfig ExperimentConfig::model_for(const RegularizerKind& variant, double drop_rate,
                                        const Dataset& data) const {
    ModelConfig m;
    m.input_dim = data.feature_dim();
    m.n_outputs = data.n_classes();
    m.hidden_widths = hidden_widths;
    m.dense_units = dense_units;
    m.reg_position = reg_position.value_or(hidden_widths.size());
    m.output = output;
    m.regularizer = variant;
    m.regularizer.spec.drop_rate = drop_rate;
    return m;
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");
    expect_keys(root, origin, {"dataset", "model", "train", "variants", "out_dir"});

    ExperimentConfig cfg;

    const json& ds = require(root, origin, "dataset");
    if (!ds.is_object()) throw ConfigError("dataset must be an object");
    if (ds.contains("kind")) {
        expect_keys(ds, "dataset",
                    {"kind", "n_samples", "n_features", "n_classes", "label_noise", "noise",
                     "seed"});
        SyntheticDatasetSpec sp;
        sp.kind = enum_value(ds, "dataset", "kind",
                             {"gaussian_blobs", "two_spirals", "noisy_label_memorization"},
                             "gaussian_blobs");
        sp.n_samples = field_or<std::size_t>(ds, "dataset", "n_samples", sp.n_samples);
        sp.n_features = field_or<std::size_t>(ds, "dataset", "n_features", sp.n_features);
        sp.n_classes = field_or<std::size_t>(ds, "dataset", "n_classes", sp.n_classes);
        sp.label_noise = field_or<double>(ds, "dataset", "label_noise", sp.label_noise);
        sp.noise = field_or<double>(ds, "dataset", "noise", sp.noise);
        sp.seed = field_or<std::uint64_t>(ds, "dataset", "seed", sp.seed);
        cfg.dataset.synthetic = sp;
    } else {
        expect_keys(ds, "dataset", {"features_csv", "labels_csv"});
        cfg.dataset.features_csv =
            as<std::string>(require(ds, "dataset", "features_csv"), "dataset", "features_csv");
        cfg.dataset.labels_csv =
            as<std::string>(require(ds, "dataset", "labels_csv"), "dataset", "labels_csv");
    }

    const json& model = require(root, origin, "model");
    if (!model.is_object()) throw ConfigError("model must be an object");
    expect_keys(model, "model", {"hidden_widths", "dense_units", "reg_position", "output"});
    cfg.hidden_widths =
        field_or<std::vector<std::size_t>>(model, "model", "hidden_widths", {});
    cfg.dense_units = field_or<std::size_t>(model, "model", "dense_units", cfg.dense_units);
    if (model.contains("reg_position"))
        cfg.reg_position = as<std::size_t>(model["reg_position"], "model", "reg_position");
    cfg.output = enum_value(model, "model", "output", {"softmax", "sigmoid"}, "softmax") ==
                         "softmax"
                     ? OutputKind::Softmax
                     : OutputKind::Sigmoid;

    const json& train = require(root, origin, "train");
    if (!train.is_object()) throw ConfigError("train must be an object");
    expect_keys(train, "train",
                {"drop_rates", "batch_size", "epochs", "learning_rate", "seed",
                 "early_stop_patience", "val_fraction"});
    cfg.train.drop_rates =
        field_or<std::vector<double>>(train, "train", "drop_rates", cfg.train.drop_rates);
    cfg.train.batch_size =
        field_or<std::size_t>(train, "train", "batch_size", cfg.train.batch_size);
    cfg.train.epochs = field_or<std::size_t>(train, "train", "epochs", cfg.train.epochs);
    cfg.train.learning_rate =
        field_or<double>(train, "train", "learning_rate", cfg.train.learning_rate);
    cfg.train.seed = field_or<std::uint64_t>(train, "train", "seed", cfg.train.seed);
    cfg.train.early_stop_patience = field_or<std::size_t>(train, "train",
                                                          "early_stop_patience", 0);
    cfg.val_fraction = field_or<double>(train, "train", "val_fraction", cfg.val_fraction);
    cfg.train.validate();
    if (cfg.val_fraction <= 0.0 || cfg.val_fraction >= 1.0)
        throw ConfigError("train.val_fraction must lie strictly between 0 and 1");

    const json& variants = require(root, origin, "variants");
    if (!variants.is_array() || variants.empty())
        throw ConfigError("variants must be a non-empty array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        RegularizerKind kind =
            parse_variant(variants[i], "variants[" + std::to_string(i) + "]");
        const std::string label = variant_label(kind);
        if (!labels.insert(label).second)
            throw ConfigError("variants: duplicate variant " + label);
        cfg.variants.push_back(kind);
    }

    cfg.out_dir = field_or<std::string>(root, origin, "out_dir", "runs");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_experiment_config(text.str(), path.string());
}

Dataset load_dataset(const DatasetConfig& cfg) {
    if (!cfg.synthetic) return read_dataset_csv(cfg.features_csv, cfg.labels_csv);
    const SyntheticDatasetSpec& sp = *cfg.synthetic;
    if (sp.kind == "gaussian_blobs")
        return make_gaussian_blobs(sp.n_samples, sp.n_features, sp.n_classes, sp.seed);
    if (sp.kind == "two_spirals") return make_two_spirals(sp.n_samples, sp.noise, sp.seed);
    if (sp.kind == "noisy_label_memorization")
        return make_noisy_memorization(sp.n_samples, sp.n_features, sp.n_classes,
                                       sp.label_noise, sp.seed);
    throw ConfigError("dataset.kind: unknown synthetic kind '" + sp.kind + "'");
}

} // namespace masklab
