#include "masklab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "masklab/error.hpp"
#include "masklab/rng.hpp"

namespace masklab {

namespace {

void check_classes(std::size_t k) {
    if (k < 2) throw ConfigError("dataset: need at least 2 classes, got " + std::to_string(k));
}

Dataset empty_dataset(std::size_t n, std::size_t dim, std::size_t k) {
    if (n == 0) throw ConfigError("dataset: sample count must be positive");
    if (dim == 0) throw ConfigError("dataset: feature dimension must be positive");
    Dataset d;
    d.features = Tensor({n, dim});
    d.labels = Tensor({n, k});
    d.sample_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.sample_ids[i] = i;
    return d;
}

std::size_t uniform_index(RngStream& stream, std::size_t k) {
    auto idx = static_cast<std::size_t>(stream.next_uniform() * static_cast<double>(k));
    return std::min(idx, k - 1);
}

} // namespace

Dataset make_gaussian_blobs(std::size_t n, std::size_t dim, std::size_t k,
                            std::uint64_t seed) {
    check_classes(k);
    Dataset d = empty_dataset(n, dim, k);
    RngStream centers_rng = RngStream::keyed(seed, 1);
    RngStream noise_rng = RngStream::keyed(seed, 2);
    Tensor centers({k, dim});
    for (std::size_t i = 0; i < centers.size(); ++i)
        centers[i] = centers_rng.next_normal(0.0, 3.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % k;
        d.labels(i, cls) = 1.0;
        for (std::size_t j = 0; j < dim; ++j)
            d.features(i, j) = centers(cls, j) + noise_rng.next_normal(0.0, 1.0);
    }
    return d;
}

Dataset make_two_spirals(std::size_t n, double noise, std::uint64_t seed) {
    if (noise < 0.0) throw ConfigError("dataset: spiral noise must be non-negative");
    Dataset d = empty_dataset(n, 2, 2);
    RngStream rng = RngStream::keyed(seed, 1);
    const double turns = 1.75 * 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cls = i % 2;
        const double t = turns * std::sqrt(rng.next_uniform());
        const double sign = cls == 0 ? 1.0 : -1.0;
        d.features(i, 0) = sign * t * std::cos(t) / turns + rng.next_normal(0.0, noise);
        d.features(i, 1) = sign * t * std::sin(t) / turns + rng.next_normal(0.0, noise);
        d.labels(i, cls) = 1.0;
    }
    return d;
}

Dataset make_noisy_memorization(std::size_t n, std::size_t dim, std::size_t k,
                                double label_noise, std::uint64_t seed) {
    check_classes(k);
    if (label_noise < 0.0 || label_noise > 1.0)
        throw ConfigError("dataset: label_noise must lie in [0, 1]");
    Dataset d = empty_dataset(n, dim, k);
    RngStream teacher_rng = RngStream::keyed(seed, 1);
    RngStream feature_rng = RngStream::keyed(seed, 2);
    RngStream noise_rng = RngStream::keyed(seed, 3);
    Tensor teacher({dim, k});
    for (std::size_t i = 0; i < teacher.size(); ++i)
        teacher[i] = teacher_rng.next_normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j)
            d.features(i, j) = feature_rng.next_normal(0.0, 1.0);
        std::size_t cls = 0;
        double best = -1e300;
        for (std::size_t c = 0; c < k; ++c) {
            double score = 0.0;
            for (std::size_t j = 0; j < dim; ++j) score += d.features(i, j) * teacher(j, c);
            if (score > best) {
                best = score;
                cls = c;
            }
        }
        if (noise_rng.next_uniform() < label_noise) cls = uniform_index(noise_rng, k);
        d.labels(i, cls) = 1.0;
    }
    return d;
}

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.features = Tensor({rows.size(), data.feature_dim()});
    out.labels = Tensor({rows.size(), data.n_classes()});
    out.sample_ids.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t src = rows[r];
        if (src >= data.size())
            throw ContractError("take_rows: row index out of range");
        for (std::size_t j = 0; j < data.feature_dim(); ++j)
            out.features(r, j) = data.features(src, j);
        for (std::size_t j = 0; j < data.n_classes(); ++j)
            out.labels(r, j) = data.labels(src, j);
        out.sample_ids[r] = data.sample_ids[src];
    }
    return out;
}

SplitDataset split_dataset(const Dataset& data, double val_fraction, std::uint64_t seed) {
    if (val_fraction <= 0.0 || val_fraction >= 1.0)
        throw ConfigError("dataset: val_fraction must lie strictly between 0 and 1");
    const std::size_t n = data.size();
    auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(n)));
    if (n_val == 0 || n_val >= n)
        throw ConfigError("dataset: split leaves an empty train or validation side");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngStream rng = RngStream::keyed(seed, 4);
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[uniform_index(rng, i)]);
    SplitDataset out;
    out.train = take_rows(data, {order.begin(), order.end() - static_cast<long>(n_val)});
    out.val = take_rows(data, {order.end() - static_cast<long>(n_val), order.end()});
    return out;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& features_csv,
                       const std::filesystem::path& labels_csv) {
    std::ofstream ff(features_csv);
    if (!ff) throw ConfigError("cannot open " + features_csv.string() + " for writing");
    ff << "sample_id";
    for (std::size_t j = 0; j < data.feature_dim(); ++j) ff << ",f" << j;
    ff << '\n';
    char buf[40];
    for (std::size_t i = 0; i < data.size(); ++i) {
        ff << data.sample_ids[i];
        for (std::size_t j = 0; j < data.feature_dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data.features(i, j));
            ff << ',' << buf;
        }
        ff << '\n';
    }
    if (!ff) throw ConfigError("failed while writing " + features_csv.string());

    std::ofstream lf(labels_csv);
    if (!lf) throw ConfigError("cannot open " + labels_csv.string() + " for writing");
    lf << "sample_id,label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t cls = 0;
        for (std::size_t c = 1; c < data.n_classes(); ++c)
            if (data.labels(i, c) > data.labels(i, cls)) cls = c;
        lf << data.sample_ids[i] << ',' << cls << '\n';
    }
    if (!lf) throw ConfigError("failed while writing " + labels_csv.string());
}

Dataset read_dataset_csv(const std::filesystem::path& features_csv,
                         const std::filesystem::path& labels_csv) {
    std::ifstream ff(features_csv);
    if (!ff) throw ConfigError("cannot open dataset file " + features_csv.string());
    std::string line;
    if (!std::getline(ff, line) || line.rfind("sample_id,", 0) != 0)
        throw ConfigError(features_csv.string() + ": missing sample_id header");
    const auto dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (dim == 0) throw ConfigError(features_csv.string() + ": no feature columns");

    std::vector<std::uint64_t> ids;
    std::vector<double> feats;
    while (std::getline(ff, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) break;
        ids.push_back(std::stoull(cell));
        for (std::size_t j = 0; j < dim; ++j) {
            if (!std::getline(row, cell, ','))
                throw ConfigError(features_csv.string() + ": short row for sample " +
                                  std::to_string(ids.back()));
            feats.push_back(std::stod(cell));
        }
    }
    if (ids.empty()) throw ConfigError(features_csv.string() + ": no data rows");

    std::ifstream lf(labels_csv);
    if (!lf) throw ConfigError("cannot open dataset file " + labels_csv.string());
    if (!std::getline(lf, line) || line.rfind("sample_id,", 0) != 0)
        throw ConfigError(labels_csv.string() + ": missing sample_id header");
    std::vector<std::size_t> cls;
    std::size_t max_cls = 0;
    while (std::getline(lf, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) break;
        const std::uint64_t id = std::stoull(cell);
        if (cls.size() >= ids.size() || id != ids[cls.size()])
            throw ConfigError(labels_csv.string() + ": sample ids do not match " +
                              features_csv.string());
        if (!std::getline(row, cell, ','))
            throw ConfigError(labels_csv.string() + ": missing label for sample " +
                              std::to_string(id));
        cls.push_back(std::stoull(cell));
        max_cls = std::max(max_cls, cls.back());
    }
    if (cls.size() != ids.size())
        throw ConfigError(labels_csv.string() + ": row count does not match " +
                          features_csv.string());

    Dataset d;
    const std::size_t n = ids.size();
    const std::size_t k = std::max<std::size_t>(max_cls + 1, 2);
    d.features = Tensor({n, dim});
    d.labels = Tensor({n, k});
    d.sample_ids = std::move(ids);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) d.features(i, j) = feats[i * dim + j];
        d.labels(i, cls[i]) = 1.0;
    }
    return d;
}

} // namespace masklab
