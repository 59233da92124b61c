#include "masklab/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "masklab/error.hpp"
#include "masklab/stats.hpp"

namespace masklab {

namespace {

bool usable(const TrainRecord& r) {
    return !r.diverged && std::isfinite(r.val_loss);
}

bool better(const TrainRecord& a, const TrainRecord& b) {
    if (a.val_loss != b.val_loss) return a.val_loss < b.val_loss;
    if (a.epoch != b.epoch) return a.epoch < b.epoch;
    return a.drop_rate < b.drop_rate;
}

// Average ranks, 1 = smallest value.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

std::vector<TrainRecord> select_top_k(const std::vector<TrainRecord>& records,
                                      std::size_t k) {
    if (k == 0) throw ContractError("select_top_k: k must be positive");
    std::vector<std::string> order;
    std::map<std::string, std::vector<TrainRecord>> groups;
    for (const TrainRecord& r : records) {
        if (!usable(r)) continue;
        if (groups.find(r.variant) == groups.end()) order.push_back(r.variant);
        groups[r.variant].push_back(r);
    }
    std::vector<TrainRecord> out;
    for (const std::string& v : order) {
        std::vector<TrainRecord>& g = groups[v];
        std::sort(g.begin(), g.end(), better);
        for (std::size_t i = 0; i < std::min(k, g.size()); ++i) out.push_back(g[i]);
    }
    return out;
}

RankReport friedman_test(const std::vector<std::vector<double>>& blocks,
                         bool lower_is_better, const std::vector<std::string>& names) {
    const std::size_t n = blocks.size();
    if (n < 2) throw ContractError("friedman_test: need at least 2 blocks");
    const std::size_t k = blocks.front().size();
    if (k < 2) throw ContractError("friedman_test: need at least 2 treatments");
    for (const auto& block : blocks)
        if (block.size() != k)
            throw ContractError("friedman_test: ragged block matrix");
    if (!names.empty() && names.size() != k)
        throw ContractError("friedman_test: name count does not match treatments");

    RankReport rep;
    rep.n_blocks = n;
    rep.k_variants = k;
    rep.variants = names;
    rep.mean_ranks.assign(k, 0.0);
    for (const auto& block : blocks) {
        std::vector<double> vals = block;
        if (!lower_is_better)
            for (double& v : vals) v = -v;
        const std::vector<double> ranks = average_ranks(vals);
        for (std::size_t j = 0; j < k; ++j) rep.mean_ranks[j] += ranks[j];
    }
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    double sum_r_sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        sum_r_sq += rep.mean_ranks[j] * rep.mean_ranks[j];
        rep.mean_ranks[j] /= nd;
    }
    rep.friedman_chi2 =
        std::max(0.0, 12.0 / (nd * kd * (kd + 1.0)) * sum_r_sq - 3.0 * nd * (kd + 1.0));
    rep.p_value = chi_square_upper_tail(rep.friedman_chi2, k - 1);
    rep.kendall_w = std::min(1.0, rep.friedman_chi2 / (nd * (kd - 1.0)));
    return rep;
}

RankingResult rank_variants(const std::vector<TrainRecord>& records, std::size_t k) {
    if (k < 2) throw ContractError("rank_variants: need k >= 2 for positional blocks");
    const std::vector<TrainRecord> selected = select_top_k(records, k);

    std::vector<std::string> order;
    std::map<std::string, std::vector<const TrainRecord*>> groups;
    for (const TrainRecord& r : selected) {
        if (groups.find(r.variant) == groups.end()) order.push_back(r.variant);
        groups[r.variant].push_back(&r);
    }

    RankingResult out;
    std::vector<std::string> kept;
    for (const std::string& v : order) {
        if (groups[v].size() == k) kept.push_back(v);
        else out.excluded.push_back(v);
    }
    if (kept.size() < 2)
        throw ContractError("rank_variants: fewer than 2 variants have " +
                            std::to_string(k) + " usable records");

    std::vector<std::vector<double>> blocks(k, std::vector<double>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j)
        for (std::size_t b = 0; b < k; ++b)
            blocks[b][j] = groups[kept[j]][b]->val_loss;
    out.report = friedman_test(blocks, true, kept);

    std::vector<double> pooled;
    for (const std::string& v : kept)
        for (const TrainRecord* r : groups[v]) pooled.push_back(r->val_loss);
    const std::vector<double> pooled_ranks = average_ranks(pooled);
    out.pooled_mean_ranks.assign(kept.size(), 0.0);
    for (std::size_t j = 0; j < kept.size(); ++j) {
        for (std::size_t b = 0; b < k; ++b)
            out.pooled_mean_ranks[j] += pooled_ranks[j * k + b];
        out.pooled_mean_ranks[j] /= static_cast<double>(k);
    }
    return out;
}

} // namespace masklab
