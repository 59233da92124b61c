#pragma once

#include <string>
#include <vector>

#include "masklab/train.hpp"

namespace masklab {

struct RankReport {
    std::vector<std::string> variants;
    std::vector<double> mean_ranks;         // within-block Friedman mean ranks
    double friedman_chi2 = 0.0;
    double p_value = 1.0;
    double kendall_w = 0.0;
    std::size_t n_blocks = 0;
    std::size_t k_variants = 0;
};

// Per variant, the k records with smallest val_loss across all drop rates and
// epochs (duplicate drop rates allowed); ties broken by earlier epoch, then
// lower drop rate. Diverged and non-finite records are skipped. Output is
// grouped by variant in first-appearance order, best first within a group.
std::vector<TrainRecord> select_top_k(const std::vector<TrainRecord>& records,
                                      std::size_t k);

// blocks is n x k: block b holds the b-th best value of each of the k
// treatments. Within-block ranks (1 = best, average on ties), chi-square
// statistic, upper-tail p-value at k-1 dof, and W = chi2 / (n (k-1)).
RankReport friedman_test(const std::vector<std::vector<double>>& blocks,
                         bool lower_is_better = true,
                         const std::vector<std::string>& names = {});

struct RankingResult {
    RankReport report;                      // over variants with k full records
    std::vector<double> pooled_mean_ranks;  // all selected records ranked together
    std::vector<std::string> excluded;      // variants with fewer than k usable records
};

// The full ranking pipeline: top-k per variant, positional blocks for the
// Friedman test, plus pooled mean ranks as a cross-check.
RankingResult rank_variants(const std::vector<TrainRecord>& records, std::size_t k);

} // namespace masklab
