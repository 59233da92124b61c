#pragma once

#include <filesystem>

#include "masklab/ranking.hpp"

namespace masklab {

enum class ReportStatus { Ok, EmptyInput };

struct ReportOptions {
    std::size_t top_k = 3;      // rows per variant in topk.csv and the bar chart
    std::size_t rank_k = 5;     // records per variant entering the rank statistics
};

// Writes topk.csv, rank_report.csv and two standalone SVGs (top-k bar chart,
// val-vs-train scatter split at the median val loss) into out_dir. With no
// usable records the CSVs carry headers only, no SVGs are produced, and the
// status is EmptyInput.
ReportStatus emit_report(const std::vector<TrainRecord>& records,
                         const std::filesystem::path& out_dir,
                         const ReportOptions& opts = {});

// Round-trip reader for topk.csv; fields absent from the table
// (epoch_wall_seconds, diverged) come back zeroed.
std::vector<TrainRecord> read_topk_csv(const std::filesystem::path& path);

} // namespace masklab
