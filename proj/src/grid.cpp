#include "masklab/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "masklab/error.hpp"

namespace masklab {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string canonical_run_string(const ExperimentConfig& cfg, const RegularizerKind& v,
                                 double drop_rate) {
    std::ostringstream s;
    s << "data=" << cfg.dataset.id() << "|widths=";
    for (std::size_t w : cfg.hidden_widths) s << w << ';';
    s << "|dense=" << cfg.dense_units
      << "|pos=" << cfg.reg_position.value_or(cfg.hidden_widths.size())
      << "|out=" << (cfg.output == OutputKind::Softmax ? "softmax" : "sigmoid")
      << "|variant=" << variant_label(v);
    if (v.tag == RegularizerTag::MaskEnsemble) s << "|groups=" << v.mask_groups;
    if (v.tag == RegularizerTag::PerNodeDrop &&
        v.spec.stir == Stir::PartialGaussian)
        s << "|thr=" << v.spec.partial_threshold;
    char rate[40];
    std::snprintf(rate, sizeof rate, "%.17g", drop_rate);
    s << "|p=" << rate << "|seed=" << cfg.train.seed << "|bs=" << cfg.train.batch_size
      << "|epochs=" << cfg.train.epochs << "|lr=" << cfg.train.learning_rate
      << "|val=" << cfg.val_fraction << "|patience=" << cfg.train.early_stop_patience;
    return s.str();
}

struct PlannedRun {
    RegularizerKind variant;
    double drop_rate = 0.0;
    std::string label;
    std::string key;
};

bool log_is_complete(const std::filesystem::path& file, std::size_t epochs) {
    std::ifstream in(file);
    if (!in) return false;
    std::string line, last;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        last = line;
        ++count;
    }
    if (count == 0) return false;
    if (count == epochs) return true;
    try {
        return train_record_from_jsonl(last).diverged;
    } catch (const json::exception&) {
        return false;
    }
}

void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg,
                    const std::vector<RunStatusEntry>& runs) {
    json j;
    j["dataset"] = cfg.dataset.id();
    j["runs"] = json::array();
    for (const RunStatusEntry& r : runs) {
        json e;
        e["key"] = r.key;
        e["variant"] = r.variant;
        e["drop_rate"] = r.drop_rate;
        e["status"] = r.status;
        e["n_records"] = r.n_records;
        if (!r.error.empty()) e["error"] = r.error;
        j["runs"].push_back(std::move(e));
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace

std::string run_key(const ExperimentConfig& cfg, const RegularizerKind& variant,
                    double drop_rate) {
    const std::uint64_t h = mix64(fnv1a(canonical_run_string(cfg, variant, drop_rate)));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

GridSummary run_grid(const ExperimentConfig& cfg, std::size_t jobs) {
    const Dataset data = load_dataset(cfg.dataset);
    const SplitDataset split = split_dataset(data, cfg.val_fraction, cfg.train.seed);
    const std::filesystem::path runs_dir = cfg.out_dir / "runs";
    std::filesystem::create_directories(runs_dir);

    std::vector<PlannedRun> plan;
    for (const RegularizerKind& v : cfg.variants)
        for (double p : cfg.train.drop_rates)
            plan.push_back({v, p, variant_label(v), run_key(cfg, v, p)});

    GridSummary summary;
    summary.runs.resize(plan.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        RunStatusEntry& st = summary.runs[i];
        st.key = plan[i].key;
        st.variant = plan[i].label;
        st.drop_rate = plan[i].drop_rate;
        const std::filesystem::path log = runs_dir / (plan[i].key + ".jsonl");
        if (log_is_complete(log, cfg.train.epochs)) {
            st.status = "done";
            std::ifstream in(log);
            std::string line;
            while (std::getline(in, line))
                if (!line.empty()) ++st.n_records;
            ++summary.resumed;
        } else {
            pending.push_back(i);
        }
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= pending.size()) return;
            const std::size_t i = pending[t];
            const PlannedRun& run = plan[i];
            RunStatusEntry& st = summary.runs[i];
            try {
                const ModelConfig mcfg = cfg.model_for(run.variant, run.drop_rate, data);
                TrainConfig tcfg = cfg.train;
                tcfg.seed = mix64(cfg.train.seed ^ fnv1a(run.key));
                const TrainOutcome outcome = train_model(mcfg, tcfg, split);
                const std::filesystem::path log = runs_dir / (run.key + ".jsonl");
                const std::filesystem::path tmp = runs_dir / (run.key + ".jsonl.tmp");
                {
                    std::ofstream out(tmp);
                    if (!out) throw ConfigError("cannot write run log " + tmp.string());
                    for (const TrainRecord& r : outcome.records) out << to_jsonl(r) << '\n';
                }
                std::filesystem::rename(tmp, log);
                std::lock_guard<std::mutex> lock(mu);
                st.status = "done";
                st.n_records = outcome.records.size();
                ++summary.executed;
            } catch (const ConfigError& e) {
                std::lock_guard<std::mutex> lock(mu);
                st.status = "incompatible";
                st.error = e.what();
                ++summary.incompatible;
            }
        }
    };
    const std::size_t width = std::max<std::size_t>(1, std::min(jobs, pending.size()));
    if (width <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < width; ++i) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }

    std::sort(summary.runs.begin(), summary.runs.end(),
              [](const RunStatusEntry& a, const RunStatusEntry& b) { return a.key < b.key; });
    write_manifest(cfg.out_dir / "manifest.json", cfg, summary.runs);
    return summary;
}

std::vector<TrainRecord> read_run_logs(const std::filesystem::path& runs_dir) {
    if (!std::filesystem::is_directory(runs_dir))
        throw ConfigError("missing run log directory " + runs_dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(runs_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<TrainRecord> records;
    for (const std::filesystem::path& file : files) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot open run log " + file.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                records.push_back(train_record_from_jsonl(line));
            } catch (const json::exception& e) {
                throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": " +
                                  e.what());
            }
        }
    }
    return records;
}

std::vector<BenchRow> run_bench(const ExperimentConfig& cfg) {
    const Dataset data = load_dataset(cfg.dataset);
    const SplitDataset split = split_dataset(data, cfg.val_fraction, cfg.train.seed);
    const double rate = cfg.train.drop_rates.front();
    std::vector<BenchRow> rows;
    for (const RegularizerKind& v : cfg.variants) {
        BenchRow row;
        row.variant = variant_label(v);
        try {
            const ModelConfig mcfg = cfg.model_for(v, rate, data);
            TrainConfig tcfg = cfg.train;
            tcfg.epochs = std::max<std::size_t>(5, cfg.train.epochs);
            tcfg.early_stop_patience = 0;
            tcfg.seed = mix64(cfg.train.seed ^ fnv1a(row.variant));
            const TrainOutcome outcome = train_model(mcfg, tcfg, split);
            double sum = 0.0, sum_sq = 0.0;
            for (const TrainRecord& r : outcome.records) {
                sum += r.epoch_wall_seconds;
                sum_sq += r.epoch_wall_seconds * r.epoch_wall_seconds;
            }
            const double n = static_cast<double>(outcome.records.size());
            row.epochs = outcome.records.size();
            row.mean_seconds = sum / n;
            if (outcome.records.size() > 1)
                row.std_seconds =
                    std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)));
        } catch (const ConfigError& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace masklab
