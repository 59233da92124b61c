#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "masklab/config.hpp"
#include "masklab/error.hpp"
#include "masklab/grid.hpp"
#include "masklab/report.hpp"
#include "masklab/verify.hpp"

namespace {

namespace fs = std::filesystem;
using namespace masklab;

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;

int cmd_gen_data(const std::string& config_path, const std::string& out,
                 bool seed_set, std::uint64_t seed) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!cfg.dataset.synthetic)
        throw ConfigError("gen-data needs a synthetic dataset section, not a csv source");
    if (seed_set) cfg.dataset.synthetic->seed = seed;
    const Dataset data = load_dataset(cfg.dataset);
    const fs::path dir = out.empty() ? cfg.out_dir : fs::path(out);
    fs::create_directories(dir);
    write_dataset_csv(data, dir / "features.csv", dir / "labels.csv");
    std::cout << "wrote " << (dir / "features.csv").string() << " and "
              << (dir / "labels.csv").string() << " (" << data.size() << " samples, "
              << data.feature_dim() << " features, " << data.n_classes() << " classes)\n";
    return kExitOk;
}

int cmd_grid(const std::string& config_path, const std::string& out, bool seed_set,
             std::uint64_t seed, std::size_t jobs) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!out.empty()) cfg.out_dir = out;
    if (seed_set) cfg.train.seed = seed;
    const GridSummary summary = run_grid(cfg, jobs);
    std::cout << "grid: " << summary.executed << " executed, " << summary.resumed
              << " resumed, " << summary.incompatible << " incompatible\n";
    for (const RunStatusEntry& r : summary.runs)
        if (r.status == "incompatible")
            std::cout << "  skipped " << r.variant << " p=" << r.drop_rate << ": " << r.error
                      << '\n';
    std::cout << "logs in " << (cfg.out_dir / "runs").string() << ", manifest "
              << (cfg.out_dir / "manifest.json").string() << '\n';
    return kExitOk;
}

int cmd_verify(const std::string& suite, bool flip) {
    const VerifyOptions opts{.flip_bernoulli_polarity = flip};
    const std::vector<VerifyCheck> checks = verify_suite(suite, opts);
    for (const VerifyCheck& c : checks)
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name
                  << (c.passed ? "" : "  " + c.detail) << '\n';
    const bool ok = all_passed(checks);
    std::cout << (ok ? "verify: all checks passed\n" : "verify: FAILURES above\n");
    return ok ? kExitOk : kExitInvariant;
}

int cmd_report(const std::string& config_path, const std::string& out, std::size_t k) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const std::vector<TrainRecord> records = read_run_logs(cfg.out_dir / "runs");
    const fs::path dir = out.empty() ? cfg.out_dir / "report" : fs::path(out);
    const ReportStatus status = emit_report(records, dir, {.top_k = k});
    if (status == ReportStatus::EmptyInput) {
        std::cerr << "report: no usable records in " << (cfg.out_dir / "runs").string()
                  << "\n";
        return kExitInvariant;
    }
    std::cout << "report written to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_bench(const std::string& config_path, const std::string& out) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const std::vector<BenchRow> rows = run_bench(cfg);
    std::printf("%-28s %14s %14s %8s\n", "variant", "mean epoch (s)", "std dev (s)",
                "epochs");
    for (const BenchRow& r : rows) {
        if (r.error.empty())
            std::printf("%-28s %14.4f %14.4f %8zu\n", r.variant.c_str(), r.mean_seconds,
                        r.std_seconds, r.epochs);
        else
            std::printf("%-28s  skipped: %s\n", r.variant.c_str(), r.error.c_str());
    }
    if (!out.empty()) {
        fs::create_directories(fs::path(out));
        std::ofstream csv(fs::path(out) / "bench.csv");
        if (!csv) throw ConfigError("cannot write bench.csv under " + out);
        csv << "variant,mean_epoch_seconds,std_epoch_seconds,epochs\n";
        for (const BenchRow& r : rows)
            if (r.error.empty())
                csv << r.variant << ',' << r.mean_seconds << ',' << r.std_seconds << ','
                    << r.epochs << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic-mask regularization laboratory"};
    app.require_subcommand(1);

    std::string config_path, out, suite = "all";
    std::uint64_t seed = 0;
    std::size_t jobs = 1, k = 3;
    bool flip = false;

    CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset as CSV");
    gen->add_option("--config", config_path, "Experiment config file")->required();
    gen->add_option("--out", out, "Output directory (default: config out_dir)");
    CLI::Option* gen_seed = gen->add_option("--seed", seed, "Override the dataset seed");

    CLI::App* grid = app.add_subcommand("grid", "Run the variants x drop-rates grid");
    grid->add_option("--config", config_path, "Experiment config file")->required();
    grid->add_option("--out", out, "Override the config's out_dir");
    CLI::Option* grid_seed = grid->add_option("--seed", seed, "Override the training seed");
    grid->add_option("--jobs", jobs, "Worker pool width")->check(CLI::PositiveNumber);

    CLI::App* verify = app.add_subcommand("verify", "Run a named invariant suite");
    verify->add_option("suite", suite, "masks | gradients | penalty | stats | all");
    verify->add_flag("--flip-bernoulli-polarity", flip)->group("");

    CLI::App* report = app.add_subcommand("report", "Emit CSV and SVG summaries from run logs");
    report->add_option("--config", config_path, "Experiment config file")->required();
    report->add_option("--out", out, "Report directory (default: out_dir/report)");
    report->add_option("--k", k, "Records per variant in topk outputs")
        ->check(CLI::PositiveNumber);

    CLI::App* bench = app.add_subcommand("bench", "Time epochs per variant");
    bench->add_option("--config", config_path, "Experiment config file")->required();
    bench->add_option("--out", out, "Also write bench.csv to this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(config_path, out, !gen_seed->empty(), seed);
        if (grid->parsed())
            return cmd_grid(config_path, out, !grid_seed->empty(), seed, jobs);
        if (verify->parsed()) return cmd_verify(suite, flip);
        if (report->parsed()) return cmd_report(config_path, out, k);
        if (bench->parsed()) return cmd_bench(config_path, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvariant;
    }
    return kExitConfig;
}
