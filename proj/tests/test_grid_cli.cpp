#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "masklab/grid.hpp"
#include "masklab/verify.hpp"

using namespace masklab;
namespace fs = std::filesystem;

namespace {

fs::path test_root() {
    static const fs::path root =
        fs::temp_directory_path() / ("masklab_gridcli_" + std::to_string(getpid()));
    fs::create_directories(root);
    return root;
}

std::string grid_config_text(const fs::path& out_dir, bool with_maskensemble,
                             std::size_t epochs = 2) {
    std::ostringstream s;
    s << R"({
  "dataset": {"kind": "gaussian_blobs", "n_samples": 200, "n_features": 8,
              "n_classes": 3, "seed": 11},
  "model": {"hidden_widths": [16], "dense_units": 24},
  "train": {"drop_rates": [0.0, 0.3, 0.6], "batch_size": 32, "epochs": )"
      << epochs << R"(,
            "learning_rate": 0.004, "seed": 19, "val_fraction": 0.2},
  "variants": [
    {"tag": "PerNodeDrop"},
    {"tag": "Dropout"})";
    if (with_maskensemble) s << R"(,
    {"tag": "MaskEnsemble", "mask_groups": 5})";
    s << R"(
  ],
  "out_dir": ")" << out_dir.string() << R"("
})";
    return s.str();
}

ExperimentConfig grid_config(const fs::path& out_dir, bool with_maskensemble,
                             std::size_t epochs = 2) {
    return parse_experiment_config(grid_config_text(out_dir, with_maskensemble, epochs),
                                   "test");
}

std::size_t count_logs(const fs::path& runs_dir) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(runs_dir))
        if (e.path().extension() == ".jsonl") ++n;
    return n;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    static int call = 0;
    const fs::path capture = test_root() / ("cli_out_" + std::to_string(call++) + ".txt");
    const std::string cmd = std::string(MASKLAB_CLI_PATH) + " " + args + " > " +
                            capture.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(capture);
        std::stringstream buf;
        buf << in.rdbuf();
        *output = buf.str();
    }
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path path = test_root() / name;
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

// --- run keys ----------------------------------------------------------------

TEST_CASE("run keys are stable, distinct and seed-sensitive") {
    ExperimentConfig cfg = grid_config(test_root() / "keys", false);
    const std::string k1 = run_key(cfg, cfg.variants[0], 0.3);
    CHECK(k1 == run_key(cfg, cfg.variants[0], 0.3));
    CHECK(k1.size() == 16);
    CHECK(k1 != run_key(cfg, cfg.variants[0], 0.6));
    CHECK(k1 != run_key(cfg, cfg.variants[1], 0.3));

    ExperimentConfig other = cfg;
    other.train.seed = 20;
    CHECK(k1 != run_key(other, cfg.variants[0], 0.3));

    ExperimentConfig deeper = cfg;
    deeper.hidden_widths = {16, 8};
    CHECK(k1 != run_key(deeper, cfg.variants[0], 0.3));
}

// --- the grid ----------------------------------------------------------------

TEST_CASE("grid executes the full sweep and is resumable per run") {
    const fs::path out = test_root() / "grid_resume";
    fs::remove_all(out);
    ExperimentConfig cfg = grid_config(out, false);

    GridSummary first = run_grid(cfg, 2);
    CHECK(first.executed == 6);
    CHECK(first.resumed == 0);
    CHECK(first.incompatible == 0);
    REQUIRE(first.runs.size() == 6);
    CHECK(count_logs(out / "runs") == 6);
    for (const RunStatusEntry& r : first.runs) {
        CHECK(r.status == "done");
        CHECK(r.n_records == 2);
    }

    std::vector<TrainRecord> records = read_run_logs(out / "runs");
    CHECK(records.size() == 12);
    std::set<std::string> variants;
    for (const TrainRecord& r : records) variants.insert(r.variant);
    CHECK(variants == std::set<std::string>{"Dropout", "PerNodeBernoulli"});

    GridSummary second = run_grid(cfg, 1);
    CHECK(second.executed == 0);
    CHECK(second.resumed == 6);

    // Deleting one log re-runs exactly that configuration.
    const std::string victim = first.runs[3].key;
    fs::remove(out / "runs" / (victim + ".jsonl"));
    GridSummary third = run_grid(cfg, 1);
    CHECK(third.executed == 1);
    CHECK(third.resumed == 5);
    CHECK(fs::exists(out / "runs" / (victim + ".jsonl")));
}

TEST_CASE("grid reruns produce identical logs regardless of job count") {
    const fs::path out_a = test_root() / "grid_det_a";
    const fs::path out_b = test_root() / "grid_det_b";
    fs::remove_all(out_a);
    fs::remove_all(out_b);

    run_grid(grid_config(out_a, false), 2);
    run_grid(grid_config(out_b, false), 1);

    std::vector<TrainRecord> a = read_run_logs(out_a / "runs");
    std::vector<TrainRecord> b = read_run_logs(out_b / "runs");
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].variant == b[i].variant);
        CHECK(a[i].drop_rate == b[i].drop_rate);
        CHECK(a[i].val_loss == b[i].val_loss);
        CHECK(a[i].train_loss_clean == b[i].train_loss_clean);
    }
}

TEST_CASE("incompatible variants are recorded and do not stop the grid") {
    const fs::path out = test_root() / "grid_incompat";
    fs::remove_all(out);
    ExperimentConfig cfg = grid_config(out, true);    // MaskEnsemble groups=5 vs width 16

    GridSummary summary = run_grid(cfg, 2);
    CHECK(summary.executed == 6);
    CHECK(summary.incompatible == 3);
    std::size_t seen = 0;
    for (const RunStatusEntry& r : summary.runs)
        if (r.status == "incompatible") {
            ++seen;
            CHECK(r.variant == "MaskEnsemble");
            CHECK(r.error.find("mask_groups 5") != std::string::npos);
            CHECK(r.error.find("16") != std::string::npos);
            CHECK(r.n_records == 0);
        }
    CHECK(seen == 3);

    // The manifest carries the same picture.
    std::ifstream in(out / "manifest.json");
    REQUIRE(in.good());
    nlohmann::json manifest = nlohmann::json::parse(in);
    CHECK(manifest.at("runs").size() == 9);
    std::size_t bad = 0;
    for (const auto& r : manifest.at("runs"))
        if (r.at("status") == "incompatible") {
            ++bad;
            CHECK(r.contains("error"));
        }
    CHECK(bad == 3);
}

TEST_CASE("read_run_logs requires the directory and reports bad lines") {
    CHECK_THROWS_AS(read_run_logs(test_root() / "no_such_dir"), ConfigError);

    const fs::path out = test_root() / "bad_logs";
    fs::create_directories(out);
    {
        std::ofstream f(out / "deadbeef.jsonl");
        f << "{ not json\n";
    }
    CHECK_THROWS_WITH_AS(read_run_logs(out), doctest::Contains("deadbeef"), ConfigError);
}

// --- verification suites ------------------------------------------------------

TEST_CASE("all verification suites pass") {
    const std::vector<VerifyCheck> checks = verify_suite("all");
    CHECK(checks.size() >= 20);
    for (const VerifyCheck& c : checks) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.passed);
    }
    CHECK(all_passed(checks));
}

TEST_CASE("the injected polarity fault trips exactly the bernoulli mean check") {
    const VerifyOptions flip{.flip_bernoulli_polarity = true};
    const std::vector<VerifyCheck> masks = verify_suite("masks", flip);
    CHECK_FALSE(all_passed(masks));
    for (const VerifyCheck& c : masks) {
        if (c.name == "masks/bernoulli-mean")
            CHECK_FALSE(c.passed);
        else
            CHECK(c.passed);
    }

    // The fault is scoped: every other suite stays green.
    for (const char* suite : {"gradients", "penalty", "stats"})
        CHECK(all_passed(verify_suite(suite, flip)));
}

TEST_CASE("unknown verify suites are a configuration error") {
    CHECK_THROWS_AS(verify_suite("spectral"), ConfigError);
}

// --- benchmark ---------------------------------------------------------------

TEST_CASE("bench times every variant at no fewer than five epochs") {
    ExperimentConfig cfg = grid_config(test_root() / "bench", true);
    std::vector<BenchRow> rows = run_bench(cfg);
    REQUIRE(rows.size() == 3);
    for (const BenchRow& row : rows) {
        if (row.variant == "MaskEnsemble") {
            CHECK_FALSE(row.error.empty());
            continue;
        }
        CHECK(row.error.empty());
        CHECK(row.epochs >= 5);
        CHECK(row.mean_seconds > 0.0);
    }
}

// --- the command-line tool ----------------------------------------------------

TEST_CASE("cli gen-data writes the csv pair") {
    const fs::path out = test_root() / "cli_gen";
    const fs::path cfg = write_config("gen.json", grid_config_text(out, false));

    std::string text;
    const int code = run_cli("gen-data --config " + cfg.string() + " --out " + out.string(),
                             &text);
    CHECK(code == 0);
    CHECK(fs::exists(out / "features.csv"));
    CHECK(fs::exists(out / "labels.csv"));
    CHECK(text.find("200 samples") != std::string::npos);

    Dataset data = read_dataset_csv(out / "features.csv", out / "labels.csv");
    CHECK(data.size() == 200);
    CHECK(data.feature_dim() == 8);
}

TEST_CASE("cli grid runs, resumes, and reports") {
    const fs::path out = test_root() / "cli_grid";
    fs::remove_all(out);
    const fs::path cfg =
        write_config("grid.json", grid_config_text(out, true, 5));

    std::string text;
    int code = run_cli("grid --config " + cfg.string() + " --jobs 2", &text);
    CHECK(code == 0);
    CHECK(text.find("6 executed, 0 resumed, 3 incompatible") != std::string::npos);
    CHECK(text.find("skipped MaskEnsemble") != std::string::npos);

    code = run_cli("grid --config " + cfg.string(), &text);
    CHECK(code == 0);
    CHECK(text.find("0 executed, 6 resumed") != std::string::npos);

    code = run_cli("report --config " + cfg.string(), &text);
    CHECK(code == 0);
    CHECK(fs::exists(out / "report" / "topk.csv"));
    CHECK(fs::exists(out / "report" / "rank_report.csv"));
    CHECK(fs::exists(out / "report" / "topk_bars.svg"));
    CHECK(fs::exists(out / "report" / "val_train_scatter.svg"));
}

TEST_CASE("cli report fails cleanly without usable records") {
    const fs::path out = test_root() / "cli_empty";
    fs::create_directories(out / "runs");
    const fs::path cfg = write_config("empty.json", grid_config_text(out, false));

    std::string text;
    const int code = run_cli("report --config " + cfg.string(), &text);
    CHECK(code == 1);
    CHECK(text.find("no usable records") != std::string::npos);
}

TEST_CASE("cli exit codes distinguish config errors from failures") {
    const fs::path bad = write_config("broken.json", "{ nope");
    CHECK(run_cli("grid --config " + bad.string()) == 2);
    CHECK(run_cli("grid --config " + (test_root() / "absent.json").string()) == 2);

    CHECK(run_cli("verify spectral") == 2);
    CHECK(run_cli("nonsense-command") == 2);
    CHECK(run_cli("grid") == 2);                  // missing required --config
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("cli verify mirrors the in-process suites") {
    std::string text;
    CHECK(run_cli("verify all", &text) == 0);
    CHECK(text.find("[FAIL]") == std::string::npos);
    CHECK(text.find("all checks passed") != std::string::npos);

    CHECK(run_cli("verify masks --flip-bernoulli-polarity", &text) == 1);
    CHECK(text.find("[FAIL] masks/bernoulli-mean") != std::string::npos);

    CHECK(run_cli("verify gradients --flip-bernoulli-polarity", &text) == 0);
}

TEST_CASE("cli bench prints a table and writes csv on request") {
    const fs::path out = test_root() / "cli_bench";
    const fs::path cfg = write_config("bench.json", grid_config_text(out, false));

    std::string text;
    const int code = run_cli("bench --config " + cfg.string() + " --out " + out.string(),
                             &text);
    CHECK(code == 0);
    CHECK(text.find("PerNodeBernoulli") != std::string::npos);
    CHECK(text.find("Dropout") != std::string::npos);

    std::ifstream csv(out / "bench.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "variant,mean_epoch_seconds,std_epoch_seconds,epochs");
    std::size_t rows = 0;
    for (std::string line; std::getline(csv, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}
