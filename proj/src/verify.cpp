#include "masklab/verify.hpp"

#include <cmath>
#include <sstream>

#include "masklab/error.hpp"
#include "masklab/layers.hpp"
#include "masklab/model.hpp"
#include "masklab/penalty.hpp"
#include "masklab/ranking.hpp"
#include "masklab/stats.hpp"

namespace masklab {

namespace {

struct Suite {
    std::string prefix;
    std::vector<VerifyCheck> checks;

    void add(const std::string& name, bool passed, const std::string& detail) {
        checks.push_back({prefix + "/" + name, passed, detail});
    }
    void near(const std::string& name, double got, double want, double tol) {
        std::ostringstream s;
        s << "got " << got << ", want " << want << " (tol " << tol << ")";
        add(name, std::fabs(got - want) <= tol, s.str());
    }
};

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(const Tensor& t) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sum += t[i];
        sum_sq += t[i] * t[i];
    }
    const double n = static_cast<double>(t.size());
    const double mean = sum / n;
    return {mean, (sum_sq - sum * sum / n) / (n - 1.0)};
}

std::vector<VerifyCheck> masks_suite(const VerifyOptions& opts) {
    Suite s{"masks", {}};
    const std::size_t n = 50000;

    auto draw = [&](const MaskSpec& spec, RngStream& stream) {
        Tensor m = sample_mask(spec, {n}, stream);
        if (opts.flip_bernoulli_polarity && spec.stir == Stir::Bernoulli)
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = 1.0 - m[i];
        return m;
    };

    {
        MaskSpec spec{.stir = Stir::Bernoulli, .drop_rate = 0.3};
        RngStream rng(2024, 1);
        const Moments m = moments(draw(spec, rng));
        s.near("bernoulli-mean", m.mean, 0.7, 0.01);
        s.near("bernoulli-variance", m.var, 0.21, 0.01);
    }
    {
        MaskSpec spec{.stir = Stir::Gaussian, .drop_rate = 0.5};
        RngStream rng(2024, 2);
        const Moments m = moments(draw(spec, rng));
        s.near("gaussian-mean", m.mean, 1.0, 0.02);
        s.near("gaussian-variance", m.var, 1.0, 0.04);
    }
    {
        MaskSpec spec{.stir = Stir::PartialGaussian, .drop_rate = 0.4,
                      .partial_threshold = 0.5};
        RngStream rng(2024, 3);
        const Moments m = moments(draw(spec, rng));
        s.near("partial-gaussian-mean", m.mean, 1.0, 0.02);
        s.near("partial-gaussian-variance", m.var, 0.5 * 0.4 / 0.6, 0.02);
    }
    {
        // Eval scaling: activations times E[m], no sampling anywhere.
        MaskSpec spec{.stir = Stir::Bernoulli, .drop_rate = 0.25};
        RngStream rng(7, 4);
        Tensor x = draw_normal(rng, 0.0, 1.0, {4, 6});
        Tensor w = draw_normal(rng, 0.0, 1.0, {6, 3});
        Tensor b = draw_normal(rng, 0.0, 1.0, {3});
        Tensor got = pernodedrop_forward(x, w, b, spec, RunMode::Eval, {}, nullptr);
        Tensor want = add_row_bias(mul(matmul(x, w), 0.75), b);
        double err = 0.0;
        for (std::size_t i = 0; i < got.size(); ++i)
            err = std::max(err, std::fabs(got[i] - want[i]));
        s.near("eval-expected-value-scaling", err, 0.0, 1e-12);
    }
    {
        // Per-sample masks differ across rows; a shared weight mask cannot.
        MaskSpec spec{.stir = Stir::Bernoulli, .drop_rate = 0.5};
        RngStream rng(11, 5);
        Tensor m = pernodedrop_sample_mask(spec, 8, 16, 4, nullptr, &rng);
        bool all_rows_equal = true;
        for (std::size_t r = 1; r < 8 && all_rows_equal; ++r)
            for (std::size_t c = 0; c < 16; ++c)
                if (m(r, c) != m(0, c)) {
                    all_rows_equal = false;
                    break;
                }
        s.add("per-sample-rows-differ", !all_rows_equal,
              all_rows_equal ? "every row drew the same mask" : "rows differ");

        RngStream rng2(11, 6);
        Tensor x = Tensor({8, 16}, 1.0);
        Tensor w = Tensor({16, 4}, 1.0);
        Tensor y = dropconnect_forward(x, w, Tensor({4}), spec, RunMode::Train, &rng2);
        bool shared = true;
        for (std::size_t r = 1; r < 8 && shared; ++r)
            for (std::size_t c = 0; c < 4; ++c)
                if (y(r, c) != y(0, c)) {
                    shared = false;
                    break;
                }
        s.add("dropconnect-batch-shared", shared,
              shared ? "one weight mask for the batch" : "rows disagree under a shared mask");
    }
    {
        MaskSpec spec{.stir = Stir::Bernoulli, .drop_rate = 0.4, .mode = MaskMode::Fixed,
                      .seed = 99};
        const std::vector<std::uint64_t> ids{3, 14, 15, 92};
        Tensor a = pernodedrop_sample_mask(spec, 4, 12, 5, &ids, nullptr);
        Tensor b = pernodedrop_sample_mask(spec, 4, 12, 5, &ids, nullptr);
        bool same = true;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != b[i]) same = false;
        s.add("fixed-mask-replay", same,
              same ? "regenerated masks identical" : "fixed masks failed to replay");
    }
    return s.checks;
}

std::vector<VerifyCheck> gradients_suite() {
    Suite s{"gradients", {}};

    auto fd_check = [&](const std::string& name, const RegularizerKind& reg) {
        ModelConfig cfg;
        cfg.input_dim = 5;
        cfg.hidden_widths = {};
        cfg.dense_units = 6;
        cfg.reg_position = 0;
        cfg.n_outputs = 3;
        cfg.regularizer = reg;
        RngStream init(31, 0);
        Model model = Model::init(cfg, init, 17);
        RngStream data_rng(32, 0);
        Tensor x = draw_normal(data_rng, 0.0, 1.0, {4, 5});
        Tensor targets({4, 3});
        for (std::size_t r = 0; r < 4; ++r) targets(r, r % 3) = 1.0;
        RngStream mask_rng(33, 0);
        const Tensor mask = model.sample_slot_mask(4, {}, &mask_rng);

        Model::Graph g = model.forward_with_slot_mask(x, mask);
        const Tape::NodeId loss = g.tape.cross_entropy(g.probs, targets, cfg.loss_kind());
        auto grads = g.tape.backward(loss);
        const Tensor& analytic = grads.at(g.weight_ids[0]);

        Model probe = model;
        Tensor fd = finite_diff_grad(
            [&](const Tensor& w) {
                probe.weights()[0] = w;
                Model::Graph h = probe.forward_with_slot_mask(x, mask);
                return cross_entropy_value(h.tape.value(h.probs), targets, cfg.loss_kind());
            },
            model.weights()[0]);
        double err = 0.0;
        for (std::size_t i = 0; i < fd.size(); ++i)
            err = std::max(err, std::fabs(fd[i] - analytic[i]));
        s.near(name, err, 0.0, 1e-6);
    };

    fd_check("pernodedrop-node-weight-grad",
             {.tag = RegularizerTag::PerNodeDrop,
              .spec = {.stir = Stir::Bernoulli, .drop_rate = 0.4}});
    fd_check("pernodedrop-connection-weight-grad",
             {.tag = RegularizerTag::PerNodeDrop,
              .spec = {.stir = Stir::Gaussian, .drop_rate = 0.3,
                       .granularity = Granularity::Connection}});
    fd_check("dropconnect-weight-grad",
             {.tag = RegularizerTag::DropConnect,
              .spec = {.stir = Stir::Bernoulli, .drop_rate = 0.5}});

    {
        // The mask enters as a constant: only genuine leaves get gradients.
        Tape t;
        Tape::NodeId x = t.input(Tensor({2, 3}, 1.0));
        Tape::NodeId w = t.input(Tensor({3, 2}, 0.5));
        Tape::NodeId y = t.masked_matmul(x, w, Tensor({2, 3}, 1.0));
        auto grads = t.backward(t.sum(y));
        s.add("mask-no-gradient", grads.size() == 2,
              "gradient map holds exactly the two declared leaves");
    }
    {
        Tape t;
        Tape::NodeId x = t.input(Tensor({3}, 0.0));
        auto grads = t.backward(t.sum(t.relu(x)));
        const Tensor& g = grads.at(x);
        bool zero = true;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g[i] != 0.0) zero = false;
        s.add("relu-zero-subgradient", zero, "d relu(0) = 0");
    }
    {
        // Clipped probabilities contribute no gradient.
        Tape t;
        Tensor p({1, 2});
        p(0, 0) = 0.0;
        p(0, 1) = 1.0;
        Tensor target({1, 2});
        target(0, 0) = 1.0;
        Tape::NodeId probs = t.input(p);
        auto grads = t.backward(t.cross_entropy(probs, target, LossKind::CategoricalCE));
        s.add("crossentropy-clip-zero-gradient", grads.at(probs)[0] == 0.0,
              "gradient at a clipped probability is zero");
    }
    return s.checks;
}

std::vector<VerifyCheck> penalty_suite() {
    Suite s{"penalty", {}};
    auto quadratic = [](const Tensor& w) {
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * w[i];
        return 0.5 * acc;
    };
    Tensor w({2});
    w[0] = 1.0;
    w[1] = 2.0;
    const Tensor h_ones({2}, 1.0);

    {
        MaskSpec spec{.stir = Stir::Bernoulli, .drop_rate = 0.5};
        RngStream rng(41, 0);
        const PenaltyEstimate est = mc_expected_loss_gap(quadratic, w, spec, 20000, rng);
        const double closed = closed_form_penalty(w, h_ones, spec);
        s.near("quadratic-bernoulli-closed-form", closed, 0.625, 1e-12);
        s.near("quadratic-bernoulli-mc", est.mc_gap, 0.625,
               std::max(3.0 * est.std_err, 1e-9));
    }
    {
        MaskSpec spec{.stir = Stir::Gaussian, .drop_rate = 0.5};
        RngStream rng(41, 1);
        const PenaltyEstimate est = mc_expected_loss_gap(quadratic, w, spec, 20000, rng);
        s.near("quadratic-gaussian-closed-form", closed_form_penalty(w, h_ones, spec), 2.5,
               1e-12);
        s.near("quadratic-gaussian-mc", est.mc_gap, 2.5, std::max(3.0 * est.std_err, 1e-9));
    }
    {
        MaskSpec spec{.stir = Stir::Bernoulli, .drop_rate = 0.0};
        RngStream rng(41, 2);
        const PenaltyEstimate est = mc_expected_loss_gap(quadratic, w, spec, 1000, rng);
        s.near("zero-rate-zero-gap", est.mc_gap, 0.0, 0.0);
    }
    {
        RngStream rng(41, 3);
        Tensor w3 = draw_normal(rng, 0.0, 1.0, {3});
        Tensor h({3, 3});
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i; j < 3; ++j) {
                h(i, j) = rng.next_normal(0.0, 1.0);
                h(j, i) = h(i, j);
            }
        MaskSpec spec{.stir = Stir::Bernoulli, .drop_rate = 0.3};
        Tensor cov({3, 3});
        Tensor h_diag({3});
        for (std::size_t i = 0; i < 3; ++i) {
            cov(i, i) = mask_variance(spec);
            h_diag[i] = h(i, i);
        }
        s.near("trace-reduces-to-diagonal", general_trace_penalty(w3, h, cov),
               closed_form_penalty(w3, h_diag, spec), 1e-12);
    }
    return s.checks;
}

std::vector<VerifyCheck> stats_suite() {
    Suite s{"stats", {}};
    {
        std::vector<std::vector<double>> blocks(5);
        for (std::size_t b = 0; b < 5; ++b)
            for (std::size_t j = 0; j < 8; ++j)
                blocks[b].push_back(static_cast<double>(j) + 0.1 * static_cast<double>(b));
        const RankReport rep = friedman_test(blocks);
        s.near("perfect-concordance-chi2", rep.friedman_chi2, 35.0, 1e-12);
        s.near("perfect-concordance-w", rep.kendall_w, 1.0, 1e-12);
    }
    // Reported statistic back-checked against W = chi2 / (n (k - 1)).
    s.near("reported-w-crosscheck", 34.600 / 35.0, 0.989, 5e-4);
    s.near("chi2-tail-7dof", chi_square_upper_tail(34.600, 7), 1.3296107948864438e-5,
           1.3296107948864438e-5 * 1e-8);
    {
        double err = 0.0;
        for (double a : {0.5, 1.5, 3.5, 5.0})
            for (double x : {0.2, 1.0, 4.0, 20.0})
                err = std::max(err, std::fabs(gamma_p(a, x) + gamma_q(a, x) - 1.0));
        s.near("gamma-p-q-identity", err, 0.0, 1e-12);
    }
    {
        bool monotone = true;
        double prev = 1.0;
        for (double x = 0.0; x <= 40.0; x += 0.5) {
            const double q = chi_square_upper_tail(x, 7);
            if (q > prev + 1e-12) monotone = false;
            prev = q;
        }
        s.add("tail-monotone-decreasing", monotone, "upper tail decreases in the statistic");
    }
    return s.checks;
}

} // namespace

std::vector<VerifyCheck> verify_suite(const std::string& suite, const VerifyOptions& opts) {
    if (suite == "masks") return masks_suite(opts);
    if (suite == "gradients") return gradients_suite();
    if (suite == "penalty") return penalty_suite();
    if (suite == "stats") return stats_suite();
    if (suite == "all") {
        std::vector<VerifyCheck> all;
        for (const char* name : {"masks", "gradients", "penalty", "stats"}) {
            auto part = verify_suite(name, opts);
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    throw ConfigError("unknown verify suite '" + suite +
                      "' (expected masks, gradients, penalty, stats or all)");
}

bool all_passed(const std::vector<VerifyCheck>& checks) {
    for (const VerifyCheck& c : checks)
        if (!c.passed) return false;
    return true;
}

} // namespace masklab
