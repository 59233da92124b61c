#include "masklab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "masklab/error.hpp"

namespace masklab {

namespace {

std::string fmt(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw ContractError("fmt: value does not fit");
    return {buf, ptr};
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError(where + ": bad number '" + s + "'");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    return out;
}

struct Extent {
    double lo = 0.0, hi = 1.0;
    void fit(double v) { lo = std::min(lo, v), hi = std::max(hi, v); }
    double at(double v, double a, double b) const {
        return hi == lo ? (a + b) / 2.0 : a + (v - lo) / (hi - lo) * (b - a);
    }
};

void svg_open(std::ostream& out, int w, int h) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
        << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
        << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

void svg_text(std::ostream& out, double x, double y, const std::string& s, int size = 11,
              const std::string& anchor = "start", const std::string& extra = "") {
    out << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
        << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"" << extra << ">"
        << s << "</text>\n";
}

void svg_line(std::ostream& out, double x1, double y1, double x2, double y2) {
    out << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
        << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
}

std::string short_num(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

void write_bar_chart(const std::filesystem::path& path,
                     const std::vector<TrainRecord>& topk, std::size_t k) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> losses;
    for (const TrainRecord& r : topk) {
        if (losses.find(r.variant) == losses.end()) order.push_back(r.variant);
        losses[r.variant].push_back(r.val_loss);
    }
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        return losses[a].front() < losses[b].front();
    });

    const double left = 60, top = 30, bottom = 80;
    const double group_w = std::max<double>(26.0 * static_cast<double>(k), 60.0);
    const int width = static_cast<int>(left + group_w * static_cast<double>(order.size()) + 20);
    const int height = 380;
    const double plot_h = height - top - bottom;
    double max_loss = 0.0;
    for (const auto& [v, ls] : losses)
        for (double l : ls) max_loss = std::max(max_loss, l);
    if (max_loss <= 0.0) max_loss = 1.0;
    max_loss *= 1.05;

    std::ofstream out = open_out(path);
    svg_open(out, width, height);
    svg_text(out, left, 18, "Lowest validation losses per variant (best first)", 13);
    svg_line(out, left, top, left, top + plot_h);
    svg_line(out, left, top + plot_h, width - 10, top + plot_h);
    for (int t = 0; t <= 4; ++t) {
        const double frac = static_cast<double>(t) / 4.0;
        const double y = top + plot_h * (1.0 - frac);
        svg_line(out, left - 4, y, left, y);
        svg_text(out, left - 8, y + 4, short_num(max_loss * frac), 10, "end");
    }
    const char* fills[] = {"#36648b", "#5b8db8", "#8fb8d8"};
    for (std::size_t g = 0; g < order.size(); ++g) {
        const std::vector<double>& ls = losses[order[g]];
        const double gx = left + group_w * static_cast<double>(g);
        const double bar_w = (group_w - 12.0) / static_cast<double>(k);
        for (std::size_t b = 0; b < ls.size(); ++b) {
            const double h = plot_h * ls[b] / max_loss;
            out << "<rect x=\"" << gx + 6.0 + bar_w * static_cast<double>(b) << "\" y=\""
                << top + plot_h - h << "\" width=\"" << bar_w - 2.0 << "\" height=\"" << h
                << "\" fill=\"" << fills[std::min<std::size_t>(b, 2)] << "\"/>\n";
        }
        const double cx = gx + group_w / 2.0;
        svg_text(out, cx, top + plot_h + 12, order[g], 10, "end",
                 " transform=\"rotate(-35 " + short_num(cx) + ' ' +
                     short_num(top + plot_h + 12) + ")\"");
    }
    out << "</svg>\n";
}

void write_scatter(const std::filesystem::path& path,
                   const std::vector<TrainRecord>& usable) {
    std::vector<double> vals;
    for (const TrainRecord& r : usable) vals.push_back(r.val_loss);
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    const double median = n % 2 == 1 ? vals[n / 2] : (vals[n / 2 - 1] + vals[n / 2]) / 2.0;

    const int width = 860, height = 400;
    const double panel_w = 360, panel_h = 290, top = 60;
    const double lefts[2] = {70, 70 + panel_w + 90};
    std::vector<const TrainRecord*> panels[2];
    for (const TrainRecord& r : usable)
        panels[r.val_loss <= median ? 0 : 1].push_back(&r);

    std::ofstream out = open_out(path);
    svg_open(out, width, height);
    svg_text(out, 70, 22, "Validation loss vs clean training loss, split at median val loss = " +
                              short_num(median), 13);
    const char* titles[2] = {"val loss &#8804; median", "val loss &gt; median"};
    for (int p = 0; p < 2; ++p) {
        const double lx = lefts[p];
        Extent ex, ey;
        bool first = true;
        for (const TrainRecord* r : panels[p]) {
            if (first) {
                ex.lo = ex.hi = r->val_loss;
                ey.lo = ey.hi = r->train_loss_clean;
                first = false;
            }
            ex.fit(r->val_loss);
            ey.fit(r->train_loss_clean);
        }
        svg_text(out, lx + panel_w / 2, top - 12, titles[p], 12, "middle");
        svg_line(out, lx, top, lx, top + panel_h);
        svg_line(out, lx, top + panel_h, lx + panel_w, top + panel_h);
        for (int t = 0; t <= 3; ++t) {
            const double frac = static_cast<double>(t) / 3.0;
            const double y = top + panel_h * (1.0 - frac);
            const double x = lx + panel_w * frac;
            svg_text(out, lx - 6, y + 4, short_num(ey.lo + (ey.hi - ey.lo) * frac), 9, "end");
            svg_text(out, x, top + panel_h + 14, short_num(ex.lo + (ex.hi - ex.lo) * frac), 9,
                     "middle");
        }
        for (const TrainRecord* r : panels[p]) {
            out << "<circle cx=\"" << ex.at(r->val_loss, lx + 4, lx + panel_w - 4) << "\" cy=\""
                << ey.at(r->train_loss_clean, top + panel_h - 4, top + 4)
                << "\" r=\"3\" fill=\"#36648b\" fill-opacity=\"0.7\"/>\n";
        }
        svg_text(out, lx + panel_w / 2, top + panel_h + 32, "validation loss", 11, "middle");
    }
    svg_text(out, 18, top + panel_h / 2, "clean training loss", 11, "middle",
             " transform=\"rotate(-90 18 " + short_num(top + panel_h / 2) + ")\"");
    out << "</svg>\n";
}

} // namespace

ReportStatus emit_report(const std::vector<TrainRecord>& records,
                         const std::filesystem::path& out_dir, const ReportOptions& opts) {
    std::filesystem::create_directories(out_dir);

    std::vector<TrainRecord> usable;
    for (const TrainRecord& r : records)
        if (!r.diverged && std::isfinite(r.val_loss) && std::isfinite(r.train_loss_clean))
            usable.push_back(r);
    const std::vector<TrainRecord> topk = select_top_k(usable, opts.top_k);

    {
        std::ofstream out = open_out(out_dir / "topk.csv");
        out << "variant,DR,Ep,V-Acc,V-Loss,T-Loss,T-Acc\n";
        for (const TrainRecord& r : topk)
            out << r.variant << ',' << fmt(r.drop_rate) << ',' << r.epoch << ','
                << fmt(r.val_acc) << ',' << fmt(r.val_loss) << ','
                << fmt(r.train_loss_clean) << ',' << fmt(r.train_acc_clean) << '\n';
    }
    {
        std::ofstream out = open_out(out_dir / "rank_report.csv");
        out << "variant,pooled_mean_rank,friedman_mean_rank,friedman_chi2,p_value,"
               "kendall_w,n_blocks,k_variants\n";
        bool have_ranks = false;
        RankingResult ranking;
        try {
            ranking = rank_variants(usable, opts.rank_k);
            have_ranks = true;
        } catch (const ContractError&) {
            // Fewer than two variants with rank_k records: table stays empty.
        }
        if (have_ranks) {
            const RankReport& rep = ranking.report;
            for (std::size_t j = 0; j < rep.variants.size(); ++j)
                out << rep.variants[j] << ',' << fmt(ranking.pooled_mean_ranks[j]) << ','
                    << fmt(rep.mean_ranks[j]) << ',' << fmt(rep.friedman_chi2) << ','
                    << fmt(rep.p_value) << ',' << fmt(rep.kendall_w) << ',' << rep.n_blocks
                    << ',' << rep.k_variants << '\n';
        }
    }

    if (usable.empty()) return ReportStatus::EmptyInput;
    write_bar_chart(out_dir / "topk_bars.svg", topk, opts.top_k);
    write_scatter(out_dir / "val_train_scatter.svg", usable);
    return ReportStatus::Ok;
}

std::vector<TrainRecord> read_topk_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "variant,DR,Ep,V-Acc,V-Loss,T-Loss,T-Acc")
        throw ConfigError(path.string() + ": unexpected topk header");
    std::vector<TrainRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        TrainRecord r;
        std::getline(row, r.variant, ',');
        std::getline(row, cell, ',');
        r.drop_rate = parse_double(cell, path.string());
        std::getline(row, cell, ',');
        r.epoch = static_cast<std::size_t>(std::stoull(cell));
        std::getline(row, cell, ',');
        r.val_acc = parse_double(cell, path.string());
        std::getline(row, cell, ',');
        r.val_loss = parse_double(cell, path.string());
        std::getline(row, cell, ',');
        r.train_loss_clean = parse_double(cell, path.string());
        if (!std::getline(row, cell, ','))
            throw ConfigError(path.string() + ": short row");
        r.train_acc_clean = parse_double(cell, path.string());
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace masklab
