#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "leadlag/csv.hpp"
#include "leadlag/pipeline.hpp"
#include "run_manifest.hpp"

namespace leadlag {

namespace fs = std::filesystem;

namespace {

// Minimal SVG canvas: enough for the bar/line/error-bar charts the report
// emits. Coordinates are in user units; no external viewer dependencies.
class Svg {
  public:
    Svg(double width, double height) : width_(width), height_(height) {}

    void rect(double x, double y, double w, double h, const std::string& fill) {
        body_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h << "\" fill=\""
              << fill << "\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
        body_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2 << "\" stroke=\""
              << stroke << "\" stroke-width=\"" << width << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 11, const std::string& anchor = "start") {
        body_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
              << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InputError("cannot open for writing: " + path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
            << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
    }

  private:
    double width_, height_;
    std::ostringstream body_;
};

struct DepthRow {
    int depth;
    std::string variant;
    double mean;
    double std_dev;
    int topic_count;
};

const char* kPalette[4] = {"#4878a8", "#c85450", "#6aa56a", "#9467bd"};

std::string shade(double fraction) {
    // warm (low) to cool (high)
    fraction = std::clamp(fraction, 0.0, 1.0);
    int r = static_cast<int>(215 + (69 - 215) * fraction);
    int g = static_cast<int>(48 + (117 - 48) * fraction);
    int b = static_cast<int>(39 + (180 - 39) * fraction);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

// Grouped bar chart of per-depth fractions with std error bars.
void render_depth_chart(const std::vector<DepthRow>& rows, const std::string& title, const std::string& path) {
    std::vector<int> depths;
    std::vector<std::string> variants;
    for (const auto& r : rows) {
        if (std::find(depths.begin(), depths.end(), r.depth) == depths.end()) depths.push_back(r.depth);
        if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) variants.push_back(r.variant);
    }
    std::sort(depths.begin(), depths.end());

    const double width = 760, height = 420, left = 70, right = 40, top = 50, bottom = 60;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    Svg svg(width, height);
    svg.text(width / 2, 24, title, 14, "middle");

    for (int tick = 0; tick <= 4; ++tick) {
        double frac = tick / 4.0;
        double y = top + plot_h * (1.0 - frac);
        svg.line(left, y, left + plot_w, y, "#dddddd");
        svg.text(left - 8, y + 4, format_double(frac), 10, "end");
    }
    svg.line(left, top, left, top + plot_h, "#333333");
    svg.line(left, top + plot_h, left + plot_w, top + plot_h, "#333333");
    svg.text(width / 2, height - 16, "taxonomy depth", 12, "middle");

    double group_w = plot_w / static_cast<double>(depths.size());
    double bar_w = group_w * 0.8 / static_cast<double>(variants.size());
    for (std::size_t di = 0; di < depths.size(); ++di) {
        double gx = left + group_w * static_cast<double>(di) + group_w * 0.1;
        svg.text(left + group_w * (static_cast<double>(di) + 0.5), top + plot_h + 18, std::to_string(depths[di]), 11,
                 "middle");
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            auto it = std::find_if(rows.begin(), rows.end(), [&](const DepthRow& r) {
                return r.depth == depths[di] && r.variant == variants[vi];
            });
            if (it == rows.end() || std::isnan(it->mean)) continue;
            double x = gx + bar_w * static_cast<double>(vi);
            double h = plot_h * std::clamp(it->mean, 0.0, 1.0);
            svg.rect(x, top + plot_h - h, bar_w * 0.9, h, kPalette[vi % 4]);
            if (it->std_dev > 0) {
                double cx = x + bar_w * 0.45;
                double y0 = top + plot_h - std::clamp(it->mean - it->std_dev, 0.0, 1.0) * plot_h;
                double y1 = top + plot_h - std::clamp(it->mean + it->std_dev, 0.0, 1.0) * plot_h;
                svg.line(cx, y0, cx, y1, "#333333");
                svg.line(cx - 3, y0, cx + 3, y0, "#333333");
                svg.line(cx - 3, y1, cx + 3, y1, "#333333");
            }
        }
    }
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        double x = left + 10 + 130 * static_cast<double>(vi);
        svg.rect(x, 32, 10, 10, kPalette[vi % 4]);
        svg.text(x + 16, 41, variants[vi], 11);
    }
    svg.save(path);
}

// Horizontal bar chart of per-root mean MCC lags, shaded by CCAUC fraction.
void render_root_chart(const CsvTable& table, const std::string& path) {
    int c_root = table.column("root_topic");
    int c_lag = table.column("mean_mcc_lag");
    int c_frac = table.column("ccauc_gt1_fraction");

    double max_abs = 1.0;
    for (const auto& row : table.rows) max_abs = std::max(max_abs, std::abs(std::stod(row[c_lag])));

    const double row_h = 26, left = 180, width = 760, plot_w = width - left - 60, top = 50;
    double height = top + row_h * static_cast<double>(table.rows.size()) + 50;
    Svg svg(width, height);
    svg.text(width / 2, 24, "mean MCC lag per root topic (shade: CCAUC>1 fraction)", 14, "middle");

    double zero_x = left + plot_w / 2;
    svg.line(zero_x, top - 8, zero_x, top + row_h * static_cast<double>(table.rows.size()), "#999999");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        double lag = std::stod(row[c_lag]);
        double frac = std::stod(row[c_frac]);
        double y = top + row_h * static_cast<double>(i);
        double len = plot_w / 2 * std::abs(lag) / max_abs;
        double x = lag >= 0 ? zero_x : zero_x - len;
        svg.rect(x, y + 4, std::max(len, 0.5), row_h - 10, shade(frac));
        svg.text(left - 8, y + row_h / 2 + 4, row[c_root], 11, "end");
        svg.text(lag >= 0 ? x + len + 6 : x - 6, y + row_h / 2 + 4, format_double(lag), 10,
                 lag >= 0 ? "start" : "end");
    }
    svg.text(zero_x, height - 18, "lag 0 (left: industry leads, right: science leads)", 11, "middle");
    svg.save(path);
}

} // namespace

void cmd_report(const RunConfig& config) {
    detail::StageTimer timer;
    fs::path dir(config.out_dir);
    std::string depth_path = (dir / "depth_summary.csv").string();
    std::string root_path = (dir / "root_summary.csv").string();

    CsvTable depth = read_csv(depth_path);
    if (depth.rows.empty()) throw InputError("no data rows in " + depth_path);
    CsvTable root = read_csv(root_path);
    if (root.rows.empty()) throw InputError("no data rows in " + root_path);

    int c_depth = depth.column("depth");
    int c_metric = depth.column("metric");
    int c_variant = depth.column("representation");
    int c_mean = depth.column("mean");
    int c_std = depth.column("std");
    int c_count = depth.column("topic_count");

    std::map<std::string, std::vector<DepthRow>> by_metric;
    for (const auto& row : depth.rows) {
        DepthRow r;
        r.depth = std::stoi(row[c_depth]);
        r.variant = row[c_variant];
        r.mean = row[c_mean] == "nan" ? std::nan("") : std::stod(row[c_mean]);
        r.std_dev = std::stod(row[c_std]);
        r.topic_count = std::stoi(row[c_count]);
        by_metric[row[c_metric]].push_back(r);
    }

    // Validate everything before writing anything, so a bad input leaves no
    // partial chart files behind.
    const std::map<std::string, std::pair<std::string, std::string>> charts = {
        {"ccauc_gt1_fraction", {"CCAUC ratios exceeding 1", "fig_depth_ccauc.svg"}},
        {"granger_sig_fraction", {"Granger p-values below 0.05", "fig_depth_granger.svg"}},
        {"tr_gt1_fraction", {"triangular ratios exceeding 1", "fig_depth_tr.svg"}},
    };

    std::vector<std::string> outputs;
    for (const auto& [metric, chart] : charts) {
        auto it = by_metric.find(metric);
        if (it == by_metric.end()) continue;
        std::string path = (dir / chart.second).string();
        render_depth_chart(it->second, chart.first, path);
        outputs.push_back(path);
    }
    std::string root_chart = (dir / "fig_root_mcc.svg").string();
    render_root_chart(root, root_chart);
    outputs.push_back(root_chart);
    timer.mark("render");

    nlohmann::ordered_json counts;
    counts["charts"] = outputs.size();
    counts["depth_rows"] = depth.rows.size();
    counts["root_rows"] = root.rows.size();
    detail::write_manifest(config, "report", counts, timer.timings, outputs);
}

} // namespace leadlag
