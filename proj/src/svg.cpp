#include "deeprotor/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace deeprotor {

namespace {

std::string px(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

ChartLayout make_chart_layout(const std::vector<double>& x, const std::vector<ChartSeries>& series) {
    ChartLayout lay;
    lay.x_min = x.front();
    lay.x_max = x.back();
    if (lay.x_max == lay.x_min) {
        lay.x_min -= 1.0;
        lay.x_max += 1.0;
    }
    double lo = series.front().y.front();
    double hi = lo;
    for (const ChartSeries& s : series) {
        for (double v : s.y) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (lo == hi) {  // constant series: pad so the line sits mid-chart
        lo -= 1.0;
        hi += 1.0;
    }
    lay.y_min = lo;
    lay.y_max = hi;
    return lay;
}

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<double>& x,
                              const std::vector<ChartSeries>& series) {
    if (x.empty() || series.empty()) throw std::invalid_argument("chart: nothing to plot");
    for (const ChartSeries& s : series)
        if (s.y.size() != x.size()) throw std::invalid_argument("chart: series length mismatch");

    const ChartLayout lay = make_chart_layout(x, series);
    const double plot_x0 = lay.margin_left;
    const double plot_x1 = lay.width - lay.margin_right;
    const double plot_y0 = lay.margin_top;
    const double plot_y1 = lay.height - lay.margin_bottom;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << lay.width << "\" height=\""
        << lay.height << "\" viewBox=\"0 0 " << lay.width << " " << lay.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << px(lay.width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" << title << "</text>\n";

    // axes
    svg << "<line x1=\"" << px(plot_x0) << "\" y1=\"" << px(plot_y1) << "\" x2=\"" << px(plot_x1)
        << "\" y2=\"" << px(plot_y1) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << px(plot_x0) << "\" y1=\"" << px(plot_y0) << "\" x2=\"" << px(plot_x0)
        << "\" y2=\"" << px(plot_y1) << "\" stroke=\"black\"/>\n";

    const int n_ticks = 5;
    for (int i = 0; i < n_ticks; ++i) {
        const double f = static_cast<double>(i) / (n_ticks - 1);
        const double xv = lay.x_min + f * (lay.x_max - lay.x_min);
        const double yv = lay.y_min + f * (lay.y_max - lay.y_min);
        const double xp = lay.x_of(xv);
        const double yp = lay.y_of(yv);
        svg << "<line x1=\"" << px(xp) << "\" y1=\"" << px(plot_y1) << "\" x2=\"" << px(xp) << "\" y2=\""
            << px(plot_y1 + 5) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px(xp) << "\" y=\"" << px(plot_y1 + 20)
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << tick_label(xv)
            << "</text>\n";
        svg << "<line x1=\"" << px(plot_x0 - 5) << "\" y1=\"" << px(yp) << "\" x2=\"" << px(plot_x0)
            << "\" y2=\"" << px(yp) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px(plot_x0 - 8) << "\" y=\"" << px(yp + 4)
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << tick_label(yv)
            << "</text>\n";
    }
    svg << "<text x=\"" << px((plot_x0 + plot_x1) / 2) << "\" y=\"" << px(lay.height - 12)
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
        << "</text>\n";
    svg << "<text x=\"16\" y=\"" << px((plot_y0 + plot_y1) / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 16 "
        << px((plot_y0 + plot_y1) / 2) << ")\">" << y_label << "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        svg << "<polyline fill=\"none\" stroke=\"" << series[s].color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < x.size(); ++i) {
            if (i) svg << ' ';
            svg << px(lay.x_of(x[i])) << ',' << px(lay.y_of(series[s].y[i]));
        }
        svg << "\"/>\n";
        // legend swatch
        const double ly = plot_y0 + 16.0 * static_cast<double>(s);
        svg << "<line x1=\"" << px(plot_x1 - 150) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(plot_x1 - 126)
            << "\" y2=\"" << px(ly) << "\" stroke=\"" << series[s].color << "\" stroke-width=\"3\"/>\n";
        svg << "<text x=\"" << px(plot_x1 - 120) << "\" y=\"" << px(ly + 4)
            << "\" font-size=\"11\" font-family=\"sans-serif\">" << series[s].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::string> emit_plots(const std::string& metrics_csv_path, const std::string& out_dir) {
    const MetricsTable table = load_metrics_csv_file(metrics_csv_path);
    if (table.rows.empty()) throw std::runtime_error("metrics file has no rows to plot");
    std::filesystem::create_directories(out_dir);

    std::vector<double> x;
    x.reserve(table.rows.size());
    for (const MetricsRow& r : table.rows) x.push_back(static_cast<double>(r.episode));

    auto column = [&](auto getter) {
        std::vector<double> v;
        v.reserve(table.rows.size());
        for (const MetricsRow& r : table.rows) v.push_back(getter(r));
        return v;
    };

    std::vector<std::string> written;
    auto emit = [&](const std::string& file, const std::string& title, const std::string& y_label,
                    std::vector<ChartSeries> series) {
        const std::string path = (std::filesystem::path(out_dir) / file).string();
        write_file(path, render_line_chart(title, "episode", y_label, x, series));
        written.push_back(path);
    };

    emit("reward.svg", "Episode reward", "reward",
         {{"reward", "#9ecae1", column([](const MetricsRow& r) { return r.total_reward; })},
          {"moving avg", "#d62728", column([](const MetricsRow& r) { return r.moving_avg_reward; })}});
    emit("episode_length.svg", "Episode length", "steps",
         {{"steps", "#1f77b4", column([](const MetricsRow& r) { return static_cast<double>(r.steps); })}});
    emit("mean_roll.svg", "Mean roll angle", "degrees",
         {{"mean roll", "#2ca02c", column([](const MetricsRow& r) { return r.mean_roll; })}});
    emit("mean_pitch.svg", "Mean pitch angle", "degrees",
         {{"mean pitch", "#ff7f0e", column([](const MetricsRow& r) { return r.mean_pitch; })}});
    emit("mean_abs_yaw_rate.svg", "Mean |yaw rate|", "degrees/s",
         {{"mean |yaw rate|", "#9467bd", column([](const MetricsRow& r) { return r.mean_abs_yaw_rate; })}});
    return written;
}

}  // namespace deeprotor
