#pragma once

#include <string>
#include <vector>

#include "deeprotor/metrics.hpp"

namespace deeprotor {

// Pixel mapping shared by the chart writer and the tests that re-derive
// vertex positions.
struct ChartLayout {
    double width = 800.0;
    double height = 480.0;
    double margin_left = 64.0;
    double margin_right = 24.0;
    double margin_top = 40.0;
    double margin_bottom = 56.0;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;

    double x_of(double v) const {
        return margin_left + (v - x_min) / (x_max - x_min) * (width - margin_left - margin_right);
    }
    double y_of(double v) const {
        return height - margin_bottom -
               (v - y_min) / (y_max - y_min) * (height - margin_top - margin_bottom);
    }
};

struct ChartSeries {
    std::string label;
    std::string color;
    std::vector<double> y;  // one vertex per x position
};

// Domain derivation: x spans the given values, y spans all series values
// padded by +-1 when the series is constant.
ChartLayout make_chart_layout(const std::vector<double>& x, const std::vector<ChartSeries>& series);

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<double>& x,
                              const std::vector<ChartSeries>& series);

// Write the standard chart suite for a metrics CSV: reward (raw + moving
// average), episode length, mean roll, mean pitch, mean |yaw rate|.
// Returns the written file paths.
std::vector<std::string> emit_plots(const std::string& metrics_csv_path, const std::string& out_dir);

}  // namespace deeprotor
