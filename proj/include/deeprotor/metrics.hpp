#pragma once

#include <deque>
#include <fstream>
#include <string>
#include <vector>

namespace deeprotor {

inline constexpr const char* kMetricsHeader =
    "episode,steps,total_reward,moving_avg_reward,terminal_reason,epsilon,mean_abs_yaw_rate,"
    "mean_roll,mean_pitch,checkpoints_hit,cumulative_collisions";

struct MetricsRow {
    long episode = 0;
    int steps = 0;
    double total_reward = 0.0;
    double moving_avg_reward = 0.0;
    std::string terminal_reason;
    double epsilon = 0.0;
    double mean_abs_yaw_rate = 0.0;
    double mean_roll = 0.0;
    double mean_pitch = 0.0;
    int checkpoints_hit = 0;
    long cumulative_collisions = 0;
};

std::string format_metrics_row(const MetricsRow& row);

// Header on open, one flushed line per finished episode so a crash still
// leaves a usable log.
class MetricsWriter {
  public:
    explicit MetricsWriter(const std::string& path);
    void write_row(const MetricsRow& row);

  private:
    std::ofstream out_;
    std::string path_;
};

// Fixed-window mean; the mean is recomputed from the stored window on every
// query so a restored window reproduces identical values.
class MovingAverage {
  public:
    explicit MovingAverage(size_t window) : window_(window) {}

    void add(double v) {
        values_.push_back(v);
        if (values_.size() > window_) values_.pop_front();
    }
    double mean() const {
        if (values_.empty()) return 0.0;
        double sum = 0.0;
        for (double v : values_) sum += v;
        return sum / static_cast<double>(values_.size());
    }
    const std::deque<double>& values() const { return values_; }
    void restore(const std::vector<double>& values) {
        values_.assign(values.begin(), values.end());
        while (values_.size() > window_) values_.pop_front();
    }

  private:
    size_t window_;
    std::deque<double> values_;
};

// Parsed metrics table, used by the plot command and the tests.
struct MetricsTable {
    std::vector<MetricsRow> rows;
};

MetricsTable parse_metrics_csv(const std::string& text);
MetricsTable load_metrics_csv_file(const std::string& path);

}  // namespace deeprotor
