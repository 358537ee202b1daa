#include "deeprotor/metrics.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace deeprotor {

namespace {

std::string real6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
    std::ostringstream out;
    out << row.episode << ',' << row.steps << ',' << real6(row.total_reward) << ','
        << real6(row.moving_avg_reward) << ',' << row.terminal_reason << ',' << real6(row.epsilon) << ','
        << real6(row.mean_abs_yaw_rate) << ',' << real6(row.mean_roll) << ',' << real6(row.mean_pitch)
        << ',' << row.checkpoints_hit << ',' << row.cumulative_collisions;
    return out.str();
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(path), path_(path) {
    if (!out_) throw std::runtime_error("cannot open metrics file: " + path);
    out_ << kMetricsHeader << "\n";
    out_.flush();
    if (!out_) throw std::runtime_error("metrics write failed: " + path);
}

void MetricsWriter::write_row(const MetricsRow& row) {
    out_ << format_metrics_row(row) << "\n";
    out_.flush();
    if (!out_) throw std::runtime_error("metrics write failed: " + path_);
}

MetricsTable parse_metrics_csv(const std::string& text) {
    std::istringstream stream(text);
    std::string line;
    int lineno = 0;
    MetricsTable table;
    while (std::getline(stream, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != kMetricsHeader)
                throw std::runtime_error("metrics row 1: unexpected header");
            continue;
        }
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 11)
            throw std::runtime_error("metrics row " + std::to_string(lineno) + ": expected 11 columns, got " +
                                     std::to_string(f.size()));
        MetricsRow row;
        try {
            row.episode = std::stol(f[0]);
            row.steps = std::stoi(f[1]);
            row.total_reward = std::stod(f[2]);
            row.moving_avg_reward = std::stod(f[3]);
            row.terminal_reason = f[4];
            row.epsilon = std::stod(f[5]);
            row.mean_abs_yaw_rate = std::stod(f[6]);
            row.mean_roll = std::stod(f[7]);
            row.mean_pitch = std::stod(f[8]);
            row.checkpoints_hit = std::stoi(f[9]);
            row.cumulative_collisions = std::stol(f[10]);
        } catch (const std::exception&) {
            throw std::runtime_error("metrics row " + std::to_string(lineno) + ": malformed value");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

MetricsTable load_metrics_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metrics file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_metrics_csv(buf.str());
}

}  // namespace deeprotor
