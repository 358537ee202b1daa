#pragma once

#include <map>
#include <optional>
#include <string>

#include "deeprotor/config.hpp"
#include "deeprotor/qlearn.hpp"

namespace deeprotor {

struct TrainingReport {
    long episodes_run = 0;
    long global_steps = 0;
    std::map<std::string, long> terminal_counts;
    double best_moving_avg = 0.0;
    bool has_best = false;
    double wall_seconds = 0.0;
};

// Run the configured training loop: per-episode metrics CSV, config echo,
// periodic checkpoints and a final one.  Fully deterministic in the config's
// master seed; resume_path continues an interrupted run exactly.
TrainingReport train_run(const RunConfig& cfg, const std::string& out_dir,
                         const std::string& resume_path = "");

// Greedy (epsilon = 0) rollouts of a saved model; writes metrics but never
// parameters.  The run configuration is recovered from the checkpoint and
// the arena/episodes/seed may be overridden.
TrainingReport eval_run(const std::string& model_path, const std::string& arena_override, long episodes,
                        const std::string& out_dir, std::optional<uint64_t> seed_override = {});

// Occupancy-grid discretization of an arena for the tabular learner: a cell
// is blocked when a vehicle-radius sphere at its center collides.
GridWorld rasterize_arena(const Arena& arena, double cell_size);

}  // namespace deeprotor
