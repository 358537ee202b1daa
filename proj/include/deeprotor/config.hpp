#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deeprotor/env.hpp"
#include "deeprotor/network.hpp"
#include "deeprotor/replay.hpp"

namespace deeprotor {

enum class Algorithm { Dqn, DoubleDqn, TabularGrid };

std::string algorithm_name(Algorithm a);

// Every knob of a run, parsed from the line-oriented `key value` config
// format (same tokenization rules as arena files).  echo() emits a complete,
// deterministic dump that parses back to an equal config.
struct RunConfig {
    std::string arena_source = "builtin:corridor";  // path or builtin:<name>
    Algorithm algorithm = Algorithm::DoubleDqn;
    long episodes = 1000;
    uint64_t seed = 1;
    long checkpoint_interval = 0;  // episodes; 0 = only on exit
    int moving_avg_window = 50;

    CameraConfig camera;  // 84x84 by default, as rendered for the network
    ActionSpace actions;
    NoiseModel noise;
    RewardConfig reward;
    bool reward_primitive_preset = false;  // collision-only shaping
    enum class RewardModeChoice { Line, Checkpoint, Auto };
    RewardModeChoice reward_mode = RewardModeChoice::Auto;
    StepBudget budget;
    AttitudeCoeffs attitude;
    double dt = 0.1;
    double forward_speed = 2.0;
    bool heading_hold = true;
    double heading_hold_gain = 1.0;

    double gamma = 0.99;
    double step_size = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double huber_delta = 1.0;
    int batch_size = 32;
    int train_every = 4;
    int warmup = 1000;
    size_t buffer_capacity = 20000;
    EpsilonSchedule epsilon;

    std::vector<ConvSpec> convs = {{16, 8, 4}, {32, 4, 2}, {32, 3, 1}, {32, 3, 1}};
    std::vector<int> hidden = {256};

    double tabular_alpha = 0.1;
    double cell_size = 1.0;

    double blocks_spacing = 10.0;
    int blocks_count = 9;
    uint64_t arena_seed = 0;  // 0 = derive from master seed

    void validate() const;
    std::string echo() const;

    EnvConfig to_env_config(const Arena& arena) const;
    NetConfig to_net_config() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config_file(const std::string& path);

// Resolve "builtin:*" names or load an arena file.  episode_index feeds the
// random-zone curriculum of builtin:wobbles.
Arena resolve_arena(const RunConfig& cfg, long episode_index);
bool arena_changes_per_episode(const std::string& arena_source);

}  // namespace deeprotor
