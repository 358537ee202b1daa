#include "deeprotor/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace deeprotor {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

struct Line {
    int number;
    std::vector<std::string> tok;
};

double num(const Line& l, size_t i) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(l.tok[i], &pos);
    } catch (const std::exception&) {
        fail(l.number, "invalid number '" + l.tok[i] + "'");
    }
    if (pos != l.tok[i].size()) fail(l.number, "invalid number '" + l.tok[i] + "'");
    return v;
}

long inum(const Line& l, size_t i) { return static_cast<long>(num(l, i)); }

bool bnum(const Line& l, size_t i) {
    const std::string& t = l.tok[i];
    if (t == "1" || t == "true") return true;
    if (t == "0" || t == "false") return false;
    fail(l.number, "expected boolean 0/1, got '" + t + "'");
}

void apply_primitive_preset(RunConfig& cfg) {
    // Collision-avoidance-only shaping: no goal attraction, no line term.
    cfg.reward.w_progress = 0.0;
    cfg.reward.w_deviation = 0.0;
    cfg.reward.w_yaw = 0.0;
    cfg.reward.r_goal = 0.0;
    cfg.reward.r_checkpoint = 0.0;
}

}  // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Dqn: return "dqn";
        case Algorithm::DoubleDqn: return "ddqn";
        case Algorithm::TabularGrid: return "tabular-grid";
    }
    return "dqn";
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    bool convs_cleared = false, hidden_cleared = false;

    std::istringstream stream(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        Line l{lineno, {}};
        for (std::string t; ls >> t;) l.tok.push_back(t);
        if (l.tok.empty()) continue;
        const std::string& key = l.tok[0];
        const size_t nargs = l.tok.size() - 1;
        auto want = [&](size_t n) {
            if (nargs != n) fail(lineno, "'" + key + "' expects " + std::to_string(n) + " arguments");
        };

        if (key == "arena") {
            want(1);
            cfg.arena_source = l.tok[1];
        } else if (key == "algorithm") {
            want(1);
            if (l.tok[1] == "dqn") cfg.algorithm = Algorithm::Dqn;
            else if (l.tok[1] == "ddqn") cfg.algorithm = Algorithm::DoubleDqn;
            else if (l.tok[1] == "tabular-grid") cfg.algorithm = Algorithm::TabularGrid;
            else fail(lineno, "unknown algorithm '" + l.tok[1] + "'");
        } else if (key == "episodes") {
            want(1);
            cfg.episodes = inum(l, 1);
        } else if (key == "seed") {
            want(1);
            cfg.seed = static_cast<uint64_t>(inum(l, 1));
        } else if (key == "checkpoint_interval") {
            want(1);
            cfg.checkpoint_interval = inum(l, 1);
        } else if (key == "moving_avg_window") {
            want(1);
            cfg.moving_avg_window = static_cast<int>(inum(l, 1));
        } else if (key == "obs_width") {
            want(1);
            cfg.camera.width = static_cast<int>(inum(l, 1));
        } else if (key == "obs_height") {
            want(1);
            cfg.camera.height = static_cast<int>(inum(l, 1));
        } else if (key == "hfov_deg") {
            want(1);
            cfg.camera.hfov_deg = num(l, 1);
        } else if (key == "max_range") {
            want(1);
            cfg.camera.max_range = num(l, 1);
        } else if (key == "mount_height") {
            want(1);
            cfg.camera.mount_height = num(l, 1);
        } else if (key == "action_mode") {
            want(1);
            if (l.tok[1] == "yaw") cfg.actions.mode = ActionSpace::Mode::YawRate;
            else if (l.tok[1] == "roll") cfg.actions.mode = ActionSpace::Mode::LateralRoll;
            else fail(lineno, "unknown action_mode '" + l.tok[1] + "'");
        } else if (key == "yaw_rates") {
            if (nargs < 1) fail(lineno, "yaw_rates expects at least one value");
            cfg.actions.yaw_rates_dps.clear();
            for (size_t i = 1; i < l.tok.size(); ++i) cfg.actions.yaw_rates_dps.push_back(num(l, i));
        } else if (key == "roll_angles") {
            if (nargs < 1) fail(lineno, "roll_angles expects at least one value");
            cfg.actions.roll_angles_deg.clear();
            for (size_t i = 1; i < l.tok.size(); ++i) cfg.actions.roll_angles_deg.push_back(num(l, i));
        } else if (key == "forward_speed") {
            want(1);
            cfg.forward_speed = num(l, 1);
        } else if (key == "dt") {
            want(1);
            cfg.dt = num(l, 1);
        } else if (key == "yaw_rate_sigma") {
            want(1);
            cfg.noise.yaw_rate_sigma_dps = num(l, 1);
        } else if (key == "speed_sigma") {
            want(1);
            cfg.noise.speed_sigma = num(l, 1);
        } else if (key == "heading_drift_rate") {
            want(1);
            cfg.noise.heading_drift_rate_dps = num(l, 1);
        } else if (key == "heading_hold") {
            want(1);
            cfg.heading_hold = bnum(l, 1);
        } else if (key == "heading_hold_gain") {
            want(1);
            cfg.heading_hold_gain = num(l, 1);
        } else if (key == "k_roll") {
            want(1);
            cfg.attitude.k_roll = num(l, 1);
        } else if (key == "k_pitch") {
            want(1);
            cfg.attitude.k_pitch = num(l, 1);
        } else if (key == "roll_clamp") {
            want(1);
            cfg.attitude.roll_clamp_deg = num(l, 1);
        } else if (key == "lateral_gain") {
            want(1);
            cfg.attitude.lateral_gain = num(l, 1);
        } else if (key == "reward_mode") {
            want(1);
            if (l.tok[1] == "line") cfg.reward_mode = RunConfig::RewardModeChoice::Line;
            else if (l.tok[1] == "checkpoint") cfg.reward_mode = RunConfig::RewardModeChoice::Checkpoint;
            else if (l.tok[1] == "auto") cfg.reward_mode = RunConfig::RewardModeChoice::Auto;
            else fail(lineno, "unknown reward_mode '" + l.tok[1] + "'");
        } else if (key == "reward_preset") {
            want(1);
            if (l.tok[1] == "primitive") {
                cfg.reward_primitive_preset = true;
                apply_primitive_preset(cfg);
            } else if (l.tok[1] == "default") {
                cfg.reward_primitive_preset = false;
            } else {
                fail(lineno, "unknown reward_preset '" + l.tok[1] + "'");
            }
        } else if (key == "w_progress") {
            want(1);
            cfg.reward.w_progress = num(l, 1);
        } else if (key == "w_deviation") {
            want(1);
            cfg.reward.w_deviation = num(l, 1);
        } else if (key == "w_yaw") {
            want(1);
            cfg.reward.w_yaw = num(l, 1);
        } else if (key == "r_goal") {
            want(1);
            cfg.reward.r_goal = num(l, 1);
        } else if (key == "r_collision") {
            want(1);
            cfg.reward.r_collision = num(l, 1);
        } else if (key == "r_checkpoint") {
            want(1);
            cfg.reward.r_checkpoint = num(l, 1);
        } else if (key == "deviation_limit") {
            want(1);
            cfg.reward.deviation_limit = num(l, 1);
        } else if (key == "away_limit") {
            want(1);
            cfg.reward.away_limit = num(l, 1);
        } else if (key == "base_steps") {
            want(1);
            cfg.budget.base_steps = static_cast<int>(inum(l, 1));
        } else if (key == "steps_per_episode") {
            want(1);
            cfg.budget.steps_per_episode = static_cast<int>(inum(l, 1));
        } else if (key == "step_cap") {
            want(1);
            cfg.budget.cap = static_cast<int>(inum(l, 1));
        } else if (key == "gamma") {
            want(1);
            cfg.gamma = num(l, 1);
        } else if (key == "step_size") {
            want(1);
            cfg.step_size = num(l, 1);
        } else if (key == "adam_beta1") {
            want(1);
            cfg.adam_beta1 = num(l, 1);
        } else if (key == "adam_beta2") {
            want(1);
            cfg.adam_beta2 = num(l, 1);
        } else if (key == "adam_epsilon") {
            want(1);
            cfg.adam_epsilon = num(l, 1);
        } else if (key == "huber_delta") {
            want(1);
            cfg.huber_delta = num(l, 1);
        } else if (key == "batch_size") {
            want(1);
            cfg.batch_size = static_cast<int>(inum(l, 1));
        } else if (key == "train_every") {
            want(1);
            cfg.train_every = static_cast<int>(inum(l, 1));
        } else if (key == "warmup") {
            want(1);
            cfg.warmup = static_cast<int>(inum(l, 1));
        } else if (key == "buffer_capacity") {
            want(1);
            cfg.buffer_capacity = static_cast<size_t>(inum(l, 1));
        } else if (key == "eps_start") {
            want(1);
            cfg.epsilon.eps_start = num(l, 1);
        } else if (key == "eps_end") {
            want(1);
            cfg.epsilon.eps_end = num(l, 1);
        } else if (key == "eps_decay_steps") {
            want(1);
            cfg.epsilon.decay_steps = inum(l, 1);
        } else if (key == "conv") {
            if (!convs_cleared) {
                cfg.convs.clear();
                convs_cleared = true;
            }
            if (nargs == 1 && l.tok[1] == "none") continue;
            want(3);
            cfg.convs.push_back({static_cast<int>(inum(l, 1)), static_cast<int>(inum(l, 2)),
                                 static_cast<int>(inum(l, 3))});
        } else if (key == "dense") {
            if (!hidden_cleared) {
                cfg.hidden.clear();
                hidden_cleared = true;
            }
            if (nargs == 1 && l.tok[1] == "none") continue;
            want(1);
            cfg.hidden.push_back(static_cast<int>(inum(l, 1)));
        } else if (key == "alpha") {
            want(1);
            cfg.tabular_alpha = num(l, 1);
        } else if (key == "cell_size") {
            want(1);
            cfg.cell_size = num(l, 1);
        } else if (key == "blocks_spacing") {
            want(1);
            cfg.blocks_spacing = num(l, 1);
        } else if (key == "blocks_count") {
            want(1);
            cfg.blocks_count = static_cast<int>(inum(l, 1));
        } else if (key == "arena_seed") {
            want(1);
            cfg.arena_seed = static_cast<uint64_t>(inum(l, 1));
        } else {
            fail(lineno, "unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_run_config(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void RunConfig::validate() const {
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) throw std::runtime_error("config: " + msg);
    };
    check(episodes >= 0, "episodes must be >= 0");
    check(checkpoint_interval >= 0, "checkpoint_interval must be >= 0");
    check(moving_avg_window >= 1, "moving_avg_window must be >= 1");
    check(camera.width >= 2 && camera.height >= 2, "observation must be at least 2x2");
    check(camera.hfov_deg > 0.0 && camera.hfov_deg < 180.0, "hfov_deg must be in (0, 180)");
    check(camera.max_range > 0.0, "max_range must be > 0");
    check(!actions.yaw_rates_dps.empty(), "yaw_rates must not be empty");
    check(actions.roll_angles_deg.size() == 3, "roll_angles must list exactly 3 values");
    check(forward_speed >= 0.0, "forward_speed must be >= 0");
    check(dt > 0.0, "dt must be > 0");
    check(noise.yaw_rate_sigma_dps >= 0.0 && noise.speed_sigma >= 0.0 &&
              noise.heading_drift_rate_dps >= 0.0,
          "noise sigmas must be >= 0");
    check(heading_hold_gain > 0.0, "heading_hold_gain must be > 0");
    check(reward.w_progress >= 0.0 && reward.w_deviation >= 0.0 && reward.w_yaw >= 0.0 &&
              reward.r_goal >= 0.0 && reward.r_collision >= 0.0 && reward.r_checkpoint >= 0.0,
          "reward weights must be >= 0");
    check(reward.deviation_limit > 0.0, "deviation_limit must be > 0");
    check(reward.away_limit >= 0.0, "away_limit must be >= 0 (0 = auto)");
    check(budget.base_steps >= 1, "base_steps must be >= 1");
    check(budget.steps_per_episode >= 0, "steps_per_episode must be >= 0");
    check(budget.cap >= budget.base_steps, "step_cap must be >= base_steps");
    check(gamma >= 0.0 && gamma < 1.0, "gamma must be in [0, 1)");
    check(step_size > 0.0, "step_size must be > 0");
    check(huber_delta > 0.0, "huber_delta must be > 0");
    check(batch_size >= 1, "batch_size must be >= 1");
    check(train_every >= 1, "train_every must be >= 1");
    check(warmup >= batch_size, "warmup must be >= batch_size");
    check(buffer_capacity >= static_cast<size_t>(batch_size), "buffer_capacity must cover a batch");
    check(epsilon.eps_start >= 0.0 && epsilon.eps_start <= 1.0 && epsilon.eps_end >= 0.0 &&
              epsilon.eps_end <= 1.0,
          "epsilon bounds must be in [0, 1]");
    check(epsilon.eps_start >= epsilon.eps_end, "eps_start must be >= eps_end");
    check(epsilon.decay_steps >= 0, "eps_decay_steps must be >= 0");
    check(tabular_alpha > 0.0 && tabular_alpha <= 1.0, "alpha must be in (0, 1]");
    check(cell_size > 0.0, "cell_size must be > 0");
    check(actions.size() >= 1, "action space must be non-empty");
}

std::string RunConfig::echo() const {
    std::ostringstream out;
    out << "arena " << arena_source << "\n";
    out << "algorithm " << algorithm_name(algorithm) << "\n";
    out << "episodes " << episodes << "\n";
    out << "seed " << seed << "\n";
    out << "checkpoint_interval " << checkpoint_interval << "\n";
    out << "moving_avg_window " << moving_avg_window << "\n";
    out << "obs_width " << camera.width << "\n";
    out << "obs_height " << camera.height << "\n";
    out << "hfov_deg " << fmt(camera.hfov_deg) << "\n";
    out << "max_range " << fmt(camera.max_range) << "\n";
    out << "mount_height " << fmt(camera.mount_height) << "\n";
    out << "action_mode " << (actions.mode == ActionSpace::Mode::YawRate ? "yaw" : "roll") << "\n";
    out << "yaw_rates";
    for (double r : actions.yaw_rates_dps) out << " " << fmt(r);
    out << "\n";
    out << "roll_angles";
    for (double r : actions.roll_angles_deg) out << " " << fmt(r);
    out << "\n";
    out << "forward_speed " << fmt(forward_speed) << "\n";
    out << "dt " << fmt(dt) << "\n";
    out << "yaw_rate_sigma " << fmt(noise.yaw_rate_sigma_dps) << "\n";
    out << "speed_sigma " << fmt(noise.speed_sigma) << "\n";
    out << "heading_drift_rate " << fmt(noise.heading_drift_rate_dps) << "\n";
    out << "heading_hold " << (heading_hold ? 1 : 0) << "\n";
    out << "heading_hold_gain " << fmt(heading_hold_gain) << "\n";
    out << "k_roll " << fmt(attitude.k_roll) << "\n";
    out << "k_pitch " << fmt(attitude.k_pitch) << "\n";
    out << "roll_clamp " << fmt(attitude.roll_clamp_deg) << "\n";
    out << "lateral_gain " << fmt(attitude.lateral_gain) << "\n";
    out << "reward_preset " << (reward_primitive_preset ? "primitive" : "default") << "\n";
    out << "reward_mode "
        << (reward_mode == RewardModeChoice::Line
                ? "line"
                : reward_mode == RewardModeChoice::Checkpoint ? "checkpoint" : "auto")
        << "\n";
    out << "w_progress " << fmt(reward.w_progress) << "\n";
    out << "w_deviation " << fmt(reward.w_deviation) << "\n";
    out << "w_yaw " << fmt(reward.w_yaw) << "\n";
    out << "r_goal " << fmt(reward.r_goal) << "\n";
    out << "r_collision " << fmt(reward.r_collision) << "\n";
    out << "r_checkpoint " << fmt(reward.r_checkpoint) << "\n";
    out << "deviation_limit " << fmt(reward.deviation_limit) << "\n";
    out << "away_limit " << fmt(reward.away_limit) << "\n";
    out << "base_steps " << budget.base_steps << "\n";
    out << "steps_per_episode " << budget.steps_per_episode << "\n";
    out << "step_cap " << budget.cap << "\n";
    out << "gamma " << fmt(gamma) << "\n";
    out << "step_size " << fmt(step_size) << "\n";
    out << "adam_beta1 " << fmt(adam_beta1) << "\n";
    out << "adam_beta2 " << fmt(adam_beta2) << "\n";
    out << "adam_epsilon " << fmt(adam_epsilon) << "\n";
    out << "huber_delta " << fmt(huber_delta) << "\n";
    out << "batch_size " << batch_size << "\n";
    out << "train_every " << train_every << "\n";
    out << "warmup " << warmup << "\n";
    out << "buffer_capacity " << buffer_capacity << "\n";
    out << "eps_start " << fmt(epsilon.eps_start) << "\n";
    out << "eps_end " << fmt(epsilon.eps_end) << "\n";
    out << "eps_decay_steps " << epsilon.decay_steps << "\n";
    if (convs.empty()) {
        out << "conv none\n";
    } else {
        for (const ConvSpec& c : convs)
            out << "conv " << c.out_channels << " " << c.kernel << " " << c.stride << "\n";
    }
    if (hidden.empty()) {
        out << "dense none\n";
    } else {
        for (int h : hidden) out << "dense " << h << "\n";
    }
    out << "alpha " << fmt(tabular_alpha) << "\n";
    out << "cell_size " << fmt(cell_size) << "\n";
    out << "blocks_spacing " << fmt(blocks_spacing) << "\n";
    out << "blocks_count " << blocks_count << "\n";
    out << "arena_seed " << arena_seed << "\n";
    return out.str();
}

EnvConfig RunConfig::to_env_config(const Arena& arena) const {
    EnvConfig env;
    env.camera = camera;
    env.actions = actions;
    env.noise = noise;
    env.reward = reward;
    switch (reward_mode) {
        case RewardModeChoice::Line: env.reward.mode = RewardConfig::Mode::LineShaping; break;
        case RewardModeChoice::Checkpoint: env.reward.mode = RewardConfig::Mode::Checkpoint; break;
        case RewardModeChoice::Auto:
            env.reward.mode = arena.checkpoints.empty() ? RewardConfig::Mode::LineShaping
                                                        : RewardConfig::Mode::Checkpoint;
            break;
    }
    env.budget = budget;
    env.attitude = attitude;
    env.dt = dt;
    env.forward_speed = forward_speed;
    env.heading_hold = heading_hold;
    env.heading_hold_gain = heading_hold_gain;
    return env;
}

NetConfig RunConfig::to_net_config() const {
    NetConfig net;
    net.input_height = camera.height;
    net.input_width = camera.width;
    net.convs = convs;
    net.hidden = hidden;
    net.outputs = actions.size();
    return net;
}

Arena resolve_arena(const RunConfig& cfg, long episode_index) {
    const std::string& src = cfg.arena_source;
    const uint64_t base_seed = cfg.arena_seed != 0 ? cfg.arena_seed : cfg.seed * 0x9e3779b97f4a7c15ULL + 17;
    if (src == "builtin:corridor") {
        Arena a;
        a.name = "corridor";
        a.bounds = {-10, -6, 10, 6};
        a.wall_height = 5.0;
        a.start = {-8, 0, 0};
        a.goal = {8, 0, 1.5};
        a.obstacles.push_back(Obstacle::make_box(0, 0, 0.75, 0.75, 5.0));
        validate_arena(a);
        return a;
    }
    if (src == "builtin:lane") {
        // Obstacle-free straight lane; the smallest navigable scene.
        Arena a;
        a.name = "lane";
        a.bounds = {-8, -4, 8, 4};
        a.wall_height = 5.0;
        a.start = {-6, 0, 0};
        a.goal = {6, 0, 1.0};
        validate_arena(a);
        return a;
    }
    if (src == "builtin:blocks") return build_blocks_arena(cfg.blocks_spacing, cfg.blocks_count, base_seed);
    if (src == "builtin:wobbles-a") return build_wobbles_zone(WobblesZone::A, base_seed);
    if (src == "builtin:wobbles-b") return build_wobbles_zone(WobblesZone::B, base_seed);
    if (src == "builtin:wobbles-c") return build_wobbles_zone(WobblesZone::C, base_seed);
    if (src == "builtin:wobbles-d") return build_wobbles_zone(WobblesZone::D, base_seed);
    if (src == "builtin:wobbles") {
        // Random-zone curriculum: the zone is a pure function of the episode
        // index so interrupted runs resume on the same schedule.
        uint64_t h = base_seed ^ (static_cast<uint64_t>(episode_index) * 0xbf58476d1ce4e5b9ULL);
        h ^= h >> 31;
        h *= 0x94d049bb133111ebULL;
        h ^= h >> 29;
        const WobblesZone zone = static_cast<WobblesZone>(h % 4);
        return build_wobbles_zone(zone, h >> 2);
    }
    if (src.starts_with("builtin:")) throw std::runtime_error("unknown builtin arena: " + src);
    return load_arena_file(src);
}

bool arena_changes_per_episode(const std::string& arena_source) {
    return arena_source == "builtin:wobbles";
}

}  // namespace deeprotor
