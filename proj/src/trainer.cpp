#include "deeprotor/trainer.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "deeprotor/checkpoint.hpp"
#include "deeprotor/metrics.hpp"

namespace deeprotor {

namespace {

constexpr const char* kConfigSeparator = "---config---\n";

std::string hex_double(double v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(std::bit_cast<uint64_t>(v)));
    return buf;
}

double unhex_double(const std::string& s) { return std::bit_cast<double>(std::stoull(s, nullptr, 16)); }

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Strip keys that may legitimately differ between the original run and a
// resumed continuation (extending a run is allowed).
std::string echo_for_compare(const std::string& echo) {
    std::istringstream in(echo);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with("episodes ") || line.starts_with("checkpoint_interval ")) continue;
        out << line << "\n";
    }
    return out.str();
}

struct StateKeys {
    std::map<std::string, std::string> kv;

    const std::string& require(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error("checkpoint: missing state key '" + key + "'");
        return it->second;
    }
    long get_long(const std::string& key) const { return std::stol(require(key)); }
};

// Metadata = state lines, then the config echo below a separator.
std::string pack_metadata(const std::map<std::string, std::string>& state, const std::string& echo) {
    std::ostringstream out;
    for (const auto& [k, v] : state) out << k << " " << v << "\n";
    out << kConfigSeparator << echo;
    return out.str();
}

std::pair<StateKeys, std::string> unpack_metadata(const std::string& metadata) {
    const size_t sep = metadata.find(kConfigSeparator);
    if (sep == std::string::npos) throw std::runtime_error("checkpoint: metadata missing config echo");
    StateKeys keys;
    std::istringstream in(metadata.substr(0, sep));
    std::string line;
    while (std::getline(in, line)) {
        const size_t space = line.find(' ');
        if (space == std::string::npos) continue;
        keys.kv[line.substr(0, space)] = line.substr(space + 1);
    }
    return {std::move(keys), metadata.substr(sep + std::string(kConfigSeparator).size())};
}

std::string join_hex_doubles(const std::deque<double>& values) {
    std::string out;
    for (double v : values) {
        if (!out.empty()) out += ' ';
        out += hex_double(v);
    }
    return out;
}

std::vector<double> split_hex_doubles(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    for (std::string tok; in >> tok;) out.push_back(unhex_double(tok));
    return out;
}

// ---------------------------------------------------------------------------
// Deep (DQN / DDQN) trainer
// ---------------------------------------------------------------------------

struct DeepTrainerState {
    QNetwork<float> q1;
    QNetwork<float> q2;  // unused in single-network mode but kept congruent
    AdamState<float> opt1;
    AdamState<float> opt2;
    ReplayBuffer buffer;
    Rng agent_rng;
    MovingAverage avg;
    long episode = 0;
    long global_step = 0;
    long cumulative_collisions = 0;

    DeepTrainerState(const NetConfig& net_cfg, const RunConfig& cfg)
        : q1(net_cfg),
          q2(net_cfg),
          opt1(q1.param_count()),
          opt2(q2.param_count()),
          buffer(cfg.buffer_capacity),
          avg(static_cast<size_t>(cfg.moving_avg_window)) {}
};

void configure_adam(AdamState<float>& opt, const RunConfig& cfg) {
    opt.step_size = cfg.step_size;
    opt.beta1 = cfg.adam_beta1;
    opt.beta2 = cfg.adam_beta2;
    opt.epsilon_hat = cfg.adam_epsilon;
}

void save_deep_checkpoint(const std::string& path, const RunConfig& cfg, const DeepTrainerState& st,
                          const Rng& env_rng) {
    CheckpointData data;
    std::map<std::string, std::string> state;
    state["state.format"] = "1";
    state["state.episode"] = std::to_string(st.episode);
    state["state.global_step"] = std::to_string(st.global_step);
    state["state.cumulative_collisions"] = std::to_string(st.cumulative_collisions);
    state["state.agent_rng"] = st.agent_rng.state_hex();
    state["state.env_rng"] = env_rng.state_hex();
    state["state.buffer_head"] = std::to_string(st.buffer.head());
    state["state.buffer_size"] = std::to_string(st.buffer.size());
    state["state.recent_rewards"] = join_hex_doubles(st.avg.values());
    // Optimizer step counters ride in metadata, not float records, so they
    // stay exact.
    state["state.opt1_t"] = std::to_string(st.opt1.step);
    state["state.opt2_t"] = std::to_string(st.opt2.step);
    data.metadata = pack_metadata(state, cfg.echo());

    append_network_records(data, "q1.", st.q1, st.opt1);
    if (cfg.algorithm == Algorithm::DoubleDqn) append_network_records(data, "q2.", st.q2, st.opt2);

    const size_t n = st.buffer.size();
    const int obs_len = cfg.camera.width * cfg.camera.height;
    TensorRecord obs{"buf.obs", {static_cast<int>(n), obs_len}, {}};
    TensorRecord next{"buf.next_obs", {static_cast<int>(n), obs_len}, {}};
    TensorRecord act{"buf.action", {static_cast<int>(n)}, {}};
    TensorRecord rew{"buf.reward", {static_cast<int>(n)}, {}};
    TensorRecord done{"buf.done", {static_cast<int>(n)}, {}};
    obs.data.reserve(n * static_cast<size_t>(obs_len));
    next.data.reserve(n * static_cast<size_t>(obs_len));
    for (size_t i = 0; i < n; ++i) {
        const Transition& t = st.buffer.at(i);
        obs.data.insert(obs.data.end(), t.obs.begin(), t.obs.end());
        next.data.insert(next.data.end(), t.next_obs.begin(), t.next_obs.end());
        act.data.push_back(static_cast<float>(t.action));
        rew.data.push_back(t.reward);
        done.data.push_back(t.done ? 1.0f : 0.0f);
    }
    data.tensors.push_back(std::move(obs));
    data.tensors.push_back(std::move(next));
    data.tensors.push_back(std::move(act));
    data.tensors.push_back(std::move(rew));
    data.tensors.push_back(std::move(done));

    save_checkpoint_file(path, data);
}

void restore_deep_checkpoint(const CheckpointData& data, const StateKeys& keys, const RunConfig& cfg,
                             DeepTrainerState& st, Rng& env_rng) {
    st.episode = keys.get_long("state.episode");
    st.global_step = keys.get_long("state.global_step");
    st.cumulative_collisions = keys.get_long("state.cumulative_collisions");
    st.agent_rng = Rng::from_state_hex(keys.require("state.agent_rng"));
    env_rng = Rng::from_state_hex(keys.require("state.env_rng"));
    st.avg.restore(split_hex_doubles(keys.kv.count("state.recent_rewards")
                                         ? keys.kv.at("state.recent_rewards")
                                         : std::string()));
    read_network_records(data, "q1.", st.q1, st.opt1);
    st.opt1.step = keys.get_long("state.opt1_t");
    if (cfg.algorithm == Algorithm::DoubleDqn) {
        read_network_records(data, "q2.", st.q2, st.opt2);
        st.opt2.step = keys.get_long("state.opt2_t");
    }

    const size_t n = static_cast<size_t>(keys.get_long("state.buffer_size"));
    const size_t head = static_cast<size_t>(keys.get_long("state.buffer_head"));
    const size_t obs_len = static_cast<size_t>(cfg.camera.width) * cfg.camera.height;
    const TensorRecord& obs = data.require("buf.obs");
    const TensorRecord& next = data.require("buf.next_obs");
    const TensorRecord& act = data.require("buf.action");
    const TensorRecord& rew = data.require("buf.reward");
    const TensorRecord& done = data.require("buf.done");
    if (obs.data.size() != n * obs_len || next.data.size() != n * obs_len || act.data.size() != n ||
        rew.data.size() != n || done.data.size() != n)
        throw std::runtime_error("checkpoint: replay records shape mismatch with current config");
    std::vector<Transition> storage(n);
    for (size_t i = 0; i < n; ++i) {
        Transition& t = storage[i];
        t.obs.assign(obs.data.begin() + static_cast<long>(i * obs_len),
                     obs.data.begin() + static_cast<long>((i + 1) * obs_len));
        t.next_obs.assign(next.data.begin() + static_cast<long>(i * obs_len),
                          next.data.begin() + static_cast<long>((i + 1) * obs_len));
        t.action = static_cast<int>(act.data[i]);
        t.reward = rew.data[i];
        t.done = done.data[i] != 0.0f;
    }
    st.buffer.restore(std::move(storage), head, n);
}

TrainingReport deep_train_run(const RunConfig& cfg, const std::string& out_dir,
                              const std::string& resume_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const NetConfig net_cfg = cfg.to_net_config();
    DeepTrainerState st(net_cfg, cfg);
    configure_adam(st.opt1, cfg);
    configure_adam(st.opt2, cfg);
    Rng env_rng = derive_rng(cfg.seed, 1);

    if (resume_path.empty()) {
        st.q1 = QNetwork<float>::he_init(net_cfg, derive_rng(cfg.seed, 3).next_u64());
        st.q2 = QNetwork<float>::he_init(net_cfg, derive_rng(cfg.seed, 4).next_u64());
        st.agent_rng = derive_rng(cfg.seed, 2);
    } else {
        const CheckpointData data = load_checkpoint_file(resume_path);
        auto [keys, echo] = unpack_metadata(data.metadata);
        if (echo_for_compare(echo) != echo_for_compare(cfg.echo()))
            throw std::runtime_error("resume: config differs from the checkpoint's config");
        restore_deep_checkpoint(data, keys, cfg, st, env_rng);
    }

    Arena arena = resolve_arena(cfg, st.episode);
    NavEnv env(arena, cfg.to_env_config(arena), env_rng);
    MetricsWriter metrics((std::filesystem::path(out_dir) / "metrics.csv").string());

    const bool ddqn = cfg.algorithm == Algorithm::DoubleDqn;
    const LossSpec loss{cfg.huber_delta};
    std::vector<const float*> batch_obs(static_cast<size_t>(cfg.batch_size));
    std::vector<int> batch_act(static_cast<size_t>(cfg.batch_size));

    TrainingReport report;
    auto checkpoint_to = [&](const std::string& name) {
        save_deep_checkpoint((std::filesystem::path(out_dir) / name).string(), cfg, st, env.rng());
    };

    for (; st.episode < cfg.episodes; ++st.episode) {
        if (arena_changes_per_episode(cfg.arena_source)) {
            Arena next = resolve_arena(cfg, st.episode);
            env.set_config(cfg.to_env_config(next));
            env.set_arena(std::move(next));
        }
        ObservationTensor obs = env.reset(static_cast<int>(st.episode));
        while (!env.done()) {
            std::vector<float> qvals = st.q1.forward(obs);
            if (ddqn) {
                const std::vector<float> q2v = st.q2.forward(obs);
                for (size_t i = 0; i < qvals.size(); ++i) qvals[i] += q2v[i];
            }
            const double eps = epsilon_at(cfg.epsilon, st.global_step);
            const int action = select_action(qvals, eps, st.agent_rng);
            NavEnv::StepOutput out = env.step(action);
            st.buffer.push(Transition{std::move(obs.data), action, static_cast<float>(out.reward),
                                      out.obs.data, out.done});
            obs = std::move(out.obs);
            ++st.global_step;

            if (st.buffer.size() >= static_cast<size_t>(cfg.warmup) &&
                st.global_step % cfg.train_every == 0) {
                const auto batch = st.buffer.sample(static_cast<size_t>(cfg.batch_size), st.agent_rng);
                for (size_t i = 0; i < batch.size(); ++i) {
                    batch_obs[i] = batch[i]->obs.data();
                    batch_act[i] = batch[i]->action;
                }
                try {
                    if (ddqn) {
                        const bool coin = st.agent_rng.bernoulli(0.5);
                        auto [which, targets] = double_dqn_targets(batch, st.q1, st.q2, cfg.gamma, coin);
                        if (which == WhichNet::Q1)
                            train_step(st.q1, st.opt1, batch_obs, batch_act, targets, loss);
                        else
                            train_step(st.q2, st.opt2, batch_obs, batch_act, targets, loss);
                    } else {
                        const auto targets = dqn_targets(batch, st.q1, cfg.gamma);
                        train_step(st.q1, st.opt1, batch_obs, batch_act, targets, loss);
                    }
                } catch (const std::exception& e) {
                    // Keep the offending state inspectable, then surface.
                    checkpoint_to("checkpoint_abort.ckpt");
                    throw std::runtime_error(std::string("training aborted: ") + e.what() +
                                             " (state saved to checkpoint_abort.ckpt)");
                }
            }
        }

        const EpisodeResult& res = env.result();
        st.avg.add(res.total_reward);
        if (res.terminal == TerminalReason::Collision) ++st.cumulative_collisions;

        MetricsRow row;
        row.episode = st.episode;
        row.steps = res.steps;
        row.total_reward = res.total_reward;
        row.moving_avg_reward = st.avg.mean();
        row.terminal_reason = terminal_reason_name(res.terminal);
        row.epsilon = epsilon_at(cfg.epsilon, st.global_step);
        row.mean_abs_yaw_rate = res.mean_abs_yaw_rate_dps;
        row.mean_roll = res.mean_roll_deg;
        row.mean_pitch = res.mean_pitch_deg;
        row.checkpoints_hit = res.checkpoints_hit;
        row.cumulative_collisions = st.cumulative_collisions;
        try {
            metrics.write_row(row);
        } catch (const std::exception&) {
            // Metrics sink failed: try to keep the learner state, then give up.
            try {
                st.episode += 1;
                checkpoint_to("checkpoint_abort.ckpt");
            } catch (const std::exception&) {
            }
            throw;
        }

        ++report.episodes_run;
        ++report.terminal_counts[row.terminal_reason];
        if (!report.has_best || row.moving_avg_reward > report.best_moving_avg) {
            report.best_moving_avg = row.moving_avg_reward;
            report.has_best = true;
        }
        if (cfg.checkpoint_interval > 0 && (st.episode + 1) % cfg.checkpoint_interval == 0 &&
            st.episode + 1 < cfg.episodes) {
            // The stored index is the next episode to run.
            st.episode += 1;
            checkpoint_to("checkpoint_ep" + std::to_string(st.episode) + ".ckpt");
            st.episode -= 1;
        }
    }

    checkpoint_to("checkpoint_final.ckpt");
    report.global_steps = st.global_step;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// ---------------------------------------------------------------------------
// Tabular gridworld trainer
// ---------------------------------------------------------------------------

struct TabularState {
    QTable table{1, 1};
    Rng agent_rng;
    MovingAverage avg;
    long episode = 0;
    long global_step = 0;

    explicit TabularState(const RunConfig& cfg) : avg(static_cast<size_t>(cfg.moving_avg_window)) {}
};

void save_tabular_checkpoint(const std::string& path, const RunConfig& cfg, const TabularState& st) {
    CheckpointData data;
    std::map<std::string, std::string> state;
    state["state.format"] = "1";
    state["state.episode"] = std::to_string(st.episode);
    state["state.global_step"] = std::to_string(st.global_step);
    state["state.agent_rng"] = st.agent_rng.state_hex();
    state["state.qtable_states"] = std::to_string(st.table.n_states);
    state["state.qtable_actions"] = std::to_string(st.table.n_actions);
    std::string q;
    for (double v : st.table.q) {
        if (!q.empty()) q += ' ';
        q += hex_double(v);
    }
    state["state.qtable"] = std::move(q);
    std::deque<double> recent(st.avg.values());
    state["state.recent_rewards"] = join_hex_doubles(recent);
    data.metadata = pack_metadata(state, cfg.echo());
    save_checkpoint_file(path, data);
}

TrainingReport tabular_train_run(const RunConfig& cfg, const std::string& out_dir,
                                 const std::string& resume_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const Arena arena = resolve_arena(cfg, 0);
    const GridWorld grid = rasterize_arena(arena, cfg.cell_size);
    const ExplicitMdp mdp = grid.to_mdp();

    TabularState st(cfg);
    st.table = QTable(mdp.n_states, mdp.n_actions);
    if (resume_path.empty()) {
        st.agent_rng = derive_rng(cfg.seed, 2);
    } else {
        const CheckpointData data = load_checkpoint_file(resume_path);
        auto [keys, echo] = unpack_metadata(data.metadata);
        if (echo_for_compare(echo) != echo_for_compare(cfg.echo()))
            throw std::runtime_error("resume: config differs from the checkpoint's config");
        st.episode = keys.get_long("state.episode");
        st.global_step = keys.get_long("state.global_step");
        st.agent_rng = Rng::from_state_hex(keys.require("state.agent_rng"));
        if (keys.get_long("state.qtable_states") != mdp.n_states ||
            keys.get_long("state.qtable_actions") != mdp.n_actions)
            throw std::runtime_error("resume: gridworld shape differs from the checkpoint");
        const std::vector<double> q = split_hex_doubles(keys.require("state.qtable"));
        if (q.size() != st.table.q.size())
            throw std::runtime_error("resume: q-table size differs from the checkpoint");
        st.table.q = q;
        st.avg.restore(split_hex_doubles(keys.kv.count("state.recent_rewards")
                                             ? keys.kv.at("state.recent_rewards")
                                             : std::string()));
    }

    MetricsWriter metrics((std::filesystem::path(out_dir) / "metrics.csv").string());
    LearningParams params;
    params.alpha = cfg.tabular_alpha;
    params.gamma = cfg.gamma;

    TrainingReport report;
    for (; st.episode < cfg.episodes; ++st.episode) {
        int s = grid.start_cell;
        const int max_steps = max_steps_for_episode(cfg.budget, static_cast<int>(st.episode));
        double total = 0.0;
        int steps = 0;
        TerminalReason terminal = TerminalReason::StepLimit;
        while (steps < max_steps) {
            const double eps = epsilon_at(cfg.epsilon, st.global_step);
            int a;
            if (st.agent_rng.next_double() < eps) {
                a = st.agent_rng.next_int(mdp.n_actions);
            } else {
                a = st.table.argmax_at(s);
            }
            const int s2 = mdp.next_at(s, a);
            const double r = mdp.reward_at(s, a);
            const bool done = mdp.terminal[s2];
            tabular_q_update(st.table, s, a, r, s2, done, params);
            total += r;
            ++steps;
            ++st.global_step;
            s = s2;
            if (done) {
                terminal = TerminalReason::Goal;
                break;
            }
        }

        st.avg.add(total);
        MetricsRow row;
        row.episode = st.episode;
        row.steps = steps;
        row.total_reward = total;
        row.moving_avg_reward = st.avg.mean();
        row.terminal_reason = terminal_reason_name(terminal);
        row.epsilon = epsilon_at(cfg.epsilon, st.global_step);
        metrics.write_row(row);

        ++report.episodes_run;
        ++report.terminal_counts[row.terminal_reason];
        if (!report.has_best || row.moving_avg_reward > report.best_moving_avg) {
            report.best_moving_avg = row.moving_avg_reward;
            report.has_best = true;
        }
        if (cfg.checkpoint_interval > 0 && (st.episode + 1) % cfg.checkpoint_interval == 0 &&
            st.episode + 1 < cfg.episodes) {
            st.episode += 1;
            save_tabular_checkpoint(
                (std::filesystem::path(out_dir) / ("checkpoint_ep" + std::to_string(st.episode) + ".ckpt"))
                    .string(),
                cfg, st);
            st.episode -= 1;
        }
    }
    save_tabular_checkpoint((std::filesystem::path(out_dir) / "checkpoint_final.ckpt").string(), cfg, st);
    report.global_steps = st.global_step;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace

GridWorld rasterize_arena(const Arena& arena, double cell_size) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("rasterize_arena: cell_size must be > 0");
    GridWorld grid;
    grid.width = std::max(1, static_cast<int>(arena.bounds.width() / cell_size));
    grid.height = std::max(1, static_cast<int>(arena.bounds.height() / cell_size));
    grid.blocked.assign(static_cast<size_t>(grid.width) * grid.height, false);
    auto center_x = [&](int i) { return arena.bounds.xmin + (i + 0.5) * cell_size; };
    auto center_y = [&](int j) { return arena.bounds.ymin + (j + 0.5) * cell_size; };
    for (int j = 0; j < grid.height; ++j)
        for (int i = 0; i < grid.width; ++i)
            grid.blocked[grid.cell(i, j)] =
                check_collision(arena, {center_x(i), center_y(j), kFlightAltitude}, kVehicleRadius)
                    .has_value();

    auto cell_of = [&](double x, double y) {
        int i = static_cast<int>((x - arena.bounds.xmin) / cell_size);
        int j = static_cast<int>((y - arena.bounds.ymin) / cell_size);
        i = std::clamp(i, 0, grid.width - 1);
        j = std::clamp(j, 0, grid.height - 1);
        return grid.cell(i, j);
    };
    grid.start_cell = cell_of(arena.start.x, arena.start.y);
    grid.goal_cell = cell_of(arena.goal.x, arena.goal.y);
    if (grid.blocked[grid.start_cell])
        throw std::runtime_error("rasterize_arena: start cell is blocked at this cell size");
    if (grid.blocked[grid.goal_cell])
        throw std::runtime_error("rasterize_arena: goal cell is blocked at this cell size");
    return grid;
}

TrainingReport train_run(const RunConfig& cfg, const std::string& out_dir, const std::string& resume_path) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    write_text_file((std::filesystem::path(out_dir) / "config_echo.txt").string(), cfg.echo());
    if (cfg.algorithm == Algorithm::TabularGrid) return tabular_train_run(cfg, out_dir, resume_path);
    return deep_train_run(cfg, out_dir, resume_path);
}

TrainingReport eval_run(const std::string& model_path, const std::string& arena_override, long episodes,
                        const std::string& out_dir, std::optional<uint64_t> seed_override) {
    const auto t0 = std::chrono::steady_clock::now();
    const CheckpointData data = load_checkpoint_file(model_path);
    auto [keys, echo] = unpack_metadata(data.metadata);
    RunConfig cfg = parse_run_config(echo);
    if (!arena_override.empty()) cfg.arena_source = arena_override;
    cfg.episodes = episodes;
    if (seed_override) cfg.seed = *seed_override;
    cfg.validate();

    std::filesystem::create_directories(out_dir);
    write_text_file((std::filesystem::path(out_dir) / "config_echo.txt").string(), cfg.echo());
    MetricsWriter metrics((std::filesystem::path(out_dir) / "metrics.csv").string());

    TrainingReport report;
    if (cfg.algorithm == Algorithm::TabularGrid) {
        const Arena arena = resolve_arena(cfg, 0);
        const GridWorld grid = rasterize_arena(arena, cfg.cell_size);
        const ExplicitMdp mdp = grid.to_mdp();
        QTable table(mdp.n_states, mdp.n_actions);
        if (keys.get_long("state.qtable_states") != mdp.n_states ||
            keys.get_long("state.qtable_actions") != mdp.n_actions)
            throw std::runtime_error("eval: gridworld shape differs from the checkpoint");
        table.q = split_hex_doubles(keys.require("state.qtable"));
        MovingAverage avg(static_cast<size_t>(cfg.moving_avg_window));
        for (long ep = 0; ep < episodes; ++ep) {
            int s = grid.start_cell;
            const int max_steps = max_steps_for_episode(cfg.budget, static_cast<int>(ep));
            double total = 0.0;
            int steps = 0;
            TerminalReason terminal = TerminalReason::StepLimit;
            while (steps < max_steps) {
                const int a = table.argmax_at(s);
                const int s2 = mdp.next_at(s, a);
                total += mdp.reward_at(s, a);
                ++steps;
                if (mdp.terminal[s2]) {
                    terminal = TerminalReason::Goal;
                    break;
                }
                s = s2;
            }
            avg.add(total);
            MetricsRow row;
            row.episode = ep;
            row.steps = steps;
            row.total_reward = total;
            row.moving_avg_reward = avg.mean();
            row.terminal_reason = terminal_reason_name(terminal);
            metrics.write_row(row);
            ++report.episodes_run;
            report.global_steps += steps;
            ++report.terminal_counts[row.terminal_reason];
        }
        report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return report;
    }

    const NetConfig net_cfg = cfg.to_net_config();
    QNetwork<float> q1(net_cfg), q2(net_cfg);
    AdamState<float> opt1(q1.param_count()), opt2(q2.param_count());
    read_network_records(data, "q1.", q1, opt1);
    const bool ddqn = cfg.algorithm == Algorithm::DoubleDqn;
    if (ddqn) read_network_records(data, "q2.", q2, opt2);

    Rng env_rng = derive_rng(cfg.seed, 1);
    Rng agent_rng = derive_rng(cfg.seed, 2);
    Arena arena = resolve_arena(cfg, 0);
    NavEnv env(arena, cfg.to_env_config(arena), env_rng);
    MovingAverage avg(static_cast<size_t>(cfg.moving_avg_window));
    long cumulative_collisions = 0;

    for (long ep = 0; ep < episodes; ++ep) {
        if (arena_changes_per_episode(cfg.arena_source)) {
            Arena next = resolve_arena(cfg, ep);
            env.set_config(cfg.to_env_config(next));
            env.set_arena(std::move(next));
        }
        ObservationTensor obs = env.reset(static_cast<int>(ep));
        while (!env.done()) {
            std::vector<float> qvals = q1.forward(obs);
            if (ddqn) {
                const std::vector<float> q2v = q2.forward(obs);
                for (size_t i = 0; i < qvals.size(); ++i) qvals[i] += q2v[i];
            }
            const int action = select_action(qvals, 0.0, agent_rng);
            obs = env.step(action).obs;
        }
        const EpisodeResult& res = env.result();
        avg.add(res.total_reward);
        if (res.terminal == TerminalReason::Collision) ++cumulative_collisions;
        MetricsRow row;
        row.episode = ep;
        row.steps = res.steps;
        row.total_reward = res.total_reward;
        row.moving_avg_reward = avg.mean();
        row.terminal_reason = terminal_reason_name(res.terminal);
        row.epsilon = 0.0;
        row.mean_abs_yaw_rate = res.mean_abs_yaw_rate_dps;
        row.mean_roll = res.mean_roll_deg;
        row.mean_pitch = res.mean_pitch_deg;
        row.checkpoints_hit = res.checkpoints_hit;
        row.cumulative_collisions = cumulative_collisions;
        metrics.write_row(row);
        ++report.episodes_run;
        report.global_steps += res.steps;
        ++report.terminal_counts[row.terminal_reason];
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace deeprotor
