#pragma once

#include <optional>
#include <string>

#include "deeprotor/arena.hpp"
#include "deeprotor/camera.hpp"
#include "deeprotor/quad.hpp"

namespace deeprotor {

enum class TerminalReason { None, Goal, Collision, Deviation, AwayFromGoal, StepLimit };

std::string terminal_reason_name(TerminalReason r);

// Signed contributions of each reward term; the episode total is exactly the
// sum of these.
struct RewardComponents {
    double progress = 0.0;
    double deviation = 0.0;
    double yaw_penalty = 0.0;
    double checkpoint = 0.0;
    double goal = 0.0;
    double collision = 0.0;

    double total() const { return progress + deviation + yaw_penalty + checkpoint + goal + collision; }
    RewardComponents& operator+=(const RewardComponents& o);
};

struct RewardConfig {
    enum class Mode { LineShaping, Checkpoint };
    Mode mode = Mode::LineShaping;
    double w_progress = 1.0;    // reward per meter of goal approach
    double w_deviation = 0.1;   // penalty per meter off the start-goal line
    double w_yaw = 0.05;        // penalty per unit normalized |action|
    double r_goal = 50.0;
    double r_collision = 50.0;
    double r_checkpoint = 10.0;
    double deviation_limit = 10.0;
    double away_limit = 0.0;  // 0 = auto: 1.5 x initial goal distance
};

// Per-episode action limit, growing linearly with the episode index.
struct StepBudget {
    int base_steps = 200;
    int steps_per_episode = 2;
    int cap = 1000;
};

int max_steps_for_episode(const StepBudget& budget, int episode_index);

struct EpisodeResult {
    int steps = 0;
    double total_reward = 0.0;
    TerminalReason terminal = TerminalReason::None;
    RewardComponents components;
    int checkpoints_hit = 0;
    // per-episode means for the flight logs
    double mean_abs_yaw_rate_dps = 0.0;
    double mean_roll_deg = 0.0;
    double mean_pitch_deg = 0.0;
};

struct StepInfo {
    std::optional<CollisionInfo> collision;
    RewardComponents components;
    TerminalReason terminal = TerminalReason::None;
    double commanded_rate_dps = 0.0;
};

// One step's reward breakdown.  checkpoints_entered counts the ordered
// checkpoints first entered during this step (Checkpoint mode only).
RewardComponents compute_reward(const QuadState& prev, const QuadState& next,
                                double normalized_action_magnitude, const RewardConfig& cfg,
                                const Vec2& start, const Goal& goal, bool collided, bool reached_goal,
                                int checkpoints_entered);

struct EnvConfig {
    CameraConfig camera;
    ActionSpace actions;
    NoiseModel noise;
    RewardConfig reward;
    StepBudget budget;
    AttitudeCoeffs attitude;
    double dt = 0.1;
    double forward_speed = 2.0;
    bool heading_hold = false;  // YawRate mode drift cancellation
    double heading_hold_gain = 1.0;
};

// The episodic MDP.  Single-threaded; owns its rng so that independent
// instances can run concurrently.
class NavEnv {
  public:
    NavEnv(Arena arena, EnvConfig config, Rng rng);

    // Swap the scene between episodes (random-zone curricula).  The rng is
    // untouched so the noise stream keeps flowing.
    void set_arena(Arena arena);
    void set_config(EnvConfig config);

    ObservationTensor reset(int episode_index);

    struct StepOutput {
        ObservationTensor obs;
        double reward = 0.0;
        bool done = false;
        StepInfo info;
    };
    // Throws std::logic_error when the episode is already finished.
    StepOutput step(int action_index);

    bool done() const { return terminal_ != TerminalReason::None; }
    const EpisodeResult& result() const;
    const QuadState& state() const { return state_; }
    const Arena& arena() const { return arena_; }
    const EnvConfig& config() const { return config_; }
    int max_steps() const { return max_steps_; }
    int action_count() const { return config_.actions.size(); }

    Rng& rng() { return rng_; }

  private:
    ObservationTensor observe() const;

    Arena arena_;
    EnvConfig config_;
    Rng rng_;
    QuadState state_;
    double commanded_yaw_deg_ = 0.0;  // drift-free heading-hold target
    double away_limit_ = 0.0;
    int max_steps_ = 0;
    int step_count_ = 0;
    size_t next_checkpoint_ = 0;
    TerminalReason terminal_ = TerminalReason::Goal;  // "no episode yet" guard; reset() clears
    EpisodeResult result_;
    double sum_abs_rate_ = 0.0;
    double sum_roll_ = 0.0;
    double sum_pitch_ = 0.0;
    bool has_result_ = false;
};

}  // namespace deeprotor
