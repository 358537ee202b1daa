#include "deeprotor/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeprotor {

std::string terminal_reason_name(TerminalReason r) {
    switch (r) {
        case TerminalReason::None: return "none";
        case TerminalReason::Goal: return "goal";
        case TerminalReason::Collision: return "collision";
        case TerminalReason::Deviation: return "deviation";
        case TerminalReason::AwayFromGoal: return "away";
        case TerminalReason::StepLimit: return "step_limit";
    }
    return "none";
}

RewardComponents& RewardComponents::operator+=(const RewardComponents& o) {
    progress += o.progress;
    deviation += o.deviation;
    yaw_penalty += o.yaw_penalty;
    checkpoint += o.checkpoint;
    goal += o.goal;
    collision += o.collision;
    return *this;
}

int max_steps_for_episode(const StepBudget& budget, int episode_index) {
    if (episode_index < 0) throw std::invalid_argument("max_steps_for_episode: episode_index must be >= 0");
    const long grown = static_cast<long>(budget.base_steps) +
                       static_cast<long>(budget.steps_per_episode) * episode_index;
    return static_cast<int>(std::min(grown, static_cast<long>(budget.cap)));
}

RewardComponents compute_reward(const QuadState& prev, const QuadState& next,
                                double normalized_action_magnitude, const RewardConfig& cfg,
                                const Vec2& start, const Goal& goal, bool collided, bool reached_goal,
                                int checkpoints_entered) {
    RewardComponents c;
    const Vec2 g{goal.x, goal.y};
    const double d_prev = (Vec2{prev.x, prev.y} - g).norm();
    const double d_next = (Vec2{next.x, next.y} - g).norm();
    c.progress = cfg.w_progress * (d_prev - d_next);
    if (cfg.mode == RewardConfig::Mode::LineShaping)
        c.deviation = -cfg.w_deviation * distance_to_segment({next.x, next.y}, start, g);
    c.yaw_penalty = -cfg.w_yaw * normalized_action_magnitude;
    if (cfg.mode == RewardConfig::Mode::Checkpoint) c.checkpoint = cfg.r_checkpoint * checkpoints_entered;
    if (reached_goal) c.goal = cfg.r_goal;
    if (collided) c.collision = -cfg.r_collision;
    return c;
}

NavEnv::NavEnv(Arena arena, EnvConfig config, Rng rng)
    : arena_(std::move(arena)), config_(std::move(config)), rng_(rng) {}

void NavEnv::set_arena(Arena arena) { arena_ = std::move(arena); }

void NavEnv::set_config(EnvConfig config) { config_ = std::move(config); }

ObservationTensor NavEnv::observe() const {
    const CameraPose pose{state_.x, state_.y, state_.z, state_.yaw_deg};
    return normalize_depth(render_depth(arena_, pose, config_.camera), config_.camera.max_range);
}

ObservationTensor NavEnv::reset(int episode_index) {
    state_ = QuadState{};
    state_.x = arena_.start.x;
    state_.y = arena_.start.y;
    state_.z = kFlightAltitude;
    state_.yaw_deg = wrap_deg_360(arena_.start.yaw_deg);
    state_.forward_speed = config_.forward_speed;
    commanded_yaw_deg_ = state_.yaw_deg;
    const double d0 = (Vec2{state_.x, state_.y} - Vec2{arena_.goal.x, arena_.goal.y}).norm();
    away_limit_ = config_.reward.away_limit > 0.0 ? config_.reward.away_limit : 1.5 * d0;
    max_steps_ = max_steps_for_episode(config_.budget, episode_index);
    step_count_ = 0;
    next_checkpoint_ = 0;
    terminal_ = TerminalReason::None;
    result_ = EpisodeResult{};
    sum_abs_rate_ = sum_roll_ = sum_pitch_ = 0.0;
    has_result_ = false;
    return observe();
}

NavEnv::StepOutput NavEnv::step(int action_index) {
    if (terminal_ != TerminalReason::None)
        throw std::logic_error("NavEnv::step: episode already finished; call reset()");

    const QuadState prev = state_;
    const bool yaw_mode = config_.actions.mode == ActionSpace::Mode::YawRate;
    const double action_rate = yaw_mode ? config_.actions.yaw_rates_dps[action_index] : 0.0;

    double corrective = 0.0;
    if (yaw_mode) {
        // Heading-hold tracks the drift-free commanded heading.
        commanded_yaw_deg_ = wrap_deg_360(commanded_yaw_deg_ + action_rate * config_.dt);
        if (config_.heading_hold)
            corrective = heading_hold_correction(state_, commanded_yaw_deg_, config_.heading_hold_gain);
    }

    state_ = apply_action(prev, action_index, config_.actions, config_.noise, config_.dt, rng_,
                          config_.attitude, corrective);
    ++step_count_;

    const auto collision = check_collision(arena_, {state_.x, state_.y, state_.z}, kVehicleRadius);
    const Vec2 pos{state_.x, state_.y};
    const Vec2 goal_pos{arena_.goal.x, arena_.goal.y};
    const double d_goal = (pos - goal_pos).norm();
    const bool reached_goal = d_goal <= arena_.goal.radius;

    int entered = 0;
    if (config_.reward.mode == RewardConfig::Mode::Checkpoint) {
        while (next_checkpoint_ < arena_.checkpoints.size()) {
            const Checkpoint& cp = arena_.checkpoints[next_checkpoint_];
            if ((pos - Vec2{cp.x, cp.y}).norm() > cp.radius) break;
            ++next_checkpoint_;
            ++entered;
        }
    }

    StepInfo info;
    info.collision = collision;
    info.commanded_rate_dps = action_rate;
    info.components =
        compute_reward(prev, state_, config_.actions.normalized_magnitude(action_index), config_.reward,
                       {arena_.start.x, arena_.start.y}, arena_.goal, collision.has_value(), reached_goal,
                       entered);

    // Termination, one reason only, in priority order.  The deviation gate
    // applies to line shaping; checkpoint routes are deliberately curved.
    if (reached_goal) {
        terminal_ = TerminalReason::Goal;
    } else if (collision) {
        terminal_ = TerminalReason::Collision;
    } else if (config_.reward.mode == RewardConfig::Mode::LineShaping &&
               distance_to_segment(pos, {arena_.start.x, arena_.start.y}, goal_pos) >
                   config_.reward.deviation_limit) {
        terminal_ = TerminalReason::Deviation;
    } else if (d_goal > away_limit_) {
        terminal_ = TerminalReason::AwayFromGoal;
    } else if (step_count_ >= max_steps_) {
        terminal_ = TerminalReason::StepLimit;
    }
    info.terminal = terminal_;

    result_.components += info.components;
    result_.total_reward += info.components.total();
    result_.steps = step_count_;
    result_.checkpoints_hit += entered;
    sum_abs_rate_ += std::abs(action_rate);
    sum_roll_ += state_.roll_deg;
    sum_pitch_ += state_.pitch_deg;

    StepOutput out;
    out.reward = info.components.total();
    out.done = terminal_ != TerminalReason::None;
    out.info = std::move(info);
    out.obs = observe();

    if (out.done) {
        result_.terminal = terminal_;
        result_.mean_abs_yaw_rate_dps = sum_abs_rate_ / step_count_;
        result_.mean_roll_deg = sum_roll_ / step_count_;
        result_.mean_pitch_deg = sum_pitch_ / step_count_;
        has_result_ = true;
    }
    return out;
}

const EpisodeResult& NavEnv::result() const {
    if (!has_result_) throw std::logic_error("NavEnv::result: episode not finished");
    return result_;
}

}  // namespace deeprotor
