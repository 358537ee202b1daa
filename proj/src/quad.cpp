#include "deeprotor/quad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeprotor {

double ActionSpace::normalized_magnitude(int i) const {
    const std::vector<double>& v = mode == Mode::YawRate ? yaw_rates_dps : roll_angles_deg;
    double max_abs = 0.0;
    for (double a : v) max_abs = std::max(max_abs, std::abs(a));
    if (max_abs == 0.0) return 0.0;
    return std::abs(v[i]) / max_abs;
}

QuadState apply_action(const QuadState& state, int action_index, const ActionSpace& space,
                       const NoiseModel& noise, double dt, Rng& rng, const AttitudeCoeffs& coeffs,
                       double corrective_rate_dps) {
    if (!(dt > 0.0)) throw std::invalid_argument("apply_action: dt must be > 0");
    if (action_index < 0 || action_index >= space.size())
        throw std::invalid_argument("apply_action: action index out of range");

    QuadState next = state;
    const double eps_speed = noise.speed_sigma > 0.0 ? rng.normal(0.0, noise.speed_sigma) : 0.0;
    const double speed = state.forward_speed + eps_speed;

    if (space.mode == ActionSpace::Mode::YawRate) {
        const double commanded = space.yaw_rates_dps[action_index] + corrective_rate_dps;
        const double eps_yaw = noise.yaw_rate_sigma_dps > 0.0 ? rng.normal(0.0, noise.yaw_rate_sigma_dps) : 0.0;
        const double rate = commanded + eps_yaw + noise.heading_drift_rate_dps;
        next.yaw_deg = wrap_deg_360(state.yaw_deg + rate * dt);
        next.heading_bias_deg = state.heading_bias_deg + noise.heading_drift_rate_dps * dt;
        // Position integrates along the new heading.
        next.x = state.x + speed * cos_deg(next.yaw_deg) * dt;
        next.y = state.y + speed * sin_deg(next.yaw_deg) * dt;
        emulate_attitude(commanded, state.forward_speed, coeffs, next.roll_deg, next.pitch_deg);
    } else {
        // Yaw is held exactly; the roll action maps to a lateral velocity.
        const double roll = space.roll_angles_deg[action_index];
        const double lateral = coeffs.lateral_gain * roll;  // +roll banks right
        const double fx = cos_deg(state.yaw_deg), fy = sin_deg(state.yaw_deg);
        const double rx = fy, ry = -fx;  // right of heading
        next.x = state.x + (speed * fx + lateral * rx) * dt;
        next.y = state.y + (speed * fy + lateral * ry) * dt;
        next.roll_deg = std::clamp(roll, -coeffs.roll_clamp_deg, coeffs.roll_clamp_deg);
        next.pitch_deg = -coeffs.k_pitch * state.forward_speed;
    }
    return next;
}

double heading_hold_correction(const QuadState& state, double target_yaw_deg, double gain) {
    if (!(gain > 0.0)) throw std::invalid_argument("heading_hold_correction: gain must be > 0");
    return -gain * wrap_deg_180(state.yaw_deg - target_yaw_deg);
}

void emulate_attitude(double commanded_yaw_rate_dps, double forward_speed, const AttitudeCoeffs& coeffs,
                      double& roll_deg, double& pitch_deg) {
    roll_deg = std::clamp(coeffs.k_roll * commanded_yaw_rate_dps, -coeffs.roll_clamp_deg,
                          coeffs.roll_clamp_deg);
    pitch_deg = -coeffs.k_pitch * forward_speed;
}

}  // namespace deeprotor
