#pragma once

#include <vector>

#include "deeprotor/geometry.hpp"
#include "deeprotor/rng.hpp"

namespace deeprotor {

// Planar pose of the kinematic vehicle plus the emulated attitude used for
// the flight logs.  z is the fixed flight altitude.
struct QuadState {
    double x = 0.0;
    double y = 0.0;
    double z = kFlightAltitude;
    double yaw_deg = 0.0;  // [0, 360)
    double forward_speed = 2.0;
    double roll_deg = 0.0;
    double pitch_deg = 0.0;
    double heading_bias_deg = 0.0;  // accumulated drift
};

struct ActionSpace {
    enum class Mode { YawRate, LateralRoll };
    Mode mode = Mode::YawRate;
    std::vector<double> yaw_rates_dps = {-10.0, -5.0, 0.0, 5.0, 10.0};
    std::vector<double> roll_angles_deg = {-15.0, 0.0, 15.0};

    int size() const {
        return static_cast<int>(mode == Mode::YawRate ? yaw_rates_dps.size() : roll_angles_deg.size());
    }
    // Commanded magnitude of action i normalized by the largest in the set.
    double normalized_magnitude(int i) const;
};

struct NoiseModel {
    double yaw_rate_sigma_dps = 0.5;
    double speed_sigma = 0.05;
    double heading_drift_rate_dps = 0.2;  // constant bias
};

struct AttitudeCoeffs {
    double k_roll = 2.0;        // degrees of roll per deg/s of yaw rate
    double k_pitch = 2.5;       // degrees of pitch per m/s of forward speed
    double roll_clamp_deg = 30.0;
    double lateral_gain = 0.1;  // m/s of lateral velocity per degree of roll
};

// One dt of kinematics.  YawRate mode integrates the noisy rate into the
// heading and moves along the new heading; LateralRoll mode keeps the yaw
// fixed and adds a roll-proportional lateral velocity.  corrective_rate_dps
// is the heading-hold term, added to the commanded rate before integration.
QuadState apply_action(const QuadState& state, int action_index, const ActionSpace& space,
                       const NoiseModel& noise, double dt, Rng& rng,
                       const AttitudeCoeffs& coeffs = {}, double corrective_rate_dps = 0.0);

// Proportional drift correction: -gain * wrapped(yaw - target), wrapped into
// (-180, 180].
double heading_hold_correction(const QuadState& state, double target_yaw_deg, double gain);

// roll = clamp(k_roll * yaw_rate, +-roll_clamp); pitch = -k_pitch * speed.
// Logging fidelity only; never fed back into the motion.
void emulate_attitude(double commanded_yaw_rate_dps, double forward_speed, const AttitudeCoeffs& coeffs,
                      double& roll_deg, double& pitch_deg);

}  // namespace deeprotor
