#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "deeprotor/quad.hpp"

using namespace deeprotor;

namespace {

const NoiseModel kNoNoise{0.0, 0.0, 0.0};

QuadState state_at(double x, double y, double yaw, double speed = 2.0) {
    QuadState s;
    s.x = x;
    s.y = y;
    s.yaw_deg = yaw;
    s.forward_speed = speed;
    return s;
}

}  // namespace

TEST_CASE("apply_action integrates the commanded yaw rate exactly") {
    Rng rng(1);
    ActionSpace space;  // (-10,-5,0,5,10)
    const QuadState next = apply_action(state_at(0, 0, 0), 4, space, kNoNoise, 0.1, rng);
    CHECK(next.yaw_deg == 1.0);  // +10 deg/s over 0.1 s
}

TEST_CASE("apply_action moves along the heading") {
    Rng rng(1);
    ActionSpace space;

    const QuadState east = apply_action(state_at(0, 0, 0), 2, space, kNoNoise, 0.1, rng);
    CHECK(east.x == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(east.y == 0.0);

    const QuadState north = apply_action(state_at(0, 0, 90), 2, space, kNoNoise, 0.1, rng);
    CHECK(north.y == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(north.x == 0.0);
}

TEST_CASE("repeated turns accumulate exactly") {
    Rng rng(1);
    ActionSpace space;
    QuadState s = state_at(0, 0, 0);
    const int n = 1000;
    for (int i = 0; i < n; ++i) s = apply_action(s, 3, space, kNoNoise, 0.1, rng);  // +5 deg/s
    // 5 deg/s * 0.1 s = 0.5 degrees per step, an exact binary fraction.
    CHECK(s.yaw_deg == std::fmod(n * 0.5, 360.0));
}

TEST_CASE("forward speed magnitude is constant under yaw-rate mode") {
    Rng rng(9);
    ActionSpace space;
    QuadState s = state_at(3, -4, 77, 2.5);
    for (int i = 0; i < 50; ++i) {
        const QuadState n = apply_action(s, i % space.size(), space, kNoNoise, 0.1, rng);
        const double dist = std::hypot(n.x - s.x, n.y - s.y);
        CHECK(dist == doctest::Approx(2.5 * 0.1).epsilon(1e-12));
        s = n;
    }
}

TEST_CASE("lateral-roll mode never changes yaw") {
    Rng rng(5);
    ActionSpace space;
    space.mode = ActionSpace::Mode::LateralRoll;
    NoiseModel noisy{0.8, 0.1, 0.4};
    QuadState s = state_at(0, 0, 123.456);
    for (int i = 0; i < 200; ++i) {
        s = apply_action(s, i % 3, space, noisy, 0.1, rng);
        CHECK(s.yaw_deg == 123.456);
    }
}

TEST_CASE("lateral-roll mode maps roll to sideways motion") {
    Rng rng(5);
    ActionSpace space;
    space.mode = ActionSpace::Mode::LateralRoll;
    AttitudeCoeffs coeffs;  // lateral_gain 0.1 m/s per degree
    // Heading east, +15 degree roll banks right (toward -y).
    const QuadState s = apply_action(state_at(0, 0, 0), 2, space, kNoNoise, 0.1, rng, coeffs);
    CHECK(s.x == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.y == doctest::Approx(-0.15).epsilon(1e-12));
    CHECK(s.roll_deg == 15.0);
}

TEST_CASE("heading hold correction wraps the error") {
    CHECK(heading_hold_correction(state_at(0, 0, 90), 90, 1.0) == 0.0);
    CHECK(heading_hold_correction(state_at(0, 0, 100), 90, 1.0) == doctest::Approx(-10.0));
    // +350 degrees of offset is really -10: correct with +10 deg/s.
    CHECK(heading_hold_correction(state_at(0, 0, 80), 90, 1.0) == doctest::Approx(10.0));
    CHECK(heading_hold_correction(state_at(0, 0, 350.0 + 90.0 - 360.0), 90, 1.0) ==
          doctest::Approx(10.0));
    for (double off = -720; off <= 720; off += 7.0) {
        const double corr = heading_hold_correction(state_at(0, 0, 90 + off), 90, 2.0);
        double wrapped = std::fmod(off, 360.0);
        if (wrapped > 180.0) wrapped -= 360.0;
        if (wrapped <= -180.0) wrapped += 360.0;
        CHECK(corr == doctest::Approx(-2.0 * wrapped).epsilon(1e-12));
    }
    CHECK_THROWS_AS(heading_hold_correction(state_at(0, 0, 0), 0, 0.0), std::invalid_argument);
}

TEST_CASE("heading hold converges monotonically under repeated correction") {
    Rng rng(3);
    ActionSpace space;
    space.yaw_rates_dps = {0.0};
    const double target = 40.0;
    QuadState s = state_at(0, 0, target + 57.3);
    double prev = 57.3;
    int steps = 0;
    while (std::abs(prev) > 1e-6 && steps < 500) {
        const double corr = heading_hold_correction(s, target, 5.0);  // gain*dt = 0.5
        s = apply_action(s, 0, space, kNoNoise, 0.1, rng, {}, corr);
        double off = std::fmod(s.yaw_deg - target, 360.0);
        if (off > 180.0) off -= 360.0;
        CHECK(std::abs(off) < std::abs(prev));
        prev = off;
        ++steps;
    }
    CHECK(std::abs(prev) <= 1e-6);
}

TEST_CASE("emulate_attitude clamps roll and holds negative pitch") {
    double roll = 0, pitch = 0;
    emulate_attitude(0, 0, {}, roll, pitch);
    CHECK(roll == 0.0);
    CHECK(pitch == 0.0);

    AttitudeCoeffs coeffs;
    emulate_attitude(10, 2, coeffs, roll, pitch);  // k_roll 2
    CHECK(roll == doctest::Approx(20.0));
    CHECK(pitch == doctest::Approx(-5.0));  // k_pitch 2.5 at 2 m/s, pitched forward

    emulate_attitude(100, 2, coeffs, roll, pitch);
    CHECK(roll == 30.0);  // clamped at the paper's envelope
    emulate_attitude(-100, 2, coeffs, roll, pitch);
    CHECK(roll == -30.0);
}

TEST_CASE("apply_action validates its inputs") {
    Rng rng(1);
    ActionSpace space;
    CHECK_THROWS_AS(apply_action(state_at(0, 0, 0), 9, space, kNoNoise, 0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(apply_action(state_at(0, 0, 0), 0, space, kNoNoise, 0.0, rng), std::invalid_argument);
}

TEST_CASE("noise draws are deterministic in the rng seed") {
    ActionSpace space;
    NoiseModel noisy{0.5, 0.05, 0.2};
    Rng r1(77), r2(77);
    QuadState a = state_at(0, 0, 0), b = state_at(0, 0, 0);
    for (int i = 0; i < 20; ++i) {
        a = apply_action(a, 4, space, noisy, 0.1, r1);
        b = apply_action(b, 4, space, noisy, 0.1, r2);
    }
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.yaw_deg == b.yaw_deg);
    CHECK(a.heading_bias_deg == doctest::Approx(20 * 0.1 * 0.2));
}
