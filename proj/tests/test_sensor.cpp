#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "deeprotor/camera.hpp"
#include "deeprotor/rng.hpp"
#include "oracles.hpp"

using namespace deeprotor;

namespace {

Arena wall_scene(double face_x) {
    Arena a;
    a.bounds = {-100, -100, 100, 100};
    a.boundary_is_wall = false;
    a.obstacles.push_back(Obstacle::make_box(face_x + 5, 0, 5, 90, 50));  // near face at face_x
    return a;
}

}  // namespace

TEST_CASE("render_depth center pixel hits the wall squarely") {
    const Arena a = wall_scene(10.0);
    const CameraConfig cam{85, 85, 90.0, 40.0, 0.0};  // odd resolution puts a pixel on the axis
    const DepthImage img = render_depth(a, {0, 0, 2, 0}, cam);
    CHECK(img.at(42, 42) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("render_depth keeps depth-perspective semantics off axis") {
    const Arena a = wall_scene(10.0);
    const CameraConfig cam{85, 85, 90.0, 40.0, 0.0};
    const DepthImage img = render_depth(a, {0, 0, 2, 0}, cam);
    // Left-edge pixel on the optical row: depth = distance along the ray,
    // i.e. 10 / cos(angle to the axis), not the axial 10.
    const Vec3 dir = pixel_ray(cam, 0.0, 0, 42);
    const double angle = std::acos(dir.x);
    CHECK(angle > deg_to_rad(20.0));
    CHECK(img.at(0, 42) == doctest::Approx(10.0 / std::cos(angle)).epsilon(1e-12));
    CHECK(img.at(0, 42) > img.at(42, 42));
}

TEST_CASE("render_depth clamps above-horizon pixels in an empty arena") {
    Arena empty;
    empty.bounds = {-100, -100, 100, 100};
    empty.boundary_is_wall = false;
    const CameraConfig cam{84, 84, 90.0, 40.0, 0.0};
    const DepthImage img = render_depth(empty, {0, 0, 2, 0}, cam);
    for (int v = 0; v <= 41; ++v)  // rows with rays at or above the horizon
        for (int u = 0; u < cam.width; ++u) CHECK(img.at(u, v) == 40.0);
    // below-horizon rays eventually meet the ground
    CHECK(img.at(42, 83) < 40.0);
}

TEST_CASE("render_depth is deterministic") {
    const Arena a = wall_scene(12.0);
    const CameraConfig cam{32, 24, 75.0, 40.0, 0.0};
    const DepthImage i1 = render_depth(a, {1, 2, 2, 33}, cam);
    const DepthImage i2 = render_depth(a, {1, 2, 2, 33}, cam);
    CHECK(i1.data == i2.data);
}

TEST_CASE("render_depth matches the single-ray oracle per pixel") {
    Rng rng(4242);
    for (int trial = 0; trial < 8; ++trial) {
        Arena a;
        a.bounds = {-40, -40, 40, 40};
        a.boundary_is_wall = trial % 2 == 0;
        a.wall_height = 6.0;
        for (int i = 0; i < 4; ++i) {
            const double cx = rng.uniform(-25, 25), cy = rng.uniform(-25, 25);
            if (rng.bernoulli(0.5))
                a.obstacles.push_back(
                    Obstacle::make_box(cx, cy, rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0), 8.0));
            else
                a.obstacles.push_back(Obstacle::make_cylinder(cx, cy, rng.uniform(0.5, 3.0), 8.0));
        }
        const CameraConfig cam{21, 21, 90.0, 40.0, 0.0};
        const CameraPose pose{rng.uniform(-5, 5), rng.uniform(-5, 5), 2.0, rng.uniform(0, 360)};
        const DepthImage img = render_depth(a, pose, cam);
        for (int v = 0; v < cam.height; ++v) {
            for (int u = 0; u < cam.width; ++u) {
                const Vec3 dir = oracle::pixel_ray_reference(cam, pose.yaw_deg, u, v);
                const double want = oracle::ray_scene(a, {pose.x, pose.y, pose.z}, dir, cam.max_range);
                CHECK(std::abs(img.at(u, v) - want) <= 1e-9 * std::max(1.0, want));
            }
        }
    }
}

TEST_CASE("mirror symmetry: reflected scene gives the flipped image exactly") {
    Rng rng(17);
    for (int trial = 0; trial < 6; ++trial) {
        Arena a;
        a.bounds = {-40, -40, 40, 40};
        a.boundary_is_wall = false;
        for (int i = 0; i < 5; ++i) {
            const double cx = rng.uniform(2, 30), cy = rng.uniform(-20, 20);
            if (rng.bernoulli(0.5))
                a.obstacles.push_back(
                    Obstacle::make_box(cx, cy, rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0), 7.0));
            else
                a.obstacles.push_back(Obstacle::make_cylinder(cx, cy, rng.uniform(0.5, 2.5), 7.0));
        }
        Arena mirrored = a;  // reflect across the optical axis plane y = 0
        for (Obstacle& ob : mirrored.obstacles) {
            if (ob.kind == Obstacle::Kind::Box)
                ob.box.cy = -ob.box.cy;
            else
                ob.cylinder.cy = -ob.cylinder.cy;
        }
        const CameraConfig cam{28, 20, 90.0, 40.0, 0.0};
        const CameraPose pose{rng.uniform(-6, 0), 0.0, 2.0, 0.0};  // camera on the mirror plane
        const DepthImage img = render_depth(a, pose, cam);
        const DepthImage flip = render_depth(mirrored, pose, cam);
        for (int v = 0; v < cam.height; ++v)
            for (int u = 0; u < cam.width; ++u) CHECK(img.at(u, v) == flip.at(cam.width - 1 - u, v));
    }
}

TEST_CASE("normalize_depth scales into [0,1]") {
    DepthImage img;
    img.width = 3;
    img.height = 1;
    img.data = {40.0, 1e-9, 10.0};
    const ObservationTensor obs = normalize_depth(img, 40.0);
    CHECK(obs.data[0] == 1.0f);
    CHECK(obs.data[1] > 0.0f);
    CHECK(obs.data[1] < 1e-6f);
    CHECK(obs.data[2] == doctest::Approx(0.25));
    for (float v : obs.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("depth PGM output is valid P2") {
    const Arena a = wall_scene(10.0);
    const CameraConfig cam{84, 84, 90.0, 40.0, 0.0};
    const std::string pgm = depth_to_pgm(render_depth(a, {0, 0, 2, 0}, cam), cam.max_range);
    std::istringstream in(pgm);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P2");
    CHECK(w == 84);
    CHECK(h == 84);
    CHECK(maxval == 255);
    int count = 0, value = 0, lo = 255, hi = 0;
    while (in >> value) {
        ++count;
        lo = std::min(lo, value);
        hi = std::max(hi, value);
    }
    CHECK(count == 84 * 84);
    CHECK(lo >= 0);
    CHECK(hi <= 255);
}

TEST_CASE("render_depth validates its configuration") {
    const Arena a = wall_scene(10.0);
    CHECK_THROWS_AS(render_depth(a, {0, 0, 2, 0}, CameraConfig{1, 84, 90, 40, 0}), std::invalid_argument);
    CHECK_THROWS_AS(render_depth(a, {0, 0, 2, 0}, CameraConfig{84, 84, 190, 40, 0}), std::invalid_argument);
    CHECK_THROWS_AS(render_depth(a, {0, 0, 2, 0}, CameraConfig{84, 84, 90, -1, 0}), std::invalid_argument);
}
