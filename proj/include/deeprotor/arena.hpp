#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deeprotor/geometry.hpp"

namespace deeprotor {

// Vertical extrusions from the ground plane.  Box footprints are axis
// aligned; heights are measured from z = 0.
struct BoxObstacle {
    double cx = 0.0, cy = 0.0;
    double hx = 0.0, hy = 0.0;  // half extents
    double height = 0.0;
    bool operator==(const BoxObstacle&) const = default;
};

struct CylinderObstacle {
    double cx = 0.0, cy = 0.0;
    double radius = 0.0;
    double height = 0.0;
    bool operator==(const CylinderObstacle&) const = default;
};

struct Obstacle {
    enum class Kind { Box, Cylinder };
    Kind kind = Kind::Box;
    BoxObstacle box;
    CylinderObstacle cylinder;

    static Obstacle make_box(double cx, double cy, double hx, double hy, double height) {
        Obstacle o;
        o.kind = Kind::Box;
        o.box = {cx, cy, hx, hy, height};
        return o;
    }
    static Obstacle make_cylinder(double cx, double cy, double radius, double height) {
        Obstacle o;
        o.kind = Kind::Cylinder;
        o.cylinder = {cx, cy, radius, height};
        return o;
    }
    bool operator==(const Obstacle&) const = default;
};

struct Checkpoint {
    double x = 0.0, y = 0.0;
    double radius = 0.0;
    bool operator==(const Checkpoint&) const = default;
};

struct StartPose {
    double x = 0.0, y = 0.0;
    double yaw_deg = 0.0;
    bool operator==(const StartPose&) const = default;
};

struct Goal {
    double x = 0.0, y = 0.0;
    double radius = 1.0;
    bool operator==(const Goal&) const = default;
};

struct Bounds {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool contains(double x, double y) const {
        return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
    }
    bool operator==(const Bounds&) const = default;
};

// Index tag for collisions against the arena boundary walls.
inline constexpr int kBoundaryIndex = -1;

struct CollisionInfo {
    Vec3 position;        // contact point on the obstacle surface
    Vec3 normal;          // unit, from obstacle surface toward vehicle center
    double penetration_depth = 0.0;
    int obstacle_index = 0;  // >= 0 obstacle list index, kBoundaryIndex for walls
};

// Immutable after construction; all operations on it are pure.
struct Arena {
    std::string name = "arena";
    Bounds bounds;
    std::vector<Obstacle> obstacles;
    StartPose start;
    Goal goal;
    std::vector<Checkpoint> checkpoints;
    double wall_height = 5.0;
    bool boundary_is_wall = true;

    bool operator==(const Arena&) const = default;
};

// Parse the line-oriented arena text format.  Throws std::runtime_error with
// a line number on syntax errors and a semantic message otherwise.
//
// Directives (whitespace separated, '#' starts a comment, lengths in meters,
// angles in degrees):
//   arena <name>
//   bounds <xmin> <ymin> <xmax> <ymax>
//   wallheight <h>
//   box <cx> <cy> <hx> <hy> <height>
//   cylinder <cx> <cy> <r> <height>
//   start <x> <y> <yaw_deg>
//   goal <x> <y> <radius>
//   checkpoint <x> <y> <radius>       (repeatable, order significant)
Arena parse_arena(const std::string& text);

std::string serialize_arena(const Arena& arena);

Arena load_arena_file(const std::string& path);

// Validate every Arena invariant (bounds, obstacle placement, start/goal
// clearance at the vehicle radius).  parse_arena and the builders call this;
// exposed for arenas constructed in code.
void validate_arena(const Arena& arena);

// Rectangular arena with box obstacles on a jittered grid, start fixed at the
// center.  Deterministic in seed.
Arena build_blocks_arena(double spacing, int block_count, uint64_t seed);

enum class WobblesZone { A, B, C, D };

// Hand-designed training zones: A sparse cylinders, B staggered short walls,
// C a corridor with two 90-degree turns, D a congested mix with an ordered
// checkpoint chain.  seed jitters obstacle placement within safe margins.
Arena build_wobbles_zone(WobblesZone zone, uint64_t seed);

// Deepest-penetration sphere-vs-scene test.  Returns nullopt when the sphere
// of the given radius touches nothing (tangent contact does not count).
std::optional<CollisionInfo> check_collision(const Arena& arena, const Vec3& center, double radius);

// Distance along the ray to the nearest hit among obstacles, ground plane and
// boundary walls; max_range when nothing is hit.  direction must be unit.
double ray_intersect(const Arena& arena, const Vec3& origin, const Vec3& direction, double max_range);

}  // namespace deeprotor
