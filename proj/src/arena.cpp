#include "deeprotor/arena.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "deeprotor/rng.hpp"

namespace deeprotor {

namespace {

constexpr double kTiny = 1e-12;
constexpr double kWallThickness = 1.0;

std::array<BoxObstacle, 4> boundary_wall_boxes(const Arena& a) {
    const Bounds& b = a.bounds;
    const double t = kWallThickness;
    const double mx = (b.xmin + b.xmax) / 2.0;
    const double my = (b.ymin + b.ymax) / 2.0;
    const double hx = b.width() / 2.0 + t;   // overhang covers the corners
    const double hy = b.height() / 2.0 + t;
    return {
        BoxObstacle{b.xmin - t / 2.0, my, t / 2.0, hy, a.wall_height},  // west
        BoxObstacle{b.xmax + t / 2.0, my, t / 2.0, hy, a.wall_height},  // east
        BoxObstacle{mx, b.ymin - t / 2.0, hx, t / 2.0, a.wall_height},  // south
        BoxObstacle{mx, b.ymax + t / 2.0, hx, t / 2.0, a.wall_height},  // north
    };
}

// ---------------------------------------------------------------------------
// sphere-vs-primitive penetration
// ---------------------------------------------------------------------------

std::optional<CollisionInfo> sphere_box(const BoxObstacle& b, const Vec3& p, double r) {
    const double x0 = b.cx - b.hx, x1 = b.cx + b.hx;
    const double y0 = b.cy - b.hy, y1 = b.cy + b.hy;
    const Vec3 cp{std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1), std::clamp(p.z, 0.0, b.height)};
    const Vec3 d = p - cp;
    const double dist = d.norm();
    if (dist > 0.0) {
        const double pen = r - dist;
        if (pen <= 0.0) return std::nullopt;
        return CollisionInfo{cp, d * (1.0 / dist), pen, 0};
    }
    // Center inside the solid: exit through the nearest face.
    struct Face {
        double d;
        Vec3 n;
    };
    const std::array<Face, 6> faces{{{p.x - x0, {-1, 0, 0}},
                                     {x1 - p.x, {1, 0, 0}},
                                     {p.y - y0, {0, -1, 0}},
                                     {y1 - p.y, {0, 1, 0}},
                                     {p.z - 0.0, {0, 0, -1}},
                                     {b.height - p.z, {0, 0, 1}}}};
    const Face* best = &faces[0];
    for (const Face& f : faces)
        if (f.d < best->d) best = &f;
    return CollisionInfo{p + best->n * best->d, best->n, r + best->d, 0};
}

std::optional<CollisionInfo> sphere_cylinder(const CylinderObstacle& c, const Vec3& p, double r) {
    const double rx = p.x - c.cx, ry = p.y - c.cy;
    const double rd = std::sqrt(rx * rx + ry * ry);
    const bool inside = rd < c.radius && p.z >= 0.0 && p.z <= c.height;
    if (!inside) {
        const double rad = std::min(rd, c.radius);
        Vec3 cp{c.cx, c.cy, std::clamp(p.z, 0.0, c.height)};
        if (rd > 0.0) {
            cp.x += rx / rd * rad;
            cp.y += ry / rd * rad;
        }
        const Vec3 d = p - cp;
        const double dist = d.norm();
        if (dist <= 0.0 || r - dist <= 0.0) return std::nullopt;
        return CollisionInfo{cp, d * (1.0 / dist), r - dist, 0};
    }
    // Inside the solid: nearest of side wall, top, bottom.
    const double side = c.radius - rd;
    const double top = c.height - p.z;
    const double bottom = p.z;
    if (side <= top && side <= bottom) {
        Vec3 n{1, 0, 0};
        if (rd > 0.0) n = {rx / rd, ry / rd, 0.0};
        return CollisionInfo{{c.cx + n.x * c.radius, c.cy + n.y * c.radius, p.z}, n, r + side, 0};
    }
    if (top <= bottom) return CollisionInfo{{p.x, p.y, c.height}, {0, 0, 1}, r + top, 0};
    return CollisionInfo{{p.x, p.y, 0.0}, {0, 0, -1}, r + bottom, 0};
}

// ---------------------------------------------------------------------------
// ray-vs-primitive, first positive hit
// ---------------------------------------------------------------------------

void ray_box(const BoxObstacle& b, const Vec3& o, const Vec3& d, double& best) {
    const double x0 = b.cx - b.hx, x1 = b.cx + b.hx;
    const double y0 = b.cy - b.hy, y1 = b.cy + b.hy;
    if (std::abs(d.x) > kTiny) {
        for (const double px : {x0, x1}) {
            const double t = (px - o.x) / d.x;
            if (t <= kTiny || t >= best) continue;
            const double y = o.y + t * d.y, z = o.z + t * d.z;
            if (y >= y0 && y <= y1 && z >= 0.0 && z <= b.height) best = t;
        }
    }
    if (std::abs(d.y) > kTiny) {
        for (const double py : {y0, y1}) {
            const double t = (py - o.y) / d.y;
            if (t <= kTiny || t >= best) continue;
            const double x = o.x + t * d.x, z = o.z + t * d.z;
            if (x >= x0 && x <= x1 && z >= 0.0 && z <= b.height) best = t;
        }
    }
    if (std::abs(d.z) > kTiny) {
        const double t = (b.height - o.z) / d.z;
        if (t > kTiny && t < best) {
            const double x = o.x + t * d.x, y = o.y + t * d.y;
            if (x >= x0 && x <= x1 && y >= y0 && y <= y1) best = t;
        }
    }
}

void ray_cylinder(const CylinderObstacle& c, const Vec3& o, const Vec3& d, double& best) {
    const double horiz2 = d.x * d.x + d.y * d.y;
    if (horiz2 > kTiny * kTiny) {
        // Closest-approach form of the circle intersection in the xy plane.
        const double inv = 1.0 / std::sqrt(horiz2);
        const double ux = d.x * inv, uy = d.y * inv;
        const double mx = c.cx - o.x, my = c.cy - o.y;
        const double along = mx * ux + my * uy;
        const double perp2 = mx * mx + my * my - along * along;
        const double r2 = c.radius * c.radius;
        if (perp2 <= r2) {
            const double half = std::sqrt(r2 - perp2);
            for (const double s : {along - half, along + half}) {
                const double t = s * inv;
                if (t <= kTiny || t >= best) continue;
                const double z = o.z + t * d.z;
                if (z >= 0.0 && z <= c.height) best = t;
            }
        }
    }
    if (std::abs(d.z) > kTiny) {  // top cap
        const double t = (c.height - o.z) / d.z;
        if (t > kTiny && t < best) {
            const double x = o.x + t * d.x - c.cx, y = o.y + t * d.y - c.cy;
            if (x * x + y * y <= c.radius * c.radius) best = t;
        }
    }
}

void ray_obstacle(const Obstacle& ob, const Vec3& o, const Vec3& d, double& best) {
    if (ob.kind == Obstacle::Kind::Box)
        ray_box(ob.box, o, d, best);
    else
        ray_cylinder(ob.cylinder, o, d, best);
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& tok, int line) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        parse_fail(line, "invalid number '" + tok + "'");
    }
    if (pos != tok.size()) parse_fail(line, "invalid number '" + tok + "'");
    return v;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::optional<CollisionInfo> check_collision(const Arena& arena, const Vec3& center, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("check_collision: radius must be > 0");
    std::optional<CollisionInfo> deepest;
    auto consider = [&](std::optional<CollisionInfo> hit, int index) {
        if (!hit) return;
        hit->obstacle_index = index;
        if (!deepest || hit->penetration_depth > deepest->penetration_depth) deepest = hit;
    };
    for (size_t i = 0; i < arena.obstacles.size(); ++i) {
        const Obstacle& ob = arena.obstacles[i];
        if (ob.kind == Obstacle::Kind::Box)
            consider(sphere_box(ob.box, center, radius), static_cast<int>(i));
        else
            consider(sphere_cylinder(ob.cylinder, center, radius), static_cast<int>(i));
    }
    if (arena.boundary_is_wall) {
        for (const BoxObstacle& wall : boundary_wall_boxes(arena))
            consider(sphere_box(wall, center, radius), kBoundaryIndex);
    }
    return deepest;
}

double ray_intersect(const Arena& arena, const Vec3& origin, const Vec3& direction, double max_range) {
    if (max_range <= 0.0) throw std::invalid_argument("ray_intersect: max_range must be > 0");
    double best = max_range;
    for (const Obstacle& ob : arena.obstacles) ray_obstacle(ob, origin, direction, best);
    if (arena.boundary_is_wall) {
        for (const BoxObstacle& wall : boundary_wall_boxes(arena)) ray_box(wall, origin, direction, best);
    }
    if (direction.z < -kTiny) {  // ground plane
        const double t = -origin.z / direction.z;
        if (t > kTiny && t < best) best = t;
    }
    return best;
}

void validate_arena(const Arena& arena) {
    auto fail = [](const std::string& msg) { throw std::runtime_error(msg); };
    const Bounds& b = arena.bounds;
    if (!(b.width() > 0.0) || !(b.height() > 0.0)) fail("bounds must have positive width and height");
    if (!(arena.wall_height > 0.0)) fail("wallheight must be > 0");
    if (!(arena.goal.radius > 0.0)) fail("goal radius must be > 0");
    for (const Checkpoint& cp : arena.checkpoints)
        if (!(cp.radius > 0.0)) fail("checkpoint radius must be > 0");

    for (size_t i = 0; i < arena.obstacles.size(); ++i) {
        const Obstacle& ob = arena.obstacles[i];
        const std::string tag = "obstacle " + std::to_string(i);
        if (ob.kind == Obstacle::Kind::Box) {
            const BoxObstacle& bx = ob.box;
            if (!(bx.hx > 0.0 && bx.hy > 0.0 && bx.height > 0.0)) fail(tag + ": extents must be > 0");
            if (bx.cx - bx.hx < b.xmin || bx.cx + bx.hx > b.xmax || bx.cy - bx.hy < b.ymin ||
                bx.cy + bx.hy > b.ymax)
                fail(tag + ": obstacle outside bounds");
        } else {
            const CylinderObstacle& cy = ob.cylinder;
            if (!(cy.radius > 0.0 && cy.height > 0.0)) fail(tag + ": extents must be > 0");
            if (cy.cx - cy.radius < b.xmin || cy.cx + cy.radius > b.xmax || cy.cy - cy.radius < b.ymin ||
                cy.cy + cy.radius > b.ymax)
                fail(tag + ": obstacle outside bounds");
        }
    }

    if (!b.contains(arena.start.x, arena.start.y)) fail("start outside bounds");
    if (!b.contains(arena.goal.x, arena.goal.y)) fail("goal outside bounds");
    if (check_collision(arena, {arena.start.x, arena.start.y, kFlightAltitude}, kVehicleRadius))
        fail("start in collision");
    if (check_collision(arena, {arena.goal.x, arena.goal.y, kFlightAltitude}, kVehicleRadius))
        fail("goal in collision");
}

Arena parse_arena(const std::string& text) {
    Arena arena;
    bool saw_bounds = false, saw_start = false, saw_goal = false;
    std::istringstream stream(text);
    std::string line;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        auto want = [&](size_t n) {
            if (tok.size() != n + 1)
                parse_fail(lineno, "'" + tok[0] + "' expects " + std::to_string(n) + " arguments");
        };
        auto num = [&](size_t i) { return parse_number(tok[i], lineno); };

        if (tok[0] == "arena") {
            want(1);
            arena.name = tok[1];
        } else if (tok[0] == "bounds") {
            want(4);
            arena.bounds = {num(1), num(2), num(3), num(4)};
            saw_bounds = true;
        } else if (tok[0] == "wallheight") {
            want(1);
            arena.wall_height = num(1);
        } else if (tok[0] == "box") {
            want(5);
            arena.obstacles.push_back(Obstacle::make_box(num(1), num(2), num(3), num(4), num(5)));
        } else if (tok[0] == "cylinder") {
            want(4);
            arena.obstacles.push_back(Obstacle::make_cylinder(num(1), num(2), num(3), num(4)));
        } else if (tok[0] == "start") {
            want(3);
            arena.start = {num(1), num(2), num(3)};
            saw_start = true;
        } else if (tok[0] == "goal") {
            want(3);
            arena.goal = {num(1), num(2), num(3)};
            saw_goal = true;
        } else if (tok[0] == "checkpoint") {
            want(3);
            arena.checkpoints.push_back({num(1), num(2), num(3)});
        } else {
            parse_fail(lineno, "unknown directive '" + tok[0] + "'");
        }
    }
    if (!saw_bounds) throw std::runtime_error("bounds required");
    if (!saw_start) throw std::runtime_error("start required");
    if (!saw_goal) throw std::runtime_error("goal required");
    validate_arena(arena);
    return arena;
}

std::string serialize_arena(const Arena& arena) {
    std::ostringstream out;
    out << "arena " << arena.name << "\n";
    out << "bounds " << fmt(arena.bounds.xmin) << " " << fmt(arena.bounds.ymin) << " "
        << fmt(arena.bounds.xmax) << " " << fmt(arena.bounds.ymax) << "\n";
    out << "wallheight " << fmt(arena.wall_height) << "\n";
    for (const Obstacle& ob : arena.obstacles) {
        if (ob.kind == Obstacle::Kind::Box) {
            const BoxObstacle& bx = ob.box;
            out << "box " << fmt(bx.cx) << " " << fmt(bx.cy) << " " << fmt(bx.hx) << " " << fmt(bx.hy)
                << " " << fmt(bx.height) << "\n";
        } else {
            const CylinderObstacle& cy = ob.cylinder;
            out << "cylinder " << fmt(cy.cx) << " " << fmt(cy.cy) << " " << fmt(cy.radius) << " "
                << fmt(cy.height) << "\n";
        }
    }
    out << "start " << fmt(arena.start.x) << " " << fmt(arena.start.y) << " " << fmt(arena.start.yaw_deg)
        << "\n";
    out << "goal " << fmt(arena.goal.x) << " " << fmt(arena.goal.y) << " " << fmt(arena.goal.radius)
        << "\n";
    for (const Checkpoint& cp : arena.checkpoints)
        out << "checkpoint " << fmt(cp.x) << " " << fmt(cp.y) << " " << fmt(cp.radius) << "\n";
    return out.str();
}

Arena load_arena_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open arena file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_arena(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

Arena build_blocks_arena(double spacing, int block_count, uint64_t seed) {
    if (!(spacing > 4.0 * kVehicleRadius))
        throw std::invalid_argument("blocks: spacing must exceed twice the vehicle diameter");
    if (block_count < 0) throw std::invalid_argument("blocks: block_count must be >= 0");

    constexpr double kSide = 60.0;
    Arena arena;
    arena.name = "blocks";
    arena.bounds = {-kSide / 2.0, -kSide / 2.0, kSide / 2.0, kSide / 2.0};
    arena.wall_height = 8.0;
    arena.start = {0.0, 0.0, 0.0};

    const int n = static_cast<int>(kSide / spacing);
    const double offset = (kSide - n * spacing) / 2.0;
    auto cell_center = [&](int i) { return -kSide / 2.0 + offset + spacing / 2.0 + i * spacing; };

    Rng rng(seed);
    // Goal on the east edge, row picked by seed.
    const double gx = cell_center(n - 1);
    const double gy = cell_center(rng.next_int(n));
    arena.goal = {gx, gy, 1.5};

    std::vector<Vec2> cells;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec2 c{cell_center(i), cell_center(j)};
            if ((c - Vec2{arena.start.x, arena.start.y}).norm() < spacing) continue;
            if ((c - Vec2{gx, gy}).norm() < spacing) continue;
            cells.push_back(c);
        }
    }
    if (block_count > static_cast<int>(cells.size()))
        throw std::invalid_argument("blocks: block_count infeasible for bounds at given spacing");

    for (int i = static_cast<int>(cells.size()) - 1; i > 0; --i)
        std::swap(cells[i], cells[rng.next_int(i + 1)]);

    const double jitter = 0.15 * spacing;
    const double half = 0.18 * spacing;
    for (int k = 0; k < block_count; ++k) {
        const double cx = cells[k].x + rng.uniform(-jitter, jitter);
        const double cy = cells[k].y + rng.uniform(-jitter, jitter);
        arena.obstacles.push_back(Obstacle::make_box(cx, cy, half, half, arena.wall_height));
    }
    validate_arena(arena);
    return arena;
}

Arena build_wobbles_zone(WobblesZone zone, uint64_t seed) {
    Rng rng(seed);
    auto jit = [&] { return rng.uniform(-0.3, 0.3); };
    Arena a;
    a.wall_height = 5.0;
    switch (zone) {
        case WobblesZone::A:
            // Sparse pillars sitting on the start-goal line.
            a.name = "wobbles-a";
            a.bounds = {-15, -8, 15, 8};
            a.start = {-12, 0, 0};
            a.goal = {12, 0, 1.5};
            a.obstacles.push_back(Obstacle::make_cylinder(-4 + jit(), 0 + jit(), 1.0, 5.0));
            a.obstacles.push_back(Obstacle::make_cylinder(4 + jit(), 0 + jit(), 1.0, 5.0));
            break;
        case WobblesZone::B:
            // Staggered short walls across a south-to-north lane.
            a.name = "wobbles-b";
            a.bounds = {-8, -12, 8, 12};
            a.start = {0, -10, 90};
            a.goal = {0, 10, 1.5};
            a.obstacles.push_back(Obstacle::make_box(-2 + jit(), -5 + jit(), 3.0, 0.5, 2.5));
            a.obstacles.push_back(Obstacle::make_box(2 + jit(), 0 + jit(), 3.0, 0.5, 2.5));
            a.obstacles.push_back(Obstacle::make_box(-2 + jit(), 5 + jit(), 3.0, 0.5, 2.5));
            break;
        case WobblesZone::C:
            // Ring corridor around a core block; the short route makes two
            // 90-degree turns.
            a.name = "wobbles-c";
            a.bounds = {-10, -10, 10, 10};
            a.start = {-8, -8, 0};
            a.goal = {-8, 8, 1.5};
            a.obstacles.push_back(Obstacle::make_box(0 + jit(), 0 + jit(), 6.0, 6.0, 5.0));
            a.checkpoints.push_back({8, -8, 1.5});
            a.checkpoints.push_back({8, 8, 1.5});
            break;
        case WobblesZone::D:
            // Congested mix with an ordered checkpoint chain along a
            // collision-free diagonal route.
            a.name = "wobbles-d";
            a.bounds = {-15, -15, 15, 15};
            a.start = {-12, -12, 45};
            a.goal = {12, 12, 1.5};
            a.checkpoints.push_back({-6, -9, 1.5});
            a.checkpoints.push_back({0, -5, 1.5});
            a.checkpoints.push_back({5, 1, 1.5});
            a.checkpoints.push_back({9, 7, 1.5});
            a.obstacles.push_back(Obstacle::make_cylinder(-9 + jit(), -4 + jit(), 1.0, 5.0));
            a.obstacles.push_back(Obstacle::make_cylinder(-2 + jit(), -11 + jit(), 1.0, 5.0));
            a.obstacles.push_back(Obstacle::make_cylinder(4 + jit(), -7 + jit(), 1.0, 5.0));
            a.obstacles.push_back(Obstacle::make_cylinder(-4 + jit(), 3 + jit(), 1.0, 5.0));
            a.obstacles.push_back(Obstacle::make_cylinder(1 + jit(), 6 + jit(), 1.0, 5.0));
            a.obstacles.push_back(Obstacle::make_cylinder(10 + jit(), 1 + jit(), 1.0, 5.0));
            a.obstacles.push_back(Obstacle::make_box(-10 + jit(), 2 + jit(), 2.0, 0.4, 2.5));
            a.obstacles.push_back(Obstacle::make_box(6 + jit(), 11 + jit(), 2.0, 0.4, 2.5));
            a.obstacles.push_back(Obstacle::make_box(12 + jit(), -5 + jit(), 2.0, 0.4, 2.5));
            break;
    }
    validate_arena(a);
    return a;
}

}  // namespace deeprotor
