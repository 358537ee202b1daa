#pragma once

#include <cmath>

namespace deeprotor {

inline constexpr double kPi = 3.14159265358979323846;

// Collision body of the vehicle and its fixed flight altitude.  The world is
// a 2.5-D extrusion field, so these two numbers are all the geometry modules
// need to know about the vehicle.
inline constexpr double kVehicleRadius = 0.5;
inline constexpr double kFlightAltitude = 2.0;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    bool operator==(const Vec2& o) const = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
    bool operator==(const Vec3& o) const = default;
};

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// Normalize an angle in degrees to [0, 360).
inline double wrap_deg_360(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    return w;
}

// Normalize an angle in degrees to (-180, 180].
inline double wrap_deg_180(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w > 180.0) w -= 360.0;
    if (w <= -180.0) w += 360.0;
    return w;
}

// Degree-argument trig that is exact on the cardinal directions, so that
// axis-aligned motion stays axis-aligned bit-for-bit.
inline double cos_deg(double deg) {
    const double w = wrap_deg_360(deg);
    if (w == 0.0) return 1.0;
    if (w == 90.0) return 0.0;
    if (w == 180.0) return -1.0;
    if (w == 270.0) return 0.0;
    return std::cos(deg_to_rad(w));
}

inline double sin_deg(double deg) {
    const double w = wrap_deg_360(deg);
    if (w == 0.0) return 0.0;
    if (w == 90.0) return 1.0;
    if (w == 180.0) return 0.0;
    if (w == 270.0) return -1.0;
    return std::sin(deg_to_rad(w));
}

// Euclidean distance from p to the closed segment [a, b].  a == b is not a
// segment; callers guarantee a != b.
inline double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double t = (p - a).dot(ab) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    const Vec2 closest = a + ab * t;
    return (p - closest).norm();
}

}  // namespace deeprotor
