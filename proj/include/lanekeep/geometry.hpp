#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace lanekeep {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Normal to the left of a direction (direction rotated +90 degrees CCW).
inline Vec2 left_normal(double angle) { return {-std::sin(angle), std::cos(angle)}; }

inline Vec2 rotate(const Vec2& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

struct AxisRect {
    double min_x = 0.0, min_y = 0.0;
    double max_x = 0.0, max_y = 0.0;

    bool contains(const Vec2& p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

// A rectangle with orientation: `center` is the geometric center, `heading`
// the long-axis direction, `length` along the heading, `width` across it.
struct OrientedRect {
    Vec2 center;
    double heading = 0.0;
    double length = 0.0;
    double width = 0.0;

    std::array<Vec2, 4> corners() const {
        const Vec2 f = unit_vector(heading) * (length * 0.5);
        const Vec2 n = left_normal(heading) * (width * 0.5);
        return {center + f + n, center + f - n, center - f - n, center - f + n};
    }
};

// Separating-axis overlap test between an oriented rectangle and an
// axis-aligned one. Touching boundaries count as disjoint.
inline bool rects_overlap(const OrientedRect& r, const AxisRect& a) {
    const auto cs = r.corners();

    // Axes of the AABB.
    {
        double lo = cs[0].x, hi = cs[0].x;
        for (const auto& c : cs) { lo = std::min(lo, c.x); hi = std::max(hi, c.x); }
        if (hi <= a.min_x || lo >= a.max_x) return false;
    }
    {
        double lo = cs[0].y, hi = cs[0].y;
        for (const auto& c : cs) { lo = std::min(lo, c.y); hi = std::max(hi, c.y); }
        if (hi <= a.min_y || lo >= a.max_y) return false;
    }

    // Axes of the oriented rectangle.
    const std::array<Vec2, 4> box = {Vec2{a.min_x, a.min_y}, Vec2{a.max_x, a.min_y},
                                     Vec2{a.max_x, a.max_y}, Vec2{a.min_x, a.max_y}};
    const Vec2 axes[2] = {unit_vector(r.heading), left_normal(r.heading)};
    const double half[2] = {r.length * 0.5, r.width * 0.5};
    for (int i = 0; i < 2; ++i) {
        const double c = r.center.dot(axes[i]);
        double lo = box[0].dot(axes[i]), hi = lo;
        for (const auto& p : box) {
            const double v = p.dot(axes[i]);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi <= c - half[i] || lo >= c + half[i]) return false;
    }
    return true;
}

} // namespace lanekeep
