#pragma once

#include <cmath>
#include <variant>
#include <vector>

#include "lanekeep/errors.hpp"
#include "lanekeep/geometry.hpp"
#include "lanekeep/vehicle.hpp"

namespace lanekeep {

struct StraightSegment {
    double length = 0.0; // m
};

struct ArcSegment {
    double radius = 0.0; // m, > 0
    double angle = 0.0;  // rad, signed; + turns counterclockwise

    double length() const { return radius * std::abs(angle); }
};

using RoadSegment = std::variant<StraightSegment, ArcSegment>;

struct RoadPose {
    Vec2 center;
    double tangent = 0.0; // rad
};

// Piecewise straight/arc centerline starting at the origin heading +x.
// Tangents are continuous across joints by construction.
struct RoadModel {
    std::vector<RoadSegment> segments;
    double lane_width = 0.35;     // m
    double line_thickness = 0.02; // m

    double total_length() const {
        double sum = 0.0;
        for (const auto& seg : segments)
            sum += std::holds_alternative<StraightSegment>(seg)
                       ? std::get<StraightSegment>(seg).length
                       : std::get<ArcSegment>(seg).length();
        return sum;
    }
};

// Exact closed-form pose at the given arclength.
inline RoadPose road_pose(const RoadModel& road, double arclength) {
    if (arclength < -1e-9) throw OutOfRoad("road_pose: negative arclength");
    Vec2 p{0.0, 0.0};
    double tangent = 0.0;
    double s = std::max(0.0, arclength);

    for (const auto& seg : road.segments) {
        if (std::holds_alternative<StraightSegment>(seg)) {
            const double len = std::get<StraightSegment>(seg).length;
            if (s <= len + 1e-9) {
                const double u = std::min(s, len);
                return {p + unit_vector(tangent) * u, tangent};
            }
            p = p + unit_vector(tangent) * len;
            s -= len;
        } else {
            const auto& arc = std::get<ArcSegment>(seg);
            const double len = arc.length();
            const double side = arc.angle >= 0.0 ? 1.0 : -1.0;
            const Vec2 c = p + left_normal(tangent) * (arc.radius * side);
            if (s <= len + 1e-9) {
                const double u = std::min(s, len);
                const double turned = side * u / arc.radius;
                const double t2 = tangent + turned;
                return {c - left_normal(t2) * (arc.radius * side), t2};
            }
            tangent += arc.angle;
            p = c - left_normal(tangent) * (arc.radius * side);
            s -= len;
        }
    }
    throw OutOfRoad("road_pose: arclength beyond road end");
}

struct LateralState {
    double offset = 0.0;           // m, signed; + along the tangent's left normal
    double heading_rel_road = 0.0; // rad, wrapped to (-pi, pi]
    double arclength = 0.0;        // m
};

namespace detail {

inline double centerline_dist2(const RoadModel& road, double s, const Vec2& p) {
    const RoadPose rp = road_pose(road, s);
    const Vec2 d = p - rp.center;
    return d.dot(d);
}

} // namespace detail

// Projects the vehicle onto the centerline: coarse scan of the arclength,
// then golden-section refinement of the bracketing interval down to 1e-4 m.
// Throws OffRoad when the vehicle is more than 2 lane widths from the
// centerline.
inline LateralState lateral_state(const RoadModel& road, const VehicleState& v) {
    const double total = road.total_length();
    const Vec2 p{v.x, v.y};

    const double coarse = 0.02;
    const int n = std::max(2, static_cast<int>(total / coarse) + 1);
    double best_s = 0.0, best_d = detail::centerline_dist2(road, 0.0, p);
    for (int i = 1; i <= n; ++i) {
        const double s = total * i / n;
        const double d = detail::centerline_dist2(road, s, p);
        if (d < best_d) {
            best_d = d;
            best_s = s;
        }
    }

    double lo = std::max(0.0, best_s - total / n);
    double hi = std::min(total, best_s + total / n);
    const double gr = 0.6180339887498949;
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = detail::centerline_dist2(road, a, p);
    double fb = detail::centerline_dist2(road, b, p);
    while (hi - lo > 1e-4) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = detail::centerline_dist2(road, a, p);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = detail::centerline_dist2(road, b, p);
        }
    }
    const double s_star = 0.5 * (lo + hi);
    const RoadPose rp = road_pose(road, s_star);

    LateralState out;
    out.arclength = s_star;
    out.offset = (p - rp.center).dot(left_normal(rp.tangent));
    out.heading_rel_road = wrap_angle(v.heading - rp.tangent);
    if (std::abs(out.offset) > 2.0 * road.lane_width)
        throw OffRoad("lateral_state: vehicle beyond 2 lane widths from centerline");
    return out;
}

} // namespace lanekeep
