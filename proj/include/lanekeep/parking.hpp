#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lanekeep/errors.hpp"
#include "lanekeep/geometry.hpp"
#include "lanekeep/vehicle.hpp"

namespace lanekeep {

// ---------------------------------------------------------------------------
// Sign-height distance model h(d) = a/d + b
// ---------------------------------------------------------------------------

struct SignHeightSample {
    double pixel_height = 0.0; // px
    double true_distance = 0.0; // m
};

struct DistanceModel {
    double a = 0.0; // px * m
    double b = 0.0; // px
    double d_min = 0.0;
    double d_max = 0.0;
};

// Least-squares fit of h = a/d + b, linear in (1/d, 1). Needs at least three
// samples at three distinct distances.
inline DistanceModel fit_sign_distance_model(const std::vector<SignHeightSample>& samples) {
    std::vector<double> dists;
    for (const auto& s : samples)
        if (std::find(dists.begin(), dists.end(), s.true_distance) == dists.end())
            dists.push_back(s.true_distance);
    if (samples.size() < 3 || dists.size() < 3)
        throw DegenerateSamples("fit_sign_distance_model: need >= 3 distinct distances");

    double suu = 0.0, su = 0.0, n = 0.0, suh = 0.0, sh = 0.0;
    for (const auto& s : samples) {
        if (s.true_distance <= 0.0 || s.pixel_height <= 0.0)
            throw DegenerateSamples("fit_sign_distance_model: non-positive sample");
        const double u = 1.0 / s.true_distance;
        suu += u * u;
        su += u;
        n += 1.0;
        suh += u * s.pixel_height;
        sh += s.pixel_height;
    }
    const double det = suu * n - su * su;
    if (std::abs(det) < 1e-12) throw DegenerateSamples("fit_sign_distance_model: singular fit");

    DistanceModel m;
    m.a = (suh * n - sh * su) / det;
    m.b = (suu * sh - su * suh) / det;
    if (m.a <= 0.0)
        throw DegenerateSamples("fit_sign_distance_model: height not decreasing with distance");
    m.d_min = *std::min_element(dists.begin(), dists.end());
    m.d_max = *std::max_element(dists.begin(), dists.end());
    return m;
}

struct DistanceEstimate {
    double distance = 0.0; // m
    bool range_clamped = false;
};

// Inverts the model: d = a / (h - b), clamped to the fitted range.
inline DistanceEstimate estimate_distance(const DistanceModel& m, double pixel_height) {
    if (pixel_height <= m.b)
        throw HeightBelowAsymptote("estimate_distance: height at or below asymptote");
    DistanceEstimate out;
    out.distance = m.a / (pixel_height - m.b);
    if (out.distance < m.d_min) {
        out.distance = m.d_min;
        out.range_clamped = true;
    } else if (out.distance > m.d_max) {
        out.distance = m.d_max;
        out.range_clamped = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Side-sensor range scan
// ---------------------------------------------------------------------------

inline constexpr double kRangeOutOfRange = 2000.0; // mm sentinel: no echo in reach

struct RangeSample {
    double odometry_s = 0.0; // m along the pass
    double range = 0.0;      // mm, (0, 2000]
};

struct RangeScan {
    std::vector<RangeSample> samples;
    double out_of_range_value = kRangeOutOfRange;
};

inline void write_scan_csv(const RangeScan& scan, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("scan: cannot write " + path.string());
    out << "odometry_m,range_mm\n";
    char buf[80];
    for (const auto& s : scan.samples) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", s.odometry_s, s.range);
        out << buf;
    }
}

inline RangeScan load_scan_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("scan: cannot open " + path.string());
    RangeScan scan;
    std::string line;
    if (!std::getline(in, line) || line.rfind("odometry_m,range_mm", 0) != 0)
        throw MalformedHeader("scan: expected header 'odometry_m,range_mm'");
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw TruncatedData("scan: bad row '" + line + "'");
        RangeSample s;
        s.odometry_s = std::stod(line.substr(0, comma));
        s.range = std::stod(line.substr(comma + 1));
        scan.samples.push_back(s);
    }
    return scan;
}

// Removes short noise spikes: a maximal run of consecutive samples that (a)
// has neighbors on both sides, (b) is at most max_spike_run long, (c) sits
// between flanking samples that agree with each other within spike_threshold,
// and (d) differs from both flanks by more than spike_threshold everywhere,
// is replaced by linear interpolation between the flanks. Longer runs are
// kept: they are obstacles, not noise. The 2000 sentinel takes part like any
// other value, so spikes inside an open gap get erased back to 2000.
//
// Passes repeat until nothing changes, which makes the operation idempotent;
// every replacement lowers the scan's total variation by more than the
// threshold, so the loop terminates.
inline RangeScan interpolate_scan(const RangeScan& scan, int max_spike_run,
                                  double spike_threshold = 300.0) {
    RangeScan out = scan;
    const int n = static_cast<int>(out.samples.size());
    if (n < 3) return out;

    for (int pass = 0; pass < 2 * n + 8; ++pass) {
        auto& v = out.samples;
        std::vector<std::pair<int, int>> spikes; // [i, j] inclusive

        int i = 0;
        while (i < n) {
            int j = i;
            while (j + 1 < n && std::abs(v[j + 1].range - v[j].range) <= spike_threshold) ++j;
            if (i > 0 && j < n - 1 && j - i + 1 <= max_spike_run) {
                const double fl = v[i - 1].range;
                const double fr = v[j + 1].range;
                bool is_spike = std::abs(fl - fr) <= spike_threshold;
                for (int k = i; is_spike && k <= j; ++k)
                    is_spike = std::abs(v[k].range - fl) > spike_threshold &&
                               std::abs(v[k].range - fr) > spike_threshold;
                if (is_spike) spikes.emplace_back(i, j);
            }
            i = j + 1;
        }
        if (spikes.empty()) break;

        // Replacements read pass-start values, so adjacent spike runs do not
        // see each other's mid-pass edits.
        const std::vector<RangeSample> before = v;
        for (const auto& [a, b] : spikes) {
            const double s0 = before[a - 1].odometry_s, r0 = before[a - 1].range;
            const double s1 = before[b + 1].odometry_s, r1 = before[b + 1].range;
            const double span = s1 - s0;
            for (int k = a; k <= b; ++k) {
                v[k].range = span > 1e-12
                                 ? r0 + (r1 - r0) * (v[k].odometry_s - s0) / span
                                 : 0.5 * (r0 + r1);
            }
        }
    }
    return out;
}

struct ParkingSpace {
    double start_s = 0.0; // m
    double end_s = 0.0;   // m
    double depth = 0.0;   // m, shallowest free reading across the gap
};

// First maximal run of readings at or beyond min_depth_mm (the 2000 sentinel
// qualifies) that spans at least min_length of odometry.
inline std::optional<ParkingSpace> detect_space(const RangeScan& scan, double min_length,
                                                double min_depth_mm) {
    const auto& v = scan.samples;
    const int n = static_cast<int>(v.size());
    int i = 0;
    while (i < n) {
        if (v[i].range < min_depth_mm) {
            ++i;
            continue;
        }
        int j = i;
        double depth = v[i].range;
        while (j + 1 < n && v[j + 1].range >= min_depth_mm) {
            ++j;
            depth = std::min(depth, v[j].range);
        }
        if (v[j].odometry_s - v[i].odometry_s >= min_length) {
            ParkingSpace space;
            space.start_s = v[i].odometry_s;
            space.end_s = v[j].odometry_s;
            space.depth = std::min(depth, kRangeOutOfRange) / 1000.0;
            return space;
        }
        i = j + 1;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Maneuver planning
// ---------------------------------------------------------------------------

struct VehicleGeometry {
    double wheelbase = 0.3;  // m
    double length = 0.45;    // m, bumper to bumper
    double width = 0.25;     // m
    double delta_max = 0.35; // rad

    double turning_radius() const { return wheelbase / std::tan(delta_max); }
    // Overhangs are split evenly front and rear around the axles.
    double rear_overhang() const { return 0.5 * (length - wheelbase); }
};

struct ManeuverSegment {
    double speed = 0.0;    // m/s, signed; negative reverses
    double delta = 0.0;    // rad
    double duration = 0.0; // s
};

struct ManeuverPlan {
    std::vector<ManeuverSegment> segments;
    VehicleState start_pose;        // pre-maneuver rear-axle pose the plan assumes
    VehicleState expected_final_pose;
};

// True when the oriented footprint centered on the pose overlaps any obstacle.
inline bool check_collision(const VehicleState& pose, double length, double width,
                            const std::vector<AxisRect>& obstacles) {
    const OrientedRect body{{pose.x, pose.y}, pose.heading, length, width};
    for (const auto& ob : obstacles)
        if (rects_overlap(body, ob)) return true;
    return false;
}

namespace detail {

// Body rectangle for a rear-axle pose.
inline OrientedRect body_rect(const VehicleState& rear_axle, const VehicleGeometry& veh) {
    const Vec2 c = Vec2{rear_axle.x, rear_axle.y} +
                   unit_vector(rear_axle.heading) * (veh.wheelbase * 0.5);
    return {c, rear_axle.heading, veh.length, veh.width};
}

inline bool pose_collides(const VehicleState& rear_axle, const VehicleGeometry& veh,
                          const std::vector<AxisRect>& obstacles, double inflate = 0.0) {
    const OrientedRect body = body_rect(rear_axle, veh);
    for (const auto& ob : obstacles) {
        AxisRect grown = ob;
        grown.min_x -= inflate;
        grown.min_y -= inflate;
        grown.max_x += inflate;
        grown.max_y += inflate;
        if (rects_overlap(body, grown)) return true;
    }
    return false;
}

inline std::array<Vec2, 4> body_corners(const VehicleState& rear_axle,
                                        const VehicleGeometry& veh) {
    return body_rect(rear_axle, veh).corners();
}

} // namespace detail

// Obstacle rectangles bounding a roadside space in the parking frame: the
// road runs along +x, the scan pass was driven on y = 0, the space lies at
// negative y. lateral_gap is the lateral translation from the pass lane to
// the parked centerline.
inline std::vector<AxisRect> parking_obstacles(const ParkingSpace& space, double lateral_gap,
                                               const VehicleGeometry& veh) {
    const double y_top = -lateral_gap + veh.width * 0.5;
    const double y_bot = -lateral_gap - veh.width * 0.5 - 0.5;
    std::vector<AxisRect> obs;
    obs.push_back({space.start_s - 3.0, y_bot, space.start_s, y_top}); // rear flank
    obs.push_back({space.end_s, y_bot, space.end_s + 3.0, y_top});     // front flank
    // Curb at the sensed depth.
    obs.push_back({space.start_s - 3.0, -space.depth - 1.0, space.end_s + 3.0, -space.depth});
    return obs;
}

namespace detail {

struct TwoArcGeometry {
    double radius = 0.0;
    double arc_angle = 0.0; // psi, each arc
    double long_travel = 0.0; // 2 R sin(psi), backward along the road
};

inline TwoArcGeometry two_arc_geometry(const VehicleGeometry& veh, double lateral_gap) {
    TwoArcGeometry g;
    g.radius = veh.turning_radius();
    const double c = 1.0 - lateral_gap / (2.0 * g.radius);
    if (c <= -1.0 || lateral_gap <= 0.0)
        throw SpaceTooSmall("plan_park_in: lateral gap beyond two-arc reach");
    g.arc_angle = std::acos(std::clamp(c, -1.0, 1.0));
    g.long_travel = 2.0 * g.radius * std::sin(g.arc_angle);
    return g;
}

// Samples the analytic two-arc + straighten path and reports whether it
// stays collision-free. Landing is snug against the rear flank with
// `rear_margin` of clearance; the straighten leg centers the body in the
// space when room allows.
inline bool park_in_path_clear(const ParkingSpace& space, const VehicleGeometry& veh,
                               double lateral_gap, double rear_margin, double inflate) {
    const TwoArcGeometry g = two_arc_geometry(veh, lateral_gap);
    const auto obstacles = parking_obstacles(space, lateral_gap, veh);

    const double x_land = space.start_s + veh.rear_overhang() + rear_margin;
    const double x_start = x_land + g.long_travel;
    const double parked_y = -lateral_gap;
    const double R = g.radius;

    const double dphi = deg_to_rad(0.25);
    // Arc 1: heading 0 -> psi, pivoting away from the start pose.
    for (double phi = 0.0; phi <= g.arc_angle + 1e-12; phi += dphi) {
        const VehicleState pose{x_start - R * std::sin(phi), -R * (1.0 - std::cos(phi)), phi, 0.0};
        if (pose_collides(pose, veh, obstacles, inflate)) return false;
    }
    // Arc 2: heading psi -> 0, closing onto the landing pose.
    for (double phi = g.arc_angle; phi >= -1e-12; phi -= dphi) {
        const VehicleState pose{x_land + R * std::sin(phi), parked_y + R * (1.0 - std::cos(phi)),
                                phi, 0.0};
        if (pose_collides(pose, veh, obstacles, inflate)) return false;
    }
    // Straighten leg.
    const double x_centered = 0.5 * (space.start_s + space.end_s) - veh.wheelbase * 0.5;
    const double advance = std::max(0.0, x_centered - x_land);
    for (double u = 0.0; u <= advance + 1e-12; u += 0.005) {
        const VehicleState pose{x_land + std::min(u, advance), parked_y, 0.0, 0.0};
        if (pose_collides(pose, veh, obstacles, inflate)) return false;
    }
    return true;
}

} // namespace detail

// Smallest space length the two-arc maneuver fits into, found by bisection on
// the exact swept-path collision test. Deterministic; derived entirely from
// the turning radius R = wheelbase / tan(delta_max) and the body geometry.
// Feasibility carries a 2 mm obstacle inflation so plans built at exactly the
// minimum keep real clearance.
inline double min_space_length(const VehicleGeometry& veh, double lateral_gap,
                               double space_depth = kRangeOutOfRange / 1000.0) {
    const double rear_margin = 0.02;
    const double inflate = 0.002;

    const auto feasible = [&](double len) {
        ParkingSpace space{0.0, len, space_depth};
        if (len < veh.length + 2.0 * rear_margin) return false;
        return detail::park_in_path_clear(space, veh, lateral_gap, rear_margin, inflate);
    };

    double lo = veh.length;
    double hi = veh.length + 6.0 * veh.turning_radius();
    if (!feasible(hi)) throw SpaceTooSmall("min_space_length: maneuver infeasible at any length");
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

inline constexpr double kManeuverSpeed = 0.3; // m/s for parking segments

struct RolloutResult {
    std::vector<VehicleState> poses; // rear-axle pose after every step
    bool collided = false;
    VehicleState final_pose;
};

// Forward-simulates a plan through the bicycle model, checking the body
// against the obstacles at every step.
inline RolloutResult rollout_plan(const ManeuverPlan& plan, const VehicleState& start,
                                  const VehicleGeometry& veh,
                                  const std::vector<AxisRect>& obstacles, double dt = 0.005) {
    RolloutResult out;
    VehicleState pose = start;
    out.poses.push_back(pose);
    for (const auto& seg : plan.segments) {
        const int whole = static_cast<int>(seg.duration / dt);
        const double rem = seg.duration - whole * dt;
        VehicleState moving = pose;
        moving.speed = seg.speed;
        for (int i = 0; i <= whole; ++i) {
            const double step_dt = i < whole ? dt : rem;
            if (step_dt <= 0.0) break;
            moving = kinematic_step(moving, seg.delta, step_dt, veh.wheelbase);
            out.poses.push_back(moving);
            if (detail::pose_collides(moving, veh, obstacles)) out.collided = true;
        }
        pose = moving;
    }
    pose.speed = 0.0;
    out.final_pose = pose;
    return out;
}

// Reverse two-arc parallel-parking plan: both arcs at maximum steering with
// equal angles, then a forward straighten leg that centers the vehicle in
// the space. Throws SpaceTooSmall when the space is shorter than the
// closed-form minimum for this geometry. The returned plan has already been
// validated by a bicycle-model rollout against the space's obstacles.
inline ManeuverPlan plan_park_in(const ParkingSpace& space, const VehicleGeometry& veh,
                                 double lateral_gap) {
    const detail::TwoArcGeometry g = detail::two_arc_geometry(veh, lateral_gap);
    const double length = space.end_s - space.start_s;
    const double needed = min_space_length(veh, lateral_gap, space.depth);
    if (length < needed - 1e-9)
        throw SpaceTooSmall("plan_park_in: space " + std::to_string(length) + " m < minimum " +
                            std::to_string(needed) + " m");

    const double rear_margin = 0.02;
    const double x_land = space.start_s + veh.rear_overhang() + rear_margin;
    const double x_centered = 0.5 * (space.start_s + space.end_s) - veh.wheelbase * 0.5;
    const double advance = std::max(0.0, x_centered - x_land);
    const double arc_time = g.arc_angle * g.radius / kManeuverSpeed;

    ManeuverPlan plan;
    plan.segments.push_back({-kManeuverSpeed, -veh.delta_max, arc_time});
    plan.segments.push_back({-kManeuverSpeed, +veh.delta_max, arc_time});
    if (advance > 1e-6) plan.segments.push_back({+kManeuverSpeed, 0.0, advance / kManeuverSpeed});

    plan.start_pose = {x_land + g.long_travel, 0.0, 0.0, 0.0};
    plan.expected_final_pose = {x_land + advance, -lateral_gap, 0.0, 0.0};

    const RolloutResult check =
        rollout_plan(plan, plan.start_pose, veh, parking_obstacles(space, lateral_gap, veh));
    const double pos_err = std::hypot(check.final_pose.x - plan.expected_final_pose.x,
                                      check.final_pose.y - plan.expected_final_pose.y);
    const double hdg_err =
        std::abs(wrap_angle(check.final_pose.heading - plan.expected_final_pose.heading));
    if (check.collided || pos_err > 0.05 || hdg_err > deg_to_rad(3.0))
        throw Error("plan_park_in: rollout validation failed");
    return plan;
}

namespace detail {

// Largest collision-free sweep (radians, >= 0) of an arc about the turn
// center implied by (drive_sign, steer_sign), sampled every 0.25 degrees.
// The turn center sits at L/tan(delta) along the left normal, so its side
// depends on the steering sign alone; the drive sign sets the yaw direction.
inline double max_clear_arc(const VehicleState& from, const VehicleGeometry& veh,
                            const std::vector<AxisRect>& obstacles, double drive_sign,
                            double steer_sign, double cap, double inflate) {
    const double R = veh.turning_radius();
    const double yaw_sign = drive_sign * steer_sign; // sign of heading rate
    const Vec2 icc = Vec2{from.x, from.y} + left_normal(from.heading) * (R * steer_sign);
    const double dphi = deg_to_rad(0.25);
    double clear = 0.0;
    for (double phi = dphi; phi <= cap + 1e-12; phi += dphi) {
        const double rot = yaw_sign * phi;
        const Vec2 rel = Vec2{from.x, from.y} - icc;
        const Vec2 p = icc + rotate(rel, rot);
        const VehicleState pose{p.x, p.y, wrap_angle(from.heading + rot), 0.0};
        if (pose_collides(pose, veh, obstacles, inflate)) break;
        clear = phi;
    }
    return clear;
}

inline VehicleState arc_end(const VehicleState& from, const VehicleGeometry& veh,
                            double drive_sign, double steer_sign, double phi) {
    const double R = veh.turning_radius();
    const double yaw_sign = drive_sign * steer_sign;
    const Vec2 icc = Vec2{from.x, from.y} + left_normal(from.heading) * (R * steer_sign);
    const Vec2 rel = Vec2{from.x, from.y} - icc;
    const Vec2 p = icc + rotate(rel, yaw_sign * phi);
    return {p.x, p.y, wrap_angle(from.heading + yaw_sign * phi), 0.0};
}

// Whether the body is entirely above the flanking-obstacle band.
inline bool fully_exited(const VehicleState& pose, const VehicleGeometry& veh, double y_top) {
    for (const auto& c : body_corners(pose, veh))
        if (c.y < y_top + 0.005) return false;
    return true;
}

// Sweep of the forward max-steer exit arc: returns the sweep angle at which
// the body first clears the band, or nothing if it collides or never clears
// within a half turn.
inline std::optional<double> exit_arc_sweep(const VehicleState& from, const VehicleGeometry& veh,
                                            const std::vector<AxisRect>& obstacles, double y_top,
                                            double inflate) {
    const double dphi = deg_to_rad(0.25);
    for (double phi = dphi; phi <= kPi / 2.0; phi += dphi) {
        const VehicleState pose = arc_end(from, veh, +1.0, +1.0, phi);
        if (pose_collides(pose, veh, obstacles, inflate)) return std::nullopt;
        if (fully_exited(pose, veh, y_top)) return phi;
    }
    return std::nullopt;
}

} // namespace detail

// Exit plan: when the forward max-steer arc already clears the space, the
// plan is that single arc. Otherwise the vehicle wiggles: alternating
// forward/reverse max-steer segments, each rotating the nose outward, until
// the single-arc exit fits or the segment cap is reached. Like park-in, the
// returned plan has been validated by rollout.
inline ManeuverPlan plan_park_out(const ParkingSpace& space, const VehicleState& current,
                                  const VehicleGeometry& veh, double front_clearance,
                                  int segment_cap = 12) {
    const double y_top = current.y + veh.width * 0.5 + 0.002;
    const double y_bot = current.y - veh.width * 0.5 - 0.5;
    const double curb_y = current.y - veh.width * 0.5 - 0.02;
    // Front bumper x for a heading-aligned parked pose.
    const double front_bumper = current.x + 0.5 * (veh.wheelbase + veh.length);
    const double x_front_obs = front_bumper + front_clearance;

    std::vector<AxisRect> obstacles;
    obstacles.push_back({space.start_s - 3.0, y_bot, space.start_s, y_top});
    obstacles.push_back({x_front_obs, y_bot, x_front_obs + 3.0, y_top});
    obstacles.push_back({space.start_s - 3.0, curb_y - 1.0, x_front_obs + 3.0, curb_y});

    const double inflate = 0.004;
    const double R = veh.turning_radius();

    const auto validated = [&](ManeuverPlan plan) {
        const RolloutResult check = rollout_plan(plan, current, veh, obstacles);
        if (check.collided || !detail::fully_exited(check.final_pose, veh, y_top - 0.005))
            throw Error("plan_park_out: rollout validation failed");
        return plan;
    };

    ManeuverPlan plan;
    plan.start_pose = current;
    VehicleState pose = current;
    bool forward_leg = true;
    for (int seg = 0; seg < segment_cap; ++seg) {
        if (const auto sweep = detail::exit_arc_sweep(pose, veh, obstacles, y_top, inflate)) {
            // Continue a little past the first-exit angle, but only as far as
            // the arc stays collision-free.
            const double wanted = std::min(*sweep + deg_to_rad(2.0), kPi / 2.0);
            const double clear =
                detail::max_clear_arc(pose, veh, obstacles, +1.0, +1.0, wanted, inflate);
            const double phi = std::max(*sweep, clear);
            plan.segments.push_back({+kManeuverSpeed, veh.delta_max, phi * R / kManeuverSpeed});
            plan.expected_final_pose = detail::arc_end(pose, veh, +1.0, +1.0, phi);
            return validated(plan);
        }
        const double drive = forward_leg ? +1.0 : -1.0;
        const double steer = forward_leg ? +1.0 : -1.0; // both legs rotate the nose outward
        const double sweep =
            detail::max_clear_arc(pose, veh, obstacles, drive, steer, deg_to_rad(40.0), inflate);
        if (sweep > deg_to_rad(0.5)) {
            plan.segments.push_back(
                {drive * kManeuverSpeed, steer * veh.delta_max, sweep * R / kManeuverSpeed});
            pose = detail::arc_end(pose, veh, drive, steer, sweep);
        }
        forward_leg = !forward_leg;
    }
    throw NoExitFound("plan_park_out: no exit within " + std::to_string(segment_cap) +
                      " segments");
}

} // namespace lanekeep
