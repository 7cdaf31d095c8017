#pragma once

#include <cmath>

#include "lanekeep/image.hpp"
#include "lanekeep/rng.hpp"
#include "lanekeep/road.hpp"
#include "lanekeep/vehicle.hpp"

namespace lanekeep {

// Synthetic bird's-eye window: the vehicle sits at the bottom-center pixel,
// up-image is the vehicle heading, +x image is the heading's left normal.
// That axis choice is what ties the sign conventions together: it makes
// distance_error = -offset * px_per_m and keeps positive distance error
// mapped to positive (corrective) steering.
struct CameraModel {
    double view_length = 0.4; // m ahead of the vehicle
    double view_width = 0.6;  // m across
    int image_width = 240;    // px
    int image_height = 160;   // px

    double px_per_m() const { return image_width / view_width; }

    bool valid() const {
        return image_width >= 16 && image_height >= 16 && view_length > 0.0 && view_width > 0.0;
    }
};

struct NoiseModel {
    double salt_prob = 0.0;              // per-pixel white-noise probability
    int dropout_segments_per_frame = 0;  // painted-out line stretches per frame
    double dropout_length = 0.05;        // m
    double imu_noise_std = 0.0;          // degrees
    double imu_bias = 0.0;               // degrees
    std::uint64_t rng_seed = 0;
};

namespace detail {

struct CameraFrame {
    Vec2 origin;  // vehicle position
    Vec2 forward; // unit heading
    Vec2 lateral; // heading's left normal = +x image direction
    double ppm = 0.0;
    int w = 0, h = 0;

    // World point -> integer pixel. May land outside the image.
    void project(const Vec2& world, int& px, int& py) const {
        const Vec2 rel = world - origin;
        px = static_cast<int>(std::lround(w * 0.5 + rel.dot(lateral) * ppm));
        py = static_cast<int>(std::lround((h - 1) - rel.dot(forward) * ppm));
    }
};

inline CameraFrame make_frame(const VehicleState& v, const CameraModel& cam) {
    CameraFrame f;
    f.origin = {v.x, v.y};
    f.forward = unit_vector(v.heading);
    f.lateral = left_normal(v.heading);
    f.ppm = cam.px_per_m();
    f.w = cam.image_width;
    f.h = cam.image_height;
    return f;
}

inline void stamp_disc(BinaryImage& img, int cx, int cy, int r, bool value) {
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= r * r && img.in_bounds(cx + dx, cy + dy))
                img.set(cx + dx, cy + dy, value);
}

// Paints one lane line (centerline + side * lane_width/2) over [s0, s1].
inline void paint_line(BinaryImage& img, const RoadModel& road, const CameraFrame& f, double s0,
                       double s1, double side, int radius_px, double step_m, bool value) {
    for (double s = s0; s <= s1; s += step_m) {
        const RoadPose rp = road_pose(road, s);
        const Vec2 pt = rp.center + left_normal(rp.tangent) * (side * road.lane_width * 0.5);
        int px, py;
        f.project(pt, px, py);
        if (px >= -radius_px && px < img.width + radius_px && py >= -radius_px &&
            py < img.height + radius_px)
            stamp_disc(img, px, py, radius_px, value);
    }
}

} // namespace detail

// Rasterizes both lane lines into the vehicle's forward window, then applies
// seeded dropout stretches and salt noise. Pure function of (inputs, rng
// state): identical calls produce identical images.
inline BinaryImage render_camera(const RoadModel& road, const VehicleState& v,
                                 const CameraModel& cam, const NoiseModel& noise, Rng& rng) {
    BinaryImage img(cam.image_width, cam.image_height);
    const detail::CameraFrame f = detail::make_frame(v, cam);

    const double total = road.total_length();
    const double margin = cam.view_width + 0.5;
    const double s_v = lateral_state(road, v).arclength;
    const double s0 = std::max(0.0, s_v - margin);
    const double s1 = std::min(total, s_v + cam.view_length + margin);

    const int radius_px = std::max(1, static_cast<int>(std::lround(road.line_thickness * f.ppm * 0.5)));
    const double step = 0.3 / f.ppm; // 0.3 px worth of arc per stamp
    detail::paint_line(img, road, f, s0, s1, +1.0, radius_px, step, true);
    detail::paint_line(img, road, f, s0, s1, -1.0, radius_px, step, true);

    for (int k = 0; k < noise.dropout_segments_per_frame; ++k) {
        const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
        const double lo = s0;
        const double hi = std::max(lo, s1 - noise.dropout_length);
        const double start = rng.uniform(lo, hi);
        detail::paint_line(img, road, f, start, std::min(s1, start + noise.dropout_length), side,
                           radius_px + 1, step, false);
    }

    if (noise.salt_prob > 0.0)
        for (auto& px : img.data)
            if (rng.bernoulli(noise.salt_prob)) px = 1;

    return img;
}

// Noise-free mask of a single lane line, named by image side: the image-left
// lane is the line on the road's -normal side, the image-right lane the
// +normal side. Used as the ground-truth pixel set for tracker comparisons.
inline BinaryImage render_lane_mask(const RoadModel& road, const VehicleState& v,
                                    const CameraModel& cam, bool image_left) {
    BinaryImage img(cam.image_width, cam.image_height);
    const detail::CameraFrame f = detail::make_frame(v, cam);
    const double total = road.total_length();
    const double margin = cam.view_width + 0.5;
    const double s_v = lateral_state(road, v).arclength;
    const double s0 = std::max(0.0, s_v - margin);
    const double s1 = std::min(total, s_v + cam.view_length + margin);
    const int radius_px = std::max(1, static_cast<int>(std::lround(road.line_thickness * f.ppm * 0.5)));
    detail::paint_line(img, road, f, s0, s1, image_left ? -1.0 : +1.0, radius_px, 0.3 / f.ppm,
                       true);
    return img;
}

// Heading sample in degrees with constant bias and Gaussian noise. The sign
// convention of the returned value is whatever the caller passed in.
inline double imu_sample(double heading_rel_road_rad, const NoiseModel& noise, Rng& rng) {
    double deg = rad_to_deg(heading_rel_road_rad) + noise.imu_bias;
    if (noise.imu_noise_std > 0.0) deg += rng.gaussian(0.0, noise.imu_noise_std);
    return deg;
}

} // namespace lanekeep
