#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "lanekeep/errors.hpp"
#include "lanekeep/geometry.hpp"
#include "lanekeep/polyfit.hpp"

namespace lanekeep {

// Gains for the three-term lateral law: proportional distance term, distance
// integrator, and tangent-of-angle term. The angle clamp keeps tan() away
// from its pole when fusion transiently exceeds the perception bound.
struct ControllerGains {
    double k_distance = 0.004;  // rad per px of distance error
    double k_integral = 0.002;  // rad per (px * s)
    double k_angle = 1.2;       // multiplier on tan(alpha)
    double delta_max = 0.35;    // steering saturation, rad
    double integral_clamp = 100.0; // accumulator bound, px * s
    double alpha_clamp_deg = 85.0;

    bool valid() const {
        return delta_max > 0.0 && integral_clamp >= 0.0 && alpha_clamp_deg > 0.0 &&
               alpha_clamp_deg < 90.0;
    }
};

struct ControllerState {
    double integral_accum = 0.0;     // px * s
    double last_fused_heading = 0.0; // degrees, alpha sign convention
    double last_vision_time = 0.0;   // s
};

struct HeadingFusionConfig {
    double vision_weight = 0.7; // weight on vision alpha when both sources present
    double imu_rate = 100.0;    // Hz
    double vision_rate = 20.0;  // Hz

    bool valid() const {
        return vision_weight >= 0.0 && vision_weight <= 1.0 && vision_rate > 0.0 &&
               imu_rate >= vision_rate;
    }
};

// Two-rate heading estimate. At vision frames the estimate is the weighted
// blend of vision alpha and the IMU reading; between vision frames the IMU
// alone carries it. Both inputs must share the alpha sign convention.
inline double fuse_heading(ControllerState& state, std::optional<double> imu_heading_deg,
                           std::optional<double> vision_alpha_deg, const HeadingFusionConfig& cfg,
                           double now_s = 0.0) {
    if (!imu_heading_deg && !vision_alpha_deg)
        throw NoHeadingSource("fuse_heading: both sources absent");
    double fused;
    if (vision_alpha_deg) {
        fused = imu_heading_deg
                    ? cfg.vision_weight * *vision_alpha_deg +
                          (1.0 - cfg.vision_weight) * *imu_heading_deg
                    : *vision_alpha_deg;
        state.last_vision_time = now_s;
    } else {
        fused = *imu_heading_deg;
    }
    state.last_fused_heading = fused;
    return fused;
}

struct SteeringResult {
    double delta = 0.0; // rad
    ControllerState state;
};

// delta = k_distance * e_d + k_integral * I + k_angle * tan(alpha), clamped
// to +-delta_max. Positive distance error (path right of frame center)
// yields positive delta (steer right). The accumulator is clamped
// symmetrically so saturation cannot wind it up.
inline SteeringResult steering_command(const FeedbackSample& fb, double fused_alpha_deg,
                                       const ControllerState& state, const ControllerGains& gains,
                                       double dt) {
    SteeringResult out;
    out.state = state;

    const double alpha =
        std::clamp(fused_alpha_deg, -gains.alpha_clamp_deg, gains.alpha_clamp_deg);
    out.state.integral_accum = std::clamp(state.integral_accum + fb.distance_error * dt,
                                          -gains.integral_clamp, gains.integral_clamp);
    const double raw = gains.k_distance * fb.distance_error +
                       gains.k_integral * out.state.integral_accum +
                       gains.k_angle * std::tan(deg_to_rad(alpha));
    out.delta = std::clamp(raw, -gains.delta_max, gains.delta_max);
    return out;
}

inline ControllerState reset(const ControllerState& = {}) { return ControllerState{}; }

} // namespace lanekeep
