#pragma once

#include <cmath>

#include "lanekeep/geometry.hpp"

namespace lanekeep {

// Planar pose plus speed. (x, y) is the rear-axle point of the bicycle
// model; heading is measured counterclockwise from +x and kept in (-pi, pi].
struct VehicleState {
    double x = 0.0;       // m
    double y = 0.0;       // m
    double heading = 0.0; // rad
    double speed = 0.0;   // m/s
};

// Kinematic bicycle step with midpoint integration: the heading advances by
// (speed / wheelbase) * tan(delta) * dt and the position moves speed * dt
// along the mid-step heading. Speed is preserved.
inline VehicleState kinematic_step(const VehicleState& s, double delta, double dt,
                                   double wheelbase) {
    const double yaw_rate = s.speed / wheelbase * std::tan(delta);
    const double mid = s.heading + 0.5 * yaw_rate * dt;
    VehicleState out = s;
    out.x += s.speed * std::cos(mid) * dt;
    out.y += s.speed * std::sin(mid) * dt;
    out.heading = wrap_angle(s.heading + yaw_rate * dt);
    return out;
}

} // namespace lanekeep
