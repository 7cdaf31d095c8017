#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "lanekeep/camera.hpp"
#include "lanekeep/control.hpp"
#include "lanekeep/perception.hpp"
#include "lanekeep/road.hpp"
#include "lanekeep/vehicle.hpp"

namespace lanekeep {

struct TraceRow {
    double t = 0.0;                   // s
    double lateral_offset_true = 0.0; // m
    double distance_error_px = 0.0;
    double alpha_deg = 0.0; // fused heading used by the controller
    double delta_rad = 0.0;
    LanesSeen lanes_seen = LanesSeen::Both;
};

struct SimTrace {
    std::vector<TraceRow> rows;
    bool left_road = false; // vehicle exited the lateral band before the end
    double end_time = 0.0;
};

inline const char* lanes_seen_name(LanesSeen s) {
    switch (s) {
        case LanesSeen::Both: return "both";
        case LanesSeen::LeftOnly: return "left";
        default: return "right";
    }
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline void write_trace_csv(const SimTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("trace: cannot write " + path.string());
    out << "t,offset_m,err_px,alpha_deg,delta_rad,lanes\n";
    for (const auto& r : trace.rows) {
        out << format_double(r.t) << ',' << format_double(r.lateral_offset_true) << ','
            << format_double(r.distance_error_px) << ',' << format_double(r.alpha_deg) << ','
            << format_double(r.delta_rad) << ',' << lanes_seen_name(r.lanes_seen) << '\n';
    }
    if (trace.left_road)
        out << "# terminated=VehicleLeftRoad t=" << format_double(trace.end_time) << '\n';
}

inline SimTrace load_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("trace: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,offset_m,err_px,alpha_deg,delta_rad,lanes", 0) != 0)
        throw MalformedHeader("trace: unexpected header");
    SimTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("VehicleLeftRoad") != std::string::npos) {
                trace.left_road = true;
                const auto eq = line.rfind("t=");
                if (eq != std::string::npos) trace.end_time = std::stod(line.substr(eq + 2));
            }
            continue;
        }
        TraceRow row;
        std::size_t pos = 0;
        const auto next_field = [&]() {
            const auto comma = line.find(',', pos);
            const std::string field = line.substr(pos, comma - pos);
            pos = comma == std::string::npos ? line.size() : comma + 1;
            return field;
        };
        row.t = std::stod(next_field());
        row.lateral_offset_true = std::stod(next_field());
        row.distance_error_px = std::stod(next_field());
        row.alpha_deg = std::stod(next_field());
        row.delta_rad = std::stod(next_field());
        const std::string lanes = next_field();
        row.lanes_seen = lanes == "both" ? LanesSeen::Both
                         : lanes == "left" ? LanesSeen::LeftOnly
                                           : LanesSeen::RightOnly;
        trace.rows.push_back(row);
        if (!trace.left_road) trace.end_time = row.t;
    }
    return trace;
}

// Everything one closed-loop run needs. dt is the control step; vision and
// IMU fire at their own rates (rounded to whole control steps).
struct ScenarioSetup {
    RoadModel road;
    CameraModel camera;
    NoiseModel noise;
    PerceptionConfig perception;
    ControllerGains gains;
    HeadingFusionConfig fusion;
    double dt = 0.01;        // s
    double duration = 50.0;  // s
    double speed = 0.5;      // m/s
    double wheelbase = 0.3;  // m
    double initial_offset = 0.0;      // m, along the road-start left normal
    double initial_heading_err = 0.0; // rad
    double actuator_bias = 0.0;       // rad added to every commanded delta
    std::uint64_t seed = 1;

    // Optional per-frame sink (frame index, image); used for frame dumps.
    std::function<void(int, const BinaryImage&)> frame_sink;
};

// Fixed-step closed loop: render at the vision rate, sample the IMU at its
// rate, run perception -> fusion -> steering -> bicycle step, one trace row
// per control step. Deterministic for a given seed.
//
// Wiring note: the IMU measures heading_rel_road, whose sign is opposite the
// vision alpha convention (alpha is read looking up-image); the runner
// negates the IMU input so both heading sources agree before fusion.
inline SimTrace run_scenario(const ScenarioSetup& setup) {
    SimTrace trace;
    Rng rng(setup.seed);

    const double total = setup.road.total_length();
    const int n_steps = static_cast<int>(std::llround(setup.duration / setup.dt));
    const int vision_every =
        std::max(1, static_cast<int>(std::llround(1.0 / (setup.fusion.vision_rate * setup.dt))));
    const int imu_every =
        std::max(1, static_cast<int>(std::llround(1.0 / (setup.fusion.imu_rate * setup.dt))));

    const RoadPose start = road_pose(setup.road, 0.0);
    VehicleState vehicle;
    const Vec2 p0 = start.center + left_normal(start.tangent) * setup.initial_offset;
    vehicle.x = p0.x;
    vehicle.y = p0.y;
    vehicle.heading = wrap_angle(start.tangent + setup.initial_heading_err);
    vehicle.speed = setup.speed;

    ControllerState ctrl;
    FeedbackSample fb; // zero until the first successful vision frame
    double fused = 0.0;
    int frame_index = 0;

    for (int k = 0; k < n_steps; ++k) {
        const double t = k * setup.dt;

        LateralState lat;
        try {
            lat = lateral_state(setup.road, vehicle);
        } catch (const OffRoad&) {
            trace.left_road = true;
            trace.end_time = t;
            return trace;
        }
        if (lat.arclength + setup.speed * setup.dt >= total) {
            trace.end_time = t;
            return trace; // road end: normal completion
        }

        std::optional<double> vision_alpha;
        if (k % vision_every == 0) {
            const BinaryImage img =
                render_camera(setup.road, vehicle, setup.camera, setup.noise, rng);
            if (setup.frame_sink) setup.frame_sink(frame_index, img);
            ++frame_index;
            const FrameAnalysis analysis = analyze_frame(img, setup.perception);
            if (analysis.feedback) {
                fb = *analysis.feedback;
                vision_alpha = fb.angle_error_alpha;
            }
        }

        std::optional<double> imu_deg;
        if (k % imu_every == 0)
            imu_deg = imu_sample(-lat.heading_rel_road, setup.noise, rng);

        if (imu_deg || vision_alpha)
            fused = fuse_heading(ctrl, imu_deg, vision_alpha, setup.fusion, t);
        else
            fused = ctrl.last_fused_heading;

        const SteeringResult cmd = steering_command(fb, fused, ctrl, setup.gains, setup.dt);
        ctrl = cmd.state;

        trace.rows.push_back({t, lat.offset, fb.distance_error, fused, cmd.delta, fb.lanes_seen});

        const double applied = cmd.delta + setup.actuator_bias;
        vehicle = kinematic_step(vehicle, applied, setup.dt, setup.wheelbase);
        trace.end_time = t + setup.dt;
    }
    return trace;
}

} // namespace lanekeep
