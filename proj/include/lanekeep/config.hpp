#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>

#include <json.hpp>

#include "lanekeep/camera.hpp"
#include "lanekeep/control.hpp"
#include "lanekeep/errors.hpp"
#include "lanekeep/parking.hpp"
#include "lanekeep/perception.hpp"
#include "lanekeep/road.hpp"
#include "lanekeep/scenario.hpp"

namespace lanekeep {

struct GenConfig {
    int frame_count = 30;
    double frame_spacing = 0.1;     // m of arclength between frames
    double offset = 0.0;            // m, constant lateral offset for all frames
    double heading_err_deg = 0.0;   // constant heading error for all frames
};

struct ParkingLayout {
    double pass_length = 3.0;     // m of scanning pass
    double sample_spacing = 0.01; // m between scan samples
    double wall_range_mm = 300.0; // side distance to the parked-car wall
    double gap_start = 0.9;       // m, odometry where the gap begins
    double gap_length = 1.2;      // m
    double gap_depth_mm = 2000.0; // reading inside the gap (2000 = open)
    int spike_count = 0;          // injected noise spikes inside the gap
    double wall_noise_mm = 8.0;   // uniform jitter on wall readings
};

struct ParkingConfig {
    VehicleGeometry vehicle;
    ParkingLayout layout;
    double min_depth_mm = 600.0;
    std::optional<double> min_length;  // default: closed-form minimum
    int max_spike_run = 2;
    double spike_threshold_mm = 300.0;
    std::optional<double> lateral_gap; // default: wall range + half width
    double front_clearance = 0.9;      // m, for exit planning

    double effective_lateral_gap() const {
        return lateral_gap ? *lateral_gap
                           : layout.wall_range_mm / 1000.0 + vehicle.width * 0.5;
    }
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    RoadModel road;
    CameraModel camera;
    NoiseModel noise;
    ControllerGains gains;
    HeadingFusionConfig fusion;
    PerceptionConfig perception;
    int threshold = 128; // binarization level for gray input frames
    double dt = 0.01;
    double duration = 50.0;
    double speed = 0.5;
    double wheelbase = 0.3;
    double initial_offset = 0.0;
    double initial_heading_err = 0.0; // rad
    double actuator_bias = 0.0;       // rad
    bool dump_frames = false;
    GenConfig gen;
    ParkingConfig parking;

    ScenarioSetup to_setup() const {
        ScenarioSetup s;
        s.road = road;
        s.camera = camera;
        s.noise = noise;
        s.perception = perception;
        s.gains = gains;
        s.fusion = fusion;
        s.dt = dt;
        s.duration = duration;
        s.speed = speed;
        s.wheelbase = wheelbase;
        s.initial_offset = initial_offset;
        s.initial_heading_err = initial_heading_err;
        s.actuator_bias = actuator_bias;
        s.seed = seed;
        return s;
    }
};

inline ScenarioConfig default_scenario_config() {
    ScenarioConfig c;
    c.road.segments = {StraightSegment{2.0}, ArcSegment{2.0, deg_to_rad(50.0)},
                       StraightSegment{12.0}, ArcSegment{2.0, deg_to_rad(-50.0)},
                       StraightSegment{12.0}};
    c.perception.lane_width_px = c.road.lane_width * c.camera.px_per_m();
    return c;
}

namespace cfg {

using nlohmann::json;

inline void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
    expect_object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(path + "." + it.key() + ": unknown key");
    }
}

inline double num(const json& j, const std::string& path, const char* key, double def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

inline int integer(const json& j, const std::string& path, const char* key, int def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
    return v.get<int>();
}

inline bool boolean(const json& j, const std::string& path, const char* key, bool def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

inline std::string text(const json& j, const std::string& path, const char* key,
                        const std::string& def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline void check(bool ok, const std::string& path, const char* message) {
    if (!ok) throw ConfigError(path + ": " + message);
}

} // namespace cfg

inline ScenarioConfig parse_scenario_config(const nlohmann::json& root) {
    using namespace cfg;
    ScenarioConfig c = default_scenario_config();
    const std::string top = "config";
    reject_unknown(root, top,
                   {"seed", "road", "camera", "noise", "gains", "fusion", "sim", "perception",
                    "gen", "parking"});

    if (root.contains("seed")) {
        const auto& v = root.at("seed");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            throw ConfigError("config.seed: expected an integer");
        c.seed = v.get<std::uint64_t>();
    }

    if (root.contains("road")) {
        const auto& j = root.at("road");
        const std::string p = top + ".road";
        reject_unknown(j, p, {"lane_width", "line_thickness", "segments"});
        c.road.lane_width = num(j, p, "lane_width", c.road.lane_width);
        c.road.line_thickness = num(j, p, "line_thickness", c.road.line_thickness);
        check(c.road.lane_width > 0.0, p + ".lane_width", "must be > 0");
        check(c.road.line_thickness > 0.0, p + ".line_thickness", "must be > 0");
        if (j.contains("segments")) {
            if (!j.at("segments").is_array())
                throw ConfigError(p + ".segments: expected an array");
            c.road.segments.clear();
            int idx = 0;
            for (const auto& seg : j.at("segments")) {
                const std::string sp = p + ".segments[" + std::to_string(idx++) + "]";
                reject_unknown(seg, sp, {"type", "length", "radius", "angle_deg"});
                const std::string type = text(seg, sp, "type", "");
                if (type == "straight") {
                    const double len = num(seg, sp, "length", 0.0);
                    check(len > 0.0, sp + ".length", "must be > 0");
                    c.road.segments.push_back(StraightSegment{len});
                } else if (type == "arc") {
                    const double radius = num(seg, sp, "radius", 0.0);
                    const double angle = num(seg, sp, "angle_deg", 0.0);
                    check(radius > 0.0, sp + ".radius", "must be > 0");
                    check(angle != 0.0, sp + ".angle_deg", "must be nonzero");
                    c.road.segments.push_back(ArcSegment{radius, deg_to_rad(angle)});
                } else {
                    throw ConfigError(sp + ".type: expected \"straight\" or \"arc\"");
                }
            }
            check(!c.road.segments.empty(), p + ".segments", "must not be empty");
        }
    }

    if (root.contains("camera")) {
        const auto& j = root.at("camera");
        const std::string p = top + ".camera";
        reject_unknown(j, p, {"view_width", "view_length", "image_width", "image_height"});
        c.camera.view_width = num(j, p, "view_width", c.camera.view_width);
        c.camera.view_length = num(j, p, "view_length", c.camera.view_length);
        c.camera.image_width = integer(j, p, "image_width", c.camera.image_width);
        c.camera.image_height = integer(j, p, "image_height", c.camera.image_height);
        check(c.camera.view_width > 0.0, p + ".view_width", "must be > 0");
        check(c.camera.view_length > 0.0, p + ".view_length", "must be > 0");
        check(c.camera.image_width >= 16, p + ".image_width", "must be >= 16");
        check(c.camera.image_height >= 16, p + ".image_height", "must be >= 16");
    }

    if (root.contains("noise")) {
        const auto& j = root.at("noise");
        const std::string p = top + ".noise";
        reject_unknown(j, p,
                       {"salt_prob", "dropout_segments_per_frame", "dropout_length",
                        "imu_noise_std_deg", "imu_bias_deg"});
        c.noise.salt_prob = num(j, p, "salt_prob", c.noise.salt_prob);
        c.noise.dropout_segments_per_frame =
            integer(j, p, "dropout_segments_per_frame", c.noise.dropout_segments_per_frame);
        c.noise.dropout_length = num(j, p, "dropout_length", c.noise.dropout_length);
        c.noise.imu_noise_std = num(j, p, "imu_noise_std_deg", c.noise.imu_noise_std);
        c.noise.imu_bias = num(j, p, "imu_bias_deg", c.noise.imu_bias);
        check(c.noise.salt_prob >= 0.0 && c.noise.salt_prob <= 1.0, p + ".salt_prob",
              "must be in [0, 1]");
        check(c.noise.dropout_segments_per_frame >= 0, p + ".dropout_segments_per_frame",
              "must be >= 0");
        check(c.noise.dropout_length > 0.0, p + ".dropout_length", "must be > 0");
        check(c.noise.imu_noise_std >= 0.0, p + ".imu_noise_std_deg", "must be >= 0");
    }

    if (root.contains("gains")) {
        const auto& j = root.at("gains");
        const std::string p = top + ".gains";
        reject_unknown(j, p,
                       {"k_distance", "k_integral", "k_angle", "delta_max", "integral_clamp",
                        "alpha_clamp_deg"});
        c.gains.k_distance = num(j, p, "k_distance", c.gains.k_distance);
        c.gains.k_integral = num(j, p, "k_integral", c.gains.k_integral);
        c.gains.k_angle = num(j, p, "k_angle", c.gains.k_angle);
        c.gains.delta_max = num(j, p, "delta_max", c.gains.delta_max);
        c.gains.integral_clamp = num(j, p, "integral_clamp", c.gains.integral_clamp);
        c.gains.alpha_clamp_deg = num(j, p, "alpha_clamp_deg", c.gains.alpha_clamp_deg);
        check(c.gains.delta_max > 0.0, p + ".delta_max", "must be > 0");
        check(c.gains.integral_clamp >= 0.0, p + ".integral_clamp", "must be >= 0");
        check(c.gains.alpha_clamp_deg > 0.0 && c.gains.alpha_clamp_deg < 90.0,
              p + ".alpha_clamp_deg", "must be in (0, 90)");
    }

    if (root.contains("fusion")) {
        const auto& j = root.at("fusion");
        const std::string p = top + ".fusion";
        reject_unknown(j, p, {"vision_weight", "imu_rate_hz", "vision_rate_hz"});
        c.fusion.vision_weight = num(j, p, "vision_weight", c.fusion.vision_weight);
        c.fusion.imu_rate = num(j, p, "imu_rate_hz", c.fusion.imu_rate);
        c.fusion.vision_rate = num(j, p, "vision_rate_hz", c.fusion.vision_rate);
        check(c.fusion.vision_weight >= 0.0 && c.fusion.vision_weight <= 1.0,
              p + ".vision_weight", "must be in [0, 1]");
        check(c.fusion.vision_rate > 0.0, p + ".vision_rate_hz", "must be > 0");
        check(c.fusion.imu_rate >= c.fusion.vision_rate, p + ".imu_rate_hz",
              "must be >= vision_rate_hz");
    }

    if (root.contains("sim")) {
        const auto& j = root.at("sim");
        const std::string p = top + ".sim";
        reject_unknown(j, p,
                       {"dt", "duration", "speed", "wheelbase", "initial_offset_m",
                        "initial_heading_err_deg", "actuator_bias_rad", "dump_frames"});
        c.dt = num(j, p, "dt", c.dt);
        c.duration = num(j, p, "duration", c.duration);
        c.speed = num(j, p, "speed", c.speed);
        c.wheelbase = num(j, p, "wheelbase", c.wheelbase);
        c.initial_offset = num(j, p, "initial_offset_m", c.initial_offset);
        c.initial_heading_err = deg_to_rad(num(j, p, "initial_heading_err_deg", 0.0));
        c.actuator_bias = num(j, p, "actuator_bias_rad", c.actuator_bias);
        c.dump_frames = boolean(j, p, "dump_frames", c.dump_frames);
        check(c.dt >= 1e-4 && c.dt <= 0.1, p + ".dt", "must be in [1e-4, 0.1]");
        check(c.duration > 0.0, p + ".duration", "must be > 0");
        check(c.speed >= 0.0, p + ".speed", "must be >= 0");
        check(c.wheelbase > 0.0, p + ".wheelbase", "must be > 0");
    }

    bool lane_width_px_given = false;
    if (root.contains("perception")) {
        const auto& j = root.at("perception");
        const std::string p = top + ".perception";
        reject_unknown(j, p,
                       {"threshold", "row_fraction", "kernel_width", "split", "lane_width_px",
                        "ribbon", "sliding"});
        c.threshold = integer(j, p, "threshold", c.threshold);
        c.perception.row_fraction = num(j, p, "row_fraction", c.perception.row_fraction);
        c.perception.kernel_width = integer(j, p, "kernel_width", c.perception.kernel_width);
        const std::string split = text(j, p, "split", "midpoint");
        if (split == "midpoint")
            c.perception.split = SplitStrategy::AtMidpoint;
        else if (split == "global_peak")
            c.perception.split = SplitStrategy::AtGlobalPeak;
        else
            throw ConfigError(p + ".split: expected \"midpoint\" or \"global_peak\"");
        if (j.contains("lane_width_px")) {
            lane_width_px_given = true;
            c.perception.lane_width_px = num(j, p, "lane_width_px", c.perception.lane_width_px);
        }
        if (j.contains("ribbon")) {
            const auto& r = j.at("ribbon");
            const std::string rp = p + ".ribbon";
            reject_unknown(r, rp,
                           {"square_half_width", "front_radius", "back_radius", "lateral_radius",
                            "step_cap", "max_iterations", "min_ribbon_pixels", "forward_weight"});
            auto& rb = c.perception.ribbon;
            rb.square_half_width = integer(r, rp, "square_half_width", rb.square_half_width);
            rb.front_radius = num(r, rp, "front_radius", rb.front_radius);
            rb.back_radius = num(r, rp, "back_radius", rb.back_radius);
            rb.lateral_radius = num(r, rp, "lateral_radius", rb.lateral_radius);
            rb.step_cap = num(r, rp, "step_cap", rb.step_cap);
            rb.max_iterations = integer(r, rp, "max_iterations", rb.max_iterations);
            rb.min_ribbon_pixels = integer(r, rp, "min_ribbon_pixels", rb.min_ribbon_pixels);
            rb.forward_weight = num(r, rp, "forward_weight", rb.forward_weight);
            check(rb.valid(), rp,
                  "requires front >= lateral >= back > square_half_width, forward_weight >= 1");
        }
        if (j.contains("sliding")) {
            const auto& s = j.at("sliding");
            const std::string sp = p + ".sliding";
            reject_unknown(s, sp, {"window_width", "n_windows"});
            c.perception.sliding_window_width =
                integer(s, sp, "window_width", c.perception.sliding_window_width);
            c.perception.sliding_n_windows =
                integer(s, sp, "n_windows", c.perception.sliding_n_windows);
            check(c.perception.sliding_window_width >= 1, sp + ".window_width", "must be >= 1");
            check(c.perception.sliding_n_windows >= 1, sp + ".n_windows", "must be >= 1");
        }
        check(c.threshold >= 0 && c.threshold <= 255, p + ".threshold", "must be in [0, 255]");
        check(c.perception.row_fraction > 0.0 && c.perception.row_fraction <= 1.0,
              p + ".row_fraction", "must be in (0, 1]");
        check(c.perception.kernel_width >= 1 && c.perception.kernel_width % 2 == 1,
              p + ".kernel_width", "must be odd and >= 1");
        check(c.perception.lane_width_px > 0.0, p + ".lane_width_px", "must be > 0");
    }
    if (!lane_width_px_given)
        c.perception.lane_width_px = c.road.lane_width * c.camera.px_per_m();

    if (root.contains("gen")) {
        const auto& j = root.at("gen");
        const std::string p = top + ".gen";
        reject_unknown(j, p, {"frame_count", "frame_spacing_m", "offset_m", "heading_err_deg"});
        c.gen.frame_count = integer(j, p, "frame_count", c.gen.frame_count);
        c.gen.frame_spacing = num(j, p, "frame_spacing_m", c.gen.frame_spacing);
        c.gen.offset = num(j, p, "offset_m", c.gen.offset);
        c.gen.heading_err_deg = num(j, p, "heading_err_deg", c.gen.heading_err_deg);
        check(c.gen.frame_count >= 1, p + ".frame_count", "must be >= 1");
        check(c.gen.frame_spacing > 0.0, p + ".frame_spacing_m", "must be > 0");
    }

    if (root.contains("parking")) {
        const auto& j = root.at("parking");
        const std::string p = top + ".parking";
        reject_unknown(j, p,
                       {"vehicle", "layout", "min_depth_mm", "min_length_m", "max_spike_run",
                        "spike_threshold_mm", "lateral_gap_m", "front_clearance_m"});
        if (j.contains("vehicle")) {
            const auto& v = j.at("vehicle");
            const std::string vp = p + ".vehicle";
            reject_unknown(v, vp, {"wheelbase", "length", "width", "delta_max"});
            auto& veh = c.parking.vehicle;
            veh.wheelbase = num(v, vp, "wheelbase", veh.wheelbase);
            veh.length = num(v, vp, "length", veh.length);
            veh.width = num(v, vp, "width", veh.width);
            veh.delta_max = num(v, vp, "delta_max", veh.delta_max);
            check(veh.wheelbase > 0.0, vp + ".wheelbase", "must be > 0");
            check(veh.length > veh.wheelbase, vp + ".length", "must exceed wheelbase");
            check(veh.width > 0.0, vp + ".width", "must be > 0");
            check(veh.delta_max > 0.0 && veh.delta_max < kPi / 2.0, vp + ".delta_max",
                  "must be in (0, pi/2)");
        }
        if (j.contains("layout")) {
            const auto& l = j.at("layout");
            const std::string lp = p + ".layout";
            reject_unknown(l, lp,
                           {"pass_length_m", "sample_spacing_m", "wall_range_mm", "gap_start_m",
                            "gap_length_m", "gap_depth_mm", "spike_count", "wall_noise_mm"});
            auto& lay = c.parking.layout;
            lay.pass_length = num(l, lp, "pass_length_m", lay.pass_length);
            lay.sample_spacing = num(l, lp, "sample_spacing_m", lay.sample_spacing);
            lay.wall_range_mm = num(l, lp, "wall_range_mm", lay.wall_range_mm);
            lay.gap_start = num(l, lp, "gap_start_m", lay.gap_start);
            lay.gap_length = num(l, lp, "gap_length_m", lay.gap_length);
            lay.gap_depth_mm = num(l, lp, "gap_depth_mm", lay.gap_depth_mm);
            lay.spike_count = integer(l, lp, "spike_count", lay.spike_count);
            lay.wall_noise_mm = num(l, lp, "wall_noise_mm", lay.wall_noise_mm);
            check(lay.pass_length > 0.0, lp + ".pass_length_m", "must be > 0");
            check(lay.sample_spacing > 0.0, lp + ".sample_spacing_m", "must be > 0");
            check(lay.wall_range_mm > 0.0 && lay.wall_range_mm <= kRangeOutOfRange,
                  lp + ".wall_range_mm", "must be in (0, 2000]");
            check(lay.gap_depth_mm > 0.0 && lay.gap_depth_mm <= kRangeOutOfRange,
                  lp + ".gap_depth_mm", "must be in (0, 2000]");
            check(lay.gap_length >= 0.0, lp + ".gap_length_m", "must be >= 0");
            check(lay.spike_count >= 0, lp + ".spike_count", "must be >= 0");
        }
        c.parking.min_depth_mm = num(j, p, "min_depth_mm", c.parking.min_depth_mm);
        if (j.contains("min_length_m"))
            c.parking.min_length = num(j, p, "min_length_m", 0.0);
        c.parking.max_spike_run = integer(j, p, "max_spike_run", c.parking.max_spike_run);
        c.parking.spike_threshold_mm =
            num(j, p, "spike_threshold_mm", c.parking.spike_threshold_mm);
        if (j.contains("lateral_gap_m"))
            c.parking.lateral_gap = num(j, p, "lateral_gap_m", 0.0);
        c.parking.front_clearance = num(j, p, "front_clearance_m", c.parking.front_clearance);
        check(c.parking.min_depth_mm > 0.0 && c.parking.min_depth_mm <= kRangeOutOfRange,
              p + ".min_depth_mm", "must be in (0, 2000]");
        check(c.parking.max_spike_run >= 1, p + ".max_spike_run", "must be >= 1");
        check(c.parking.spike_threshold_mm > 0.0, p + ".spike_threshold_mm", "must be > 0");
    }

    // Cross-field: arc radii must exceed the wheelbase.
    for (std::size_t i = 0; i < c.road.segments.size(); ++i)
        if (std::holds_alternative<ArcSegment>(c.road.segments[i]))
            cfg::check(std::get<ArcSegment>(c.road.segments[i]).radius > c.wheelbase,
                       "config.road.segments[" + std::to_string(i) + "].radius",
                       "must exceed sim.wheelbase");

    c.noise.rng_seed = c.seed;
    return c;
}

inline ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return parse_scenario_config(root);
}

} // namespace lanekeep
