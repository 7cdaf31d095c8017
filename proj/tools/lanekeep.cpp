// lanekeep: command-line front end for the lane-keeping and parking toolkit.
// Commands compose via files (PGM frames, CSV traces, JSON reports) so every
// intermediate is inspectable; all outputs are deterministic for a given
// seed and configuration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lanekeep/config.hpp"
#include "lanekeep/image.hpp"
#include "lanekeep/parking.hpp"
#include "lanekeep/perception.hpp"
#include "lanekeep/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lanekeep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;

std::string frame_name(int index, const char* suffix = "") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "frame_%06d%s.pgm", index, suffix);
    return buf;
}

ScenarioConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    ScenarioConfig cfg = path.empty() ? default_scenario_config() : load_scenario_config(path);
    if (seed_override) {
        cfg.seed = *seed_override;
        cfg.noise.rng_seed = *seed_override;
    }
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

json poly_json(const std::optional<LanePolynomial>& p) {
    if (!p) return nullptr;
    return json{{"c0", p->c0}, {"c1", p->c1}, {"c2", p->c2}, {"y_min", p->y_min},
                {"y_max", p->y_max}};
}

VehicleState pose_on_road(const RoadModel& road, double s, double offset, double heading_err,
                          double speed) {
    const RoadPose rp = road_pose(road, s);
    const Vec2 p = rp.center + left_normal(rp.tangent) * offset;
    return {p.x, p.y, wrap_angle(rp.tangent + heading_err), speed};
}

// ---------------------------------------------------------------------------
// gen-scene: PGM frames plus ground truth for tracker evaluation
// ---------------------------------------------------------------------------

int cmd_gen_scene(const ScenarioConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    Rng rng(cfg.seed);

    std::ofstream truth(out_dir / "truth.csv", std::ios::binary);
    if (!truth) throw Error("cannot write " + (out_dir / "truth.csv").string());
    truth << "frame,arclength_m,offset_m,heading_err_deg,expected_err_px,expected_alpha_deg\n";

    const double ppm = cfg.camera.px_per_m();
    const double heading_err = deg_to_rad(cfg.gen.heading_err_deg);
    const double total = cfg.road.total_length();

    // Frames are numbered from frame_000001.pgm upward.
    for (int k = 0; k < cfg.gen.frame_count; ++k) {
        const int frame = k + 1;
        const double s = std::min(k * cfg.gen.frame_spacing, std::max(0.0, total - 1e-6));
        const VehicleState v = pose_on_road(cfg.road, s, cfg.gen.offset, heading_err, 0.0);

        const BinaryImage img = render_camera(cfg.road, v, cfg.camera, cfg.noise, rng);
        save_pgm(img, out_dir / frame_name(frame));
        save_pgm(render_lane_mask(cfg.road, v, cfg.camera, true),
                 out_dir / frame_name(frame, "_left"));
        save_pgm(render_lane_mask(cfg.road, v, cfg.camera, false),
                 out_dir / frame_name(frame, "_right"));

        truth << frame << ',' << format_double(s) << ',' << format_double(cfg.gen.offset) << ','
              << format_double(cfg.gen.heading_err_deg) << ','
              << format_double(-cfg.gen.offset * ppm) << ','
              << format_double(-cfg.gen.heading_err_deg) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// track: single-frame perception report
// ---------------------------------------------------------------------------

int cmd_track(const ScenarioConfig& cfg, const std::string& image_path,
              const std::string& out_path) {
    const GrayImage gray = load_pgm(image_path);
    const BinaryImage img = threshold(gray, cfg.threshold);
    const FrameAnalysis analysis = analyze_frame(img, cfg.perception);

    json report;
    report["image"] = fs::path(image_path).filename().string();
    report["base_left"] = analysis.bases.left ? json(*analysis.bases.left) : json(nullptr);
    report["base_right"] = analysis.bases.right ? json(*analysis.bases.right) : json(nullptr);
    report["cluster_left_size"] = analysis.left_cluster.points.size();
    report["cluster_right_size"] = analysis.right_cluster.points.size();
    report["left_poly"] = poly_json(analysis.left_poly);
    report["right_poly"] = poly_json(analysis.right_poly);

    if (!analysis.feedback) {
        report["error"] = "NoLanesVisible";
        const std::string text = report.dump(2) + "\n";
        if (out_path.empty())
            std::cout << text;
        else
            write_text(out_path, text);
        return kExitDomain;
    }

    report["ideal_poly"] = poly_json(analysis.ideal->poly);
    report["distance_error_px"] = analysis.feedback->distance_error;
    report["alpha_deg"] = analysis.feedback->angle_error_alpha;
    report["lanes"] = lanes_seen_name(analysis.feedback->lanes_seen);

    const std::string text = report.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// compare: ribbon vs sliding-window capture fractions over a corpus
// ---------------------------------------------------------------------------

struct CaptureCounts {
    std::size_t captured = 0;
    std::size_t truth = 0;
};

CaptureCounts side_capture(const LanePixelCluster& cluster, const BinaryImage& truth_mask) {
    CaptureCounts out;
    out.truth = truth_mask.count_true();
    for (const auto& p : cluster.points)
        if (truth_mask.at(p.x, p.y)) ++out.captured;
    return out;
}

int cmd_compare(const ScenarioConfig& cfg, const fs::path& corpus, const std::string& out_path) {
    std::vector<int> frames;
    for (int k = 1;; ++k) {
        if (!fs::exists(corpus / frame_name(k))) break;
        frames.push_back(k);
    }
    if (frames.empty()) {
        std::cerr << "compare: no frames found in " << corpus << "\n";
        return kExitInput;
    }

    std::string csv = "frame,ribbon_fraction,sliding_fraction\n";
    for (int k : frames) {
        const fs::path left_mask_path = corpus / frame_name(k, "_left");
        const fs::path right_mask_path = corpus / frame_name(k, "_right");
        if (!fs::exists(left_mask_path) || !fs::exists(right_mask_path)) {
            std::cerr << "compare: missing truth masks for frame " << k << "\n";
            return kExitInput;
        }
        const BinaryImage img = load_pgm_binary(corpus / frame_name(k));
        const BinaryImage truth_left = load_pgm_binary(left_mask_path);
        const BinaryImage truth_right = load_pgm_binary(right_mask_path);

        const Histogram hist = column_histogram(img, cfg.perception.row_fraction);
        const Histogram smooth = convolve_histogram(hist, box_kernel(cfg.perception.kernel_width));
        const BasePoints bases = find_base_points(smooth, cfg.perception.split);

        LanePixelCluster ribbon_left, ribbon_right, slide_left, slide_right;
        ClaimMask mask(img.width, img.height);
        if (bases.left) {
            ribbon_left = track_lane(img, *bases.left, cfg.perception.ribbon, mask, LaneSide::Left);
            slide_left = sliding_window_track(img, *bases.left, cfg.perception.sliding_window_width,
                                              cfg.perception.sliding_n_windows, LaneSide::Left);
        }
        if (bases.right) {
            ribbon_right =
                track_lane(img, *bases.right, cfg.perception.ribbon, mask, LaneSide::Right);
            slide_right =
                sliding_window_track(img, *bases.right, cfg.perception.sliding_window_width,
                                     cfg.perception.sliding_n_windows, LaneSide::Right);
        }

        const CaptureCounts rl = side_capture(ribbon_left, truth_left);
        const CaptureCounts rr = side_capture(ribbon_right, truth_right);
        const CaptureCounts sl = side_capture(slide_left, truth_left);
        const CaptureCounts sr = side_capture(slide_right, truth_right);
        const double denom = static_cast<double>(rl.truth + rr.truth);
        const double ribbon_frac = denom > 0 ? (rl.captured + rr.captured) / denom : 0.0;
        const double slide_frac = denom > 0 ? (sl.captured + sr.captured) / denom : 0.0;

        csv += std::to_string(k) + "," + format_double(ribbon_frac) + "," +
               format_double(slide_frac) + "\n";
    }
    if (out_path.empty())
        std::cout << csv;
    else
        write_text(out_path, csv);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate: closed-loop run producing a trace CSV
// ---------------------------------------------------------------------------

int cmd_simulate(const ScenarioConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    ScenarioSetup setup = cfg.to_setup();
    if (cfg.dump_frames) {
        fs::create_directories(out_dir / "frames");
        setup.frame_sink = [&](int index, const BinaryImage& img) {
            save_pgm(img, out_dir / "frames" / frame_name(index + 1));
        };
    }
    const SimTrace trace = run_scenario(setup);
    write_trace_csv(trace, out_dir / "trace.csv");
    std::cout << "simulate: " << trace.rows.size() << " steps, "
              << (trace.left_road ? "VehicleLeftRoad" : "completed") << " at t="
              << format_double(trace.end_time) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// park: scan generation, denoising, space detection, planning, rollout
// ---------------------------------------------------------------------------

RangeScan generate_scan(const ParkingConfig& pc, Rng& rng) {
    const ParkingLayout& lay = pc.layout;
    RangeScan scan;
    const int n = static_cast<int>(lay.pass_length / lay.sample_spacing) + 1;
    for (int i = 0; i < n; ++i) {
        RangeSample s;
        s.odometry_s = i * lay.sample_spacing;
        const bool in_gap =
            s.odometry_s >= lay.gap_start && s.odometry_s <= lay.gap_start + lay.gap_length;
        if (in_gap)
            s.range = lay.gap_depth_mm;
        else
            s.range = std::clamp(lay.wall_range_mm +
                                     rng.uniform(-lay.wall_noise_mm, lay.wall_noise_mm),
                                 1.0, kRangeOutOfRange);
        scan.samples.push_back(s);
    }
    // Injected in-gap noise spikes, each one or two samples long.
    for (int k = 0; k < lay.spike_count; ++k) {
        const double frac = 0.15 + 0.7 * rng.uniform();
        const double pos = lay.gap_start + frac * lay.gap_length;
        const int idx = static_cast<int>(pos / lay.sample_spacing);
        const int run = 1 + static_cast<int>(rng.below(std::max(1, pc.max_spike_run)));
        const double value = rng.uniform(0.8 * lay.wall_range_mm, 1.5 * lay.wall_range_mm);
        for (int j = 0; j < run && idx + j < static_cast<int>(scan.samples.size()); ++j)
            scan.samples[idx + j].range = value;
    }
    return scan;
}

json plan_to_json(const ManeuverPlan& plan) {
    json segs = json::array();
    for (const auto& s : plan.segments)
        segs.push_back({{"speed", s.speed}, {"delta", s.delta}, {"duration", s.duration}});
    return json{{"segments", segs},
                {"start_pose",
                 {{"x", plan.start_pose.x}, {"y", plan.start_pose.y},
                  {"heading", plan.start_pose.heading}}},
                {"expected_final_pose",
                 {{"x", plan.expected_final_pose.x}, {"y", plan.expected_final_pose.y},
                  {"heading", plan.expected_final_pose.heading}}}};
}

void write_rollout_csv(const RolloutResult& rollout, double dt, const fs::path& path) {
    std::string csv = "t,x,y,heading,collided\n";
    double t = 0.0;
    for (const auto& p : rollout.poses) {
        csv += format_double(t) + "," + format_double(p.x) + "," + format_double(p.y) + "," +
               format_double(p.heading) + "," + (rollout.collided ? "1" : "0") + "\n";
        t += dt;
    }
    write_text(path, csv);
}

int cmd_park(const ScenarioConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const ParkingConfig& pc = cfg.parking;
    Rng rng(cfg.seed);

    const RangeScan raw = generate_scan(pc, rng);
    write_scan_csv(raw, out_dir / "scan.csv");
    const RangeScan clean = interpolate_scan(raw, pc.max_spike_run, pc.spike_threshold_mm);
    write_scan_csv(clean, out_dir / "scan_clean.csv");

    const double lateral_gap = pc.effective_lateral_gap();
    const double min_len =
        pc.min_length ? *pc.min_length : min_space_length(pc.vehicle, lateral_gap);
    const auto space = detect_space(clean, min_len, pc.min_depth_mm);

    json space_json;
    json plan_json;
    plan_json["segments"] = json::array();
    if (!space) {
        space_json = {{"found", false}, {"min_length_m", min_len}};
        write_text(out_dir / "space.json", space_json.dump(2) + "\n");
        write_text(out_dir / "plan.json", plan_json.dump(2) + "\n");
        std::cout << "park: NoSpace\n";
        return kExitOk;
    }
    space_json = {{"found", true},
                  {"start_s", space->start_s},
                  {"end_s", space->end_s},
                  {"depth_m", space->depth},
                  {"min_length_m", min_len}};
    write_text(out_dir / "space.json", space_json.dump(2) + "\n");

    try {
        const ManeuverPlan plan = plan_park_in(*space, pc.vehicle, lateral_gap);
        const auto obstacles = parking_obstacles(*space, lateral_gap, pc.vehicle);
        const double dt = 0.005;
        const RolloutResult rollout = rollout_plan(plan, plan.start_pose, pc.vehicle, obstacles, dt);
        write_rollout_csv(rollout, dt, out_dir / "rollout.csv");

        plan_json = plan_to_json(plan);
        plan_json["rollout"] = {
            {"collided", rollout.collided},
            {"final_pose",
             {{"x", rollout.final_pose.x}, {"y", rollout.final_pose.y},
              {"heading", rollout.final_pose.heading}}}};
        write_text(out_dir / "plan.json", plan_json.dump(2) + "\n");
        std::cout << "park: plan with " << plan.segments.size() << " segments, rollout "
                  << (rollout.collided ? "COLLIDED" : "clear") << "\n";
    } catch (const SpaceTooSmall& e) {
        plan_json["error"] = "SpaceTooSmall";
        plan_json["detail"] = e.what();
        write_text(out_dir / "plan.json", plan_json.dump(2) + "\n");
        std::cout << "park: SpaceTooSmall\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// fit-distance: sign-height distance model from a CSV of samples
// ---------------------------------------------------------------------------

int cmd_fit_distance(const std::string& samples_path, const std::string& out_path) {
    std::ifstream in(samples_path);
    if (!in) {
        std::cerr << "fit-distance: cannot open " << samples_path << "\n";
        return kExitInput;
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("distance_m,height_px", 0) != 0) {
        std::cerr << "fit-distance: expected header 'distance_m,height_px'\n";
        return kExitInput;
    }
    std::vector<SignHeightSample> samples;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            std::cerr << "fit-distance: bad row '" << line << "'\n";
            return kExitInput;
        }
        SignHeightSample s;
        s.true_distance = std::stod(line.substr(0, comma));
        s.pixel_height = std::stod(line.substr(comma + 1));
        samples.push_back(s);
    }
    if (samples.size() < 3) {
        std::cerr << "fit-distance: need at least 3 samples\n";
        return kExitInput;
    }
    const DistanceModel model = fit_sign_distance_model(samples);
    const json j = {{"a", model.a}, {"b", model.b}, {"d_min", model.d_min},
                    {"d_max", model.d_max}};
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lanekeep: deterministic lane-keeping and parking toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string image_path;
    std::string corpus_path;
    std::string samples_path;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", config_path, "Scenario configuration JSON");
        sub->add_option("--seed", seed, "Override the configured seed");
        if (needs_out) sub->add_option("--out", out_path, "Output path");
    };

    CLI::App* gen = app.add_subcommand("gen-scene", "Render frames plus ground truth");
    add_common(gen, true);
    gen->get_option("--out")->required();

    CLI::App* track = app.add_subcommand("track", "Run perception on one PGM frame");
    add_common(track, true);
    track->add_option("--image", image_path, "Input PGM frame")->required();

    CLI::App* compare = app.add_subcommand("compare", "Ribbon vs sliding-window capture fractions");
    add_common(compare, true);
    compare->add_option("--corpus", corpus_path, "Directory from gen-scene")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "Closed-loop scenario run");
    add_common(simulate, true);
    simulate->get_option("--out")->required();

    CLI::App* park = app.add_subcommand("park", "Scan, detect, plan and validate a parking run");
    add_common(park, true);
    park->get_option("--out")->required();

    CLI::App* fit = app.add_subcommand("fit-distance", "Fit the sign-height distance model");
    fit->add_option("--samples", samples_path, "CSV of distance_m,height_px")->required();
    fit->add_option("--out", out_path, "Output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (fit->parsed()) return cmd_fit_distance(samples_path, out_path);

        const ScenarioConfig cfg = load_config(config_path, seed);
        if (gen->parsed()) return cmd_gen_scene(cfg, out_path);
        if (track->parsed()) return cmd_track(cfg, image_path, out_path);
        if (compare->parsed()) return cmd_compare(cfg, corpus_path, out_path);
        if (simulate->parsed()) return cmd_simulate(cfg, out_path);
        if (park->parsed()) return cmd_park(cfg, out_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const MalformedHeader& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const TruncatedData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DegenerateSamples& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NoLanesVisible& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
