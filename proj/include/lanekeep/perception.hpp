#pragma once

#include <optional>

#include "lanekeep/histogram.hpp"
#include "lanekeep/polyfit.hpp"
#include "lanekeep/ribbon.hpp"

namespace lanekeep {

struct PerceptionConfig {
    double row_fraction = 1.0 / 3.0; // histogram region: bottom third
    int kernel_width = 15;           // box filter over the histogram
    SplitStrategy split = SplitStrategy::AtMidpoint;
    RibbonConfig ribbon;
    int sliding_window_width = 50; // baseline tracker, for comparisons
    int sliding_n_windows = 8;
    double lane_width_px = 140.0; // nominal lane width, used when a lane is missing
};

// Everything the single-frame pipeline produces; the pieces the CLI report
// and the simulator both need.
struct FrameAnalysis {
    BasePoints bases;
    LanePixelCluster left_cluster;
    LanePixelCluster right_cluster;
    std::optional<LanePolynomial> left_poly;
    std::optional<LanePolynomial> right_poly;
    std::optional<IdealPath> ideal;
    std::optional<FeedbackSample> feedback; // empty when no lane was fit
};

// Full single-frame pipeline: histogram of the lower region, convolution,
// base points, ribbon tracking (left first, sharing a claim mask), quadratic
// fits, ideal path, feedback extraction. Lanes that fail to fit are treated
// as missing; `feedback` is empty only when both are.
inline FrameAnalysis analyze_frame(const BinaryImage& img, const PerceptionConfig& cfg) {
    FrameAnalysis out;
    const Histogram hist = column_histogram(img, cfg.row_fraction);
    const Histogram smooth = convolve_histogram(hist, box_kernel(cfg.kernel_width));
    out.bases = find_base_points(smooth, cfg.split);

    ClaimMask mask(img.width, img.height);
    if (out.bases.left)
        out.left_cluster = track_lane(img, *out.bases.left, cfg.ribbon, mask, LaneSide::Left);
    if (out.bases.right)
        out.right_cluster = track_lane(img, *out.bases.right, cfg.ribbon, mask, LaneSide::Right);

    try {
        out.left_poly = fit_polynomial(out.left_cluster);
    } catch (const InsufficientPoints&) {}
    try {
        out.right_poly = fit_polynomial(out.right_cluster);
    } catch (const InsufficientPoints&) {}

    if (out.left_poly || out.right_poly) {
        out.ideal = ideal_path(out.left_poly, out.right_poly, cfg.lane_width_px);
        out.feedback = extract_feedback(*out.ideal, img.width);
    }
    return out;
}

} // namespace lanekeep
