#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "lanekeep/errors.hpp"
#include "lanekeep/geometry.hpp"
#include "lanekeep/ribbon.hpp"

namespace lanekeep {

// Quadratic lane curve x(y) = c2*y^2 + c1*y + c0, x and y in pixels.
struct LanePolynomial {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    double eval(double y) const { return (c2 * y + c1) * y + c0; }
    double slope(double y) const { return 2.0 * c2 * y + c1; } // dx/dy
};

enum class LanesSeen { Both, LeftOnly, RightOnly };

// The controller's two error signals, extracted from the ideal path.
// distance_error: signed pixels, positive when the path lies right of the
// frame center. angle_error_alpha: degrees, positive when the path bends
// rightward looking up-image.
struct FeedbackSample {
    double distance_error = 0.0;
    double angle_error_alpha = 0.0;
    LanesSeen lanes_seen = LanesSeen::Both;
};

struct IdealPath {
    LanePolynomial poly;
    LanesSeen seen = LanesSeen::Both;
};

// Least-squares fit of x as a function of y. The y values are centered on
// their mean before forming the 3x3 normal equations, which keeps the system
// well conditioned for image-sized coordinates.
inline LanePolynomial fit_polynomial(const LanePixelCluster& cluster) {
    const auto& pts = cluster.points;
    std::set<int> distinct_y;
    for (const auto& p : pts) distinct_y.insert(p.y);
    if (pts.size() < 3 || distinct_y.size() < 3)
        throw InsufficientPoints("fit_polynomial: need >= 3 points with >= 3 distinct y");

    double y_mean = 0.0;
    for (const auto& p : pts) y_mean += p.y;
    y_mean /= static_cast<double>(pts.size());

    // Accumulate sums of powers of u = y - y_mean and moments of x.
    double s[5] = {static_cast<double>(pts.size()), 0, 0, 0, 0};
    double t[3] = {0, 0, 0};
    for (const auto& p : pts) {
        const double u = p.y - y_mean;
        const double u2 = u * u;
        s[1] += u;
        s[2] += u2;
        s[3] += u2 * u;
        s[4] += u2 * u2;
        t[0] += p.x;
        t[1] += p.x * u;
        t[2] += p.x * u2;
    }

    double a[3][4] = {{s[0], s[1], s[2], t[0]},
                      {s[1], s[2], s[3], t[1]},
                      {s[2], s[3], s[4], t[2]}};
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw InsufficientPoints("fit_polynomial: degenerate normal equations");
        for (int c = 0; c < 4; ++c) std::swap(a[col][c], a[pivot][c]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
        }
    }
    const double b0 = a[0][3] / a[0][0]; // x(u) = b2 u^2 + b1 u + b0
    const double b1 = a[1][3] / a[1][1];
    const double b2 = a[2][3] / a[2][2];

    LanePolynomial poly;
    // Expand back to x(y) with y = u + y_mean.
    poly.c2 = b2;
    poly.c1 = b1 - 2.0 * b2 * y_mean;
    poly.c0 = b0 - b1 * y_mean + b2 * y_mean * y_mean;

    auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                        [](const LanePixel& a_, const LanePixel& b_) {
                                            return a_.y < b_.y;
                                        });
    poly.y_min = lo->y;
    poly.y_max = hi->y;
    if (!std::isfinite(poly.c0) || !std::isfinite(poly.c1) || !std::isfinite(poly.c2))
        throw InsufficientPoints("fit_polynomial: non-finite coefficients");
    return poly;
}

// The per-frame reference curve. With both lanes it is the coefficient-wise
// mean of the two fits; with one lane missing it imitates the available curve
// translated by half the nominal lane width toward the road center.
inline IdealPath ideal_path(const std::optional<LanePolynomial>& left,
                            const std::optional<LanePolynomial>& right, double lane_width_px) {
    if (!left && !right) throw NoLanesVisible("ideal_path: both lanes missing");
    IdealPath out;
    if (left && right) {
        out.seen = LanesSeen::Both;
        out.poly.c0 = 0.5 * (left->c0 + right->c0);
        out.poly.c1 = 0.5 * (left->c1 + right->c1);
        out.poly.c2 = 0.5 * (left->c2 + right->c2);
        out.poly.y_min = std::min(left->y_min, right->y_min);
        out.poly.y_max = std::max(left->y_max, right->y_max);
    } else if (left) {
        out.seen = LanesSeen::LeftOnly;
        out.poly = *left;
        out.poly.c0 += lane_width_px * 0.5;
    } else {
        out.seen = LanesSeen::RightOnly;
        out.poly = *right;
        out.poly.c0 -= lane_width_px * 0.5;
    }
    return out;
}

// Reads the two error signals at the path's bottommost point y_b = y_max.
// alpha = atan(-dx/dy) in degrees: y grows downward while "ahead" is
// up-image, so the sign flips to make rightward-bending paths positive.
inline FeedbackSample extract_feedback(const IdealPath& ideal, int frame_width,
                                       double alpha_cap_deg = 85.0) {
    FeedbackSample fb;
    fb.lanes_seen = ideal.seen;
    const double yb = ideal.poly.y_max;
    fb.distance_error = ideal.poly.eval(yb) - frame_width * 0.5;
    const double alpha = rad_to_deg(std::atan(-ideal.poly.slope(yb)));
    fb.angle_error_alpha = std::clamp(alpha, -alpha_cap_deg, alpha_cap_deg);
    return fb;
}

} // namespace lanekeep
