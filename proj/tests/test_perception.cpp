#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "lanekeep/perception.hpp"
#include "lanekeep/rng.hpp"

using namespace lanekeep;

namespace {

BinaryImage vertical_line(int w, int h, int column, int half_thickness = 1) {
    BinaryImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int dx = -half_thickness; dx <= half_thickness; ++dx)
            if (img.in_bounds(column + dx, y)) img.set(column + dx, y, true);
    return img;
}

// Quarter-circle lane that exits through the image side: the sharp-turn case.
BinaryImage curve_exiting_side(int w, int h, int base_x, double radius, int half_thickness = 2) {
    BinaryImage img(w, h);
    const double cx = base_x + radius; // circle center to the right
    const double cy = h - 1;
    for (int i = 0; i <= 2000; ++i) {
        const double a = kPi - (kPi / 2.0) * (i / 2000.0); // 180 -> 90 degrees
        const int x = static_cast<int>(std::lround(cx + radius * std::cos(a)));
        const int y = static_cast<int>(std::lround(cy - radius * std::sin(a)));
        for (int dy = -half_thickness; dy <= half_thickness; ++dy)
            for (int dx = -half_thickness; dx <= half_thickness; ++dx)
                if (img.in_bounds(x + dx, y + dy)) img.set(x + dx, y + dy, true);
    }
    return img;
}

std::size_t brute_histogram_bin(const BinaryImage& img, int column, double fraction) {
    const int rows = static_cast<int>(std::ceil(fraction * img.height));
    std::size_t n = 0;
    for (int y = img.height - rows; y < img.height; ++y)
        if (img.at(column, y)) ++n;
    return n;
}

} // namespace

TEST_CASE("column_histogram counts the bottom region") {
    const int H = 90;
    const BinaryImage img = vertical_line(120, H, 5, 0);
    const Histogram h = column_histogram(img, 1.0 / 3.0);
    CHECK(h.bins[5] == doctest::Approx(std::ceil(H / 3.0)));
    for (int x = 0; x < 120; ++x)
        if (x != 5) CHECK(h.bins[x] == 0.0);
}

TEST_CASE("pixels above the lower region are excluded") {
    BinaryImage img(30, 30);
    img.set(10, 3, true); // far above the bottom third
    const Histogram h = column_histogram(img, 1.0 / 3.0);
    for (double b : h.bins) CHECK(b == 0.0);
}

TEST_CASE("column_histogram matches the exhaustive count oracle") {
    Rng rng(41);
    BinaryImage img(120, 90);
    for (auto& px : img.data) px = rng.bernoulli(0.2) ? 1 : 0;
    const Histogram h = column_histogram(img, 1.0 / 3.0);
    for (int x = 0; x < img.width; ++x)
        CHECK(h.bins[x] == doctest::Approx(brute_histogram_bin(img, x, 1.0 / 3.0)));
}

TEST_CASE("convolution of a delta with a box kernel") {
    Histogram h;
    h.bins.assign(9, 0.0);
    h.bins[4] = 1.0;
    const Histogram out = convolve_histogram(h, {1.0, 1.0, 1.0});
    for (int i = 0; i < 9; ++i)
        CHECK(out.bins[i] == doctest::Approx(i >= 3 && i <= 5 ? 1.0 : 0.0));
}

TEST_CASE("convolution of zeros stays zero and even kernels are rejected") {
    Histogram h;
    h.bins.assign(16, 0.0);
    const Histogram out = convolve_histogram(h, {0.5, 1.0, 0.5});
    for (double b : out.bins) CHECK(b == 0.0);
    CHECK_THROWS_AS(convolve_histogram(h, {1.0, 1.0}), EvenKernel);
    CHECK_THROWS_AS(convolve_histogram(h, {}), EvenKernel);
}

TEST_CASE("convolution matches the naive double-loop oracle") {
    Rng rng(17);
    Histogram h;
    h.bins.resize(64);
    for (auto& b : h.bins) b = rng.uniform(0, 30);

    // Gaussian-shaped kernel, width 9.
    std::vector<double> kernel(9);
    for (int j = 0; j < 9; ++j) kernel[j] = std::exp(-0.5 * (j - 4) * (j - 4) / 4.0);

    const Histogram out = convolve_histogram(h, kernel);
    for (int i = 0; i < 64; ++i) {
        double expect = 0.0;
        for (int j = 0; j < 9; ++j) {
            const int src = i + j - 4;
            if (src >= 0 && src < 64) expect += h.bins[src] * kernel[j];
        }
        CHECK(out.bins[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("find_base_points with one peak per half") {
    Histogram h;
    h.bins.assign(400, 0.0);
    h.bins[100] = 30.0;
    h.bins[300] = 30.0;
    const BasePoints bp = find_base_points(h, SplitStrategy::AtMidpoint);
    REQUIRE(bp.left);
    REQUIRE(bp.right);
    CHECK(*bp.left == 100);
    CHECK(*bp.right == 300);
}

TEST_CASE("find_base_points reports a missing side") {
    Histogram h;
    h.bins.assign(400, 0.0);
    h.bins[100] = 30.0;
    const BasePoints bp = find_base_points(h, SplitStrategy::AtMidpoint);
    REQUIRE(bp.left);
    CHECK(*bp.left == 100);
    CHECK_FALSE(bp.right);

    Histogram empty;
    empty.bins.assign(10, 0.0);
    const BasePoints none = find_base_points(empty, SplitStrategy::AtMidpoint);
    CHECK_FALSE(none.left);
    CHECK_FALSE(none.right); // both missing is a legal result
}

TEST_CASE("find_base_points equals the per-region argmax oracle") {
    Rng rng(29);
    for (int trial = 0; trial < 300; ++trial) {
        Histogram h;
        const int n = 40 + static_cast<int>(rng.below(200));
        h.bins.resize(n);
        for (auto& b : h.bins) b = rng.bernoulli(0.3) ? rng.uniform(0, 50) : 0.0;

        for (const SplitStrategy split : {SplitStrategy::AtMidpoint, SplitStrategy::AtGlobalPeak}) {
            const BasePoints bp = find_base_points(h, split);

            int s;
            int right_begin;
            if (split == SplitStrategy::AtMidpoint) {
                s = n / 2;
                right_begin = s; // midpoint itself belongs to the right region
            } else {
                s = 0;
                for (int i = 1; i < n; ++i)
                    if (h.bins[i] > h.bins[s]) s = i;
                right_begin = s + 1;
            }
            auto brute = [&](int lo, int hi) -> std::optional<int> {
                std::optional<int> best;
                for (int i = lo; i < hi; ++i)
                    if (h.bins[i] > 0.0 && (!best || h.bins[i] > h.bins[*best])) best = i;
                return best;
            };
            CHECK(bp.left == brute(0, s));
            CHECK(bp.right == brute(right_begin, n));
            if (bp.left && bp.right) {
                CHECK(*bp.left < s);
                CHECK(s <= *bp.right);
            }
        }
    }
}

TEST_CASE("ribbon_step moves straight up a vertical line") {
    const BinaryImage img = vertical_line(100, 100, 50);
    RibbonConfig cfg;
    const Vec2 center{50.0, 70.0};
    const RibbonStep step = ribbon_step(img, center, cfg);
    REQUIRE(step.next_center);
    CHECK(step.next_center->x == doctest::Approx(50.0)); // left-right symmetry
    CHECK(step.next_center->y < center.y);               // forward bias wins
    CHECK_FALSE(step.captured.empty());
}

TEST_CASE("ribbon_step follows a rightward curve") {
    // Line bends right above the center; oracle recomputes the
    // forward-weighted centroid by exhaustive scan.
    BinaryImage img(120, 120);
    for (int y = 0; y < 120; ++y) {
        const int x = y > 60 ? 40 : 40 + (60 - y) / 2;
        for (int dx = -1; dx <= 1; ++dx)
            if (img.in_bounds(x + dx, y)) img.set(x + dx, y, true);
    }
    RibbonConfig cfg;
    const Vec2 center{40.0, 80.0};
    const RibbonStep step = ribbon_step(img, center, cfg);
    REQUIRE(step.next_center);

    double wsum = 0.0, wx = 0.0, wy = 0.0;
    int count = 0;
    for (int y = 0; y < 120; ++y) {
        for (int x = 0; x < 120; ++x) {
            if (!img.at(x, y)) continue;
            const double dx = x - center.x, dy = y - center.y;
            if (std::max(std::abs(dx), std::abs(dy)) <= cfg.square_half_width) continue;
            const double ry = dy < 0 ? cfg.front_radius : cfg.back_radius;
            const double ex = dx / cfg.lateral_radius, ey = dy / ry;
            if (ex * ex + ey * ey > 1.0) continue;
            const double w = dy < 0 ? cfg.forward_weight : 1.0;
            wsum += w;
            wx += w * x;
            wy += w * y;
            ++count;
        }
    }
    REQUIRE(count >= cfg.min_ribbon_pixels);
    Vec2 expect{wx / wsum, wy / wsum};
    Vec2 disp = expect - center;
    if (disp.norm() > cfg.step_cap) expect = center + disp * (cfg.step_cap / disp.norm());
    CHECK(step.next_center->x == doctest::Approx(expect.x).epsilon(1e-9));
    CHECK(step.next_center->y == doctest::Approx(expect.y).epsilon(1e-9));
    CHECK(step.next_center->x > center.x);
}

TEST_CASE("ribbon_step terminates on a blank image") {
    const BinaryImage img(60, 60);
    const RibbonStep step = ribbon_step(img, {30, 40}, RibbonConfig{});
    CHECK_FALSE(step.next_center);
    CHECK(step.captured.empty());
}

TEST_CASE("track_lane covers a solid vertical line") {
    const int W = 120, H = 160;
    const BinaryImage img = vertical_line(W, H, 60);
    RibbonConfig cfg;
    const LanePixelCluster cluster = track_lane(img, 60, cfg);

    std::set<std::pair<int, int>> captured;
    for (const auto& p : cluster.points) captured.insert({p.x, p.y});
    CHECK(captured.size() == cluster.points.size()); // points are unique

    std::size_t line_pixels = 0, hit = 0;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (img.at(x, y)) {
                ++line_pixels;
                if (captured.count({x, y})) ++hit;
            }
    CHECK(static_cast<double>(hit) / line_pixels >= 0.95);
}

TEST_CASE("track_lane on a blank image yields an empty cluster") {
    const BinaryImage img(80, 80);
    const LanePixelCluster cluster = track_lane(img, 40, RibbonConfig{});
    CHECK(cluster.points.empty());
}

TEST_CASE("every cluster point is a true source pixel") {
    Rng rng(67);
    for (int trial = 0; trial < 30; ++trial) {
        BinaryImage img(100, 100);
        for (auto& px : img.data) px = rng.bernoulli(0.1) ? 1 : 0;
        const int base = static_cast<int>(rng.below(100));
        const LanePixelCluster ribbon = track_lane(img, base, RibbonConfig{});
        for (const auto& p : ribbon.points) CHECK(img.at(p.x, p.y));
        const LanePixelCluster slide = sliding_window_track(img, base, 30, 8);
        for (const auto& p : slide.points) CHECK(img.at(p.x, p.y));
    }
}

TEST_CASE("track_lane terminates within max_iterations on fuzzed images") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        BinaryImage img(64, 64);
        const double density = rng.uniform(0.0, 0.6);
        for (auto& px : img.data) px = rng.bernoulli(density) ? 1 : 0;
        RibbonConfig cfg;
        cfg.max_iterations = 40;
        const int base = static_cast<int>(rng.below(64));
        const LanePixelCluster cluster = track_lane(img, base, cfg); // must return
        CHECK(cluster.points.size() <= img.count_true());
    }
}

TEST_CASE("ribbon beats the sliding window on a sharp side-exit curve") {
    const int W = 200, H = 160;
    const BinaryImage img = curve_exiting_side(W, H, 60, 90.0);

    RibbonConfig cfg;
    const LanePixelCluster ribbon = track_lane(img, 60, cfg);
    const LanePixelCluster slide = sliding_window_track(img, 60, 50, 8);

    const double total = static_cast<double>(img.count_true());
    const double ribbon_frac = ribbon.points.size() / total;
    const double slide_frac = slide.points.size() / total;
    CHECK(ribbon_frac > slide_frac); // strictly better through the turn
    CHECK(ribbon_frac > 0.5);
}

TEST_CASE("sliding windows capture a full vertical line") {
    const int W = 120, H = 160;
    const BinaryImage img = vertical_line(W, H, 60);
    const LanePixelCluster cluster = sliding_window_track(img, 60, 40, 8);
    CHECK(cluster.points.size() == img.count_true());
}

TEST_CASE("sliding windows above a side exit capture nothing") {
    const int W = 200, H = 160;
    // Curve exits the side at around y = H - 70; rows above stay empty for
    // the fixed-strip tracker no matter what.
    const BinaryImage img = curve_exiting_side(W, H, 60, 70.0);
    const LanePixelCluster slide = sliding_window_track(img, 60, 40, 8);
    int min_y = H;
    for (const auto& p : slide.points) min_y = std::min(min_y, p.y);
    int lane_min_y = H;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (img.at(x, y)) lane_min_y = std::min(lane_min_y, y);
    // The lane reaches higher rows than the windows ever captured.
    CHECK(lane_min_y < min_y);
}

TEST_CASE("sliding window equals the hand recurrence on a gentle S-curve") {
    const int W = 160, H = 160;
    BinaryImage img(W, H);
    for (int y = 0; y < H; ++y) {
        const int x = static_cast<int>(80 + 25 * std::sin(y * 0.05));
        for (int dx = -1; dx <= 1; ++dx)
            if (img.in_bounds(x + dx, y)) img.set(x + dx, y, true);
    }
    const int base = 80, width = 40, n_windows = 8;
    const LanePixelCluster got = sliding_window_track(img, base, width, n_windows);

    // Step-by-step reference simulation of the window recurrence.
    std::vector<LanePixel> expect;
    const int strip = (H + n_windows - 1) / n_windows;
    double cx = base;
    for (int w = 0; w < n_windows; ++w) {
        const int y1 = H - 1 - w * strip;
        const int y0 = std::max(0, y1 - strip + 1);
        if (y1 < 0) break;
        const int x0 = std::max(0, static_cast<int>(std::lround(cx)) - width / 2);
        const int x1 = std::min(W - 1, static_cast<int>(std::lround(cx)) + width / 2);
        long long sum = 0;
        int count = 0;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (img.at(x, y)) {
                    expect.push_back({x, y});
                    sum += x;
                    ++count;
                }
        if (count > 0) cx = static_cast<double>(sum) / count;
    }
    REQUIRE(got.points.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(got.points[i] == expect[i]);
}

TEST_CASE("claim mask keeps the two lane clusters disjoint") {
    const int W = 200, H = 120;
    BinaryImage img(W, H);
    for (int y = 0; y < H; ++y) {
        img.set(70, y, true);
        img.set(130, y, true);
    }
    ClaimMask mask(W, H);
    const LanePixelCluster left = track_lane(img, 70, RibbonConfig{}, mask, LaneSide::Left);
    const LanePixelCluster right = track_lane(img, 130, RibbonConfig{}, mask, LaneSide::Right);
    std::set<std::pair<int, int>> seen;
    for (const auto& p : left.points) seen.insert({p.x, p.y});
    for (const auto& p : right.points) CHECK_FALSE(seen.count({p.x, p.y}));
}

TEST_CASE("fit_polynomial recovers exact quadratic data") {
    // x = y^2/100 + y/5 + 50 takes integer values at multiples of 10, so the
    // samples lie exactly on the curve and the minimizer is unique.
    LanePixelCluster cluster;
    for (int y = 0; y <= 100; y += 10)
        cluster.points.push_back({y * y / 100 + y / 5 + 50, y});
    const LanePolynomial p = fit_polynomial(cluster);
    CHECK(p.c2 == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(p.c1 == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(p.c0 == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(p.y_min == 0.0);
    CHECK(p.y_max == 100.0);
}

TEST_CASE("fit_polynomial needs three distinct rows") {
    LanePixelCluster two;
    two.points = {{10, 0}, {20, 50}};
    CHECK_THROWS_AS(fit_polynomial(two), InsufficientPoints);

    LanePixelCluster flat;
    flat.points = {{10, 5}, {20, 5}, {30, 5}, {40, 6}};
    CHECK_THROWS_AS(fit_polynomial(flat), InsufficientPoints);
}

TEST_CASE("fit_polynomial matches the raw normal-equations oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        LanePixelCluster cluster;
        const double c2 = rng.uniform(-0.004, 0.004);
        const double c1 = rng.uniform(-0.8, 0.8);
        const double c0 = rng.uniform(40, 160);
        for (int i = 0; i < 200; ++i) {
            const int y = static_cast<int>(rng.below(240));
            const double x = c2 * y * y + c1 * y + c0 + rng.gaussian(0.0, 1.5);
            cluster.points.push_back({static_cast<int>(std::lround(x)), y});
        }
        const LanePolynomial fit = fit_polynomial(cluster);

        // Oracle: un-centered 3x3 normal equations in long double, solved by
        // Cramer's rule.
        long double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
        for (const auto& p : cluster.points) {
            const long double y = p.y;
            s0 += 1;
            s1 += y;
            s2 += y * y;
            s3 += y * y * y;
            s4 += y * y * y * y;
            t0 += p.x;
            t1 += p.x * y;
            t2 += p.x * y * y;
        }
        const auto det3 = [](long double a, long double b, long double c, long double d,
                             long double e, long double f, long double g, long double h,
                             long double i) {
            return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
        };
        const long double d = det3(s0, s1, s2, s1, s2, s3, s2, s3, s4);
        const long double oc0 = det3(t0, s1, s2, t1, s2, s3, t2, s3, s4) / d;
        const long double oc1 = det3(s0, t0, s2, s1, t1, s3, s2, t2, s4) / d;
        const long double oc2 = det3(s0, s1, t0, s1, s2, t1, s2, s3, t2) / d;

        auto rss = [&](double a0, double a1, double a2) {
            double sum = 0.0;
            for (const auto& p : cluster.points) {
                const double r = p.x - (a2 * p.y * p.y + a1 * p.y + a0);
                sum += r * r;
            }
            return sum;
        };
        const double rss_fit = rss(fit.c0, fit.c1, fit.c2);
        const double rss_oracle =
            rss(static_cast<double>(oc0), static_cast<double>(oc1), static_cast<double>(oc2));
        CHECK(rss_fit == doctest::Approx(rss_oracle).epsilon(1e-6));
    }
}

TEST_CASE("fit_polynomial residual is a local minimum") {
    Rng rng(53);
    LanePixelCluster cluster;
    for (int i = 0; i < 150; ++i) {
        const int y = static_cast<int>(rng.below(200));
        const double x = 0.002 * y * y - 0.3 * y + 90 + rng.gaussian(0.0, 2.0);
        cluster.points.push_back({static_cast<int>(std::lround(x)), y});
    }
    const LanePolynomial fit = fit_polynomial(cluster);
    auto rss = [&](double a0, double a1, double a2) {
        double sum = 0.0;
        for (const auto& p : cluster.points) {
            const double r = p.x - (a2 * p.y * p.y + a1 * p.y + a0);
            sum += r * r;
        }
        return sum;
    };
    const double best = rss(fit.c0, fit.c1, fit.c2);
    for (int probe = 0; probe < 100; ++probe) {
        const double d0 = rng.uniform(-1e-3, 1e-3);
        const double d1 = rng.uniform(-1e-3, 1e-3);
        const double d2 = rng.uniform(-1e-3, 1e-3);
        CHECK(rss(fit.c0 + d0, fit.c1 + d1, fit.c2 + d2) >= best - 1e-9);
    }
}

TEST_CASE("ideal_path averages both lanes") {
    LanePolynomial left{100.0, 0.0, 0.0, 0.0, 100.0};
    LanePolynomial right{300.0, 0.0, 0.0, 0.0, 100.0};
    const IdealPath ideal = ideal_path(left, right, 200.0);
    CHECK(ideal.poly.eval(50.0) == doctest::Approx(200.0));
    CHECK(ideal.seen == LanesSeen::Both);
}

TEST_CASE("ideal_path biases a single lane by half the lane width") {
    LanePolynomial left{100.0, 0.0, 0.0, 0.0, 100.0};
    const IdealPath from_left = ideal_path(left, std::nullopt, 200.0);
    CHECK(from_left.poly.eval(0.0) == doctest::Approx(200.0));
    CHECK(from_left.seen == LanesSeen::LeftOnly);

    LanePolynomial right{300.0, 0.0, 0.0, 0.0, 100.0};
    const IdealPath from_right = ideal_path(std::nullopt, right, 200.0);
    CHECK(from_right.poly.eval(0.0) == doctest::Approx(200.0));
    CHECK(from_right.seen == LanesSeen::RightOnly);

    CHECK_THROWS_AS(ideal_path(std::nullopt, std::nullopt, 200.0), NoLanesVisible);
}

TEST_CASE("ideal_path equals the pointwise average at every y") {
    Rng rng(71);
    for (int trial = 0; trial < 100; ++trial) {
        LanePolynomial l{rng.uniform(0, 200), rng.uniform(-1, 1), rng.uniform(-0.01, 0.01), 0, 160};
        LanePolynomial r{rng.uniform(0, 200), rng.uniform(-1, 1), rng.uniform(-0.01, 0.01), 0, 160};
        const IdealPath ideal = ideal_path(l, r, 140.0);
        for (double y = 0; y <= 160; y += 8)
            CHECK(ideal.poly.eval(y) ==
                  doctest::Approx(0.5 * (l.eval(y) + r.eval(y))).epsilon(1e-12));
    }
}

TEST_CASE("extract_feedback on a centered vertical path") {
    LanePolynomial vertical{120.0, 0.0, 0.0, 0.0, 159.0};
    const FeedbackSample fb = extract_feedback({vertical, LanesSeen::Both}, 240);
    CHECK(fb.distance_error == doctest::Approx(0.0));
    CHECK(fb.angle_error_alpha == doctest::Approx(0.0));
}

TEST_CASE("extract_feedback slope one gives alpha -45 degrees") {
    // x(y) = y with the bottom point at the frame center.
    LanePolynomial diag{0.0, 1.0, 0.0, 0.0, 120.0};
    const FeedbackSample fb = extract_feedback({diag, LanesSeen::Both}, 240);
    CHECK(fb.distance_error == doctest::Approx(0.0));
    CHECK(fb.angle_error_alpha == doctest::Approx(-45.0));
}

TEST_CASE("extract_feedback derivative matches central differences") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        LanePolynomial p{rng.uniform(0, 240), rng.uniform(-1, 1), rng.uniform(-0.01, 0.01), 0,
                         rng.uniform(50, 200)};
        const FeedbackSample fb = extract_feedback({p, LanesSeen::Both}, 240);
        const double h = 0.01;
        const double yb = p.y_max;
        const double fd = (p.eval(yb + h) - p.eval(yb - h)) / (2 * h);
        const double alpha_fd = rad_to_deg(std::atan(-fd));
        if (std::abs(alpha_fd) <= 85.0)
            CHECK(fb.angle_error_alpha == doctest::Approx(alpha_fd).epsilon(1e-4));
        CHECK(std::isfinite(fb.angle_error_alpha));
        CHECK(std::abs(fb.angle_error_alpha) <= 85.0);
    }
}
