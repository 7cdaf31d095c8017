#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "lanekeep/geometry.hpp"
#include "lanekeep/image.hpp"

namespace lanekeep {

// The density tracker agent: a capture square surrounded by a pear-shaped
// ring. The ring's white-pixel centroid gives the next square center; the
// pear shape (front radius > back radius) plus forward_weight make the agent
// prefer pixels ahead of it, which disambiguates forks and sharp turns.
//
// The pear is realized as two half-ellipses sharing the lateral axis: the
// half ahead of the center (smaller y) uses radii (lateral, front), the half
// behind uses (lateral, back).
struct RibbonConfig {
    int square_half_width = 12;   // capture square half-width, px
    double front_radius = 30.0;   // pear radius ahead of the center, px
    double back_radius = 16.0;    // pear radius behind the center, px
    double lateral_radius = 22.0; // pear radius to either side, px
    double step_cap = 18.0;       // max center displacement per step, px
    int max_iterations = 80;
    int min_ribbon_pixels = 4;    // fewer true ribbon pixels terminates
    double forward_weight = 2.5;  // centroid weight for pixels ahead (>= 1)

    bool valid() const {
        return front_radius >= lateral_radius && lateral_radius >= back_radius &&
               back_radius > square_half_width && max_iterations >= 1 &&
               forward_weight >= 1.0 && step_cap > 0.0 && square_half_width >= 1;
    }
};

enum class LaneSide { Left, Right };

struct LanePixel {
    int x = 0;
    int y = 0;
    bool operator==(const LanePixel&) const = default;
};

struct LanePixelCluster {
    std::vector<LanePixel> points;
    LaneSide side = LaneSide::Left;
};

// Per-frame record of pixels already assigned to a lane; pixels claimed by an
// earlier track_lane call are invisible to later ones.
class ClaimMask {
public:
    ClaimMask(int width, int height)
        : width_(width), data_(static_cast<std::size_t>(width) * height, 0) {}

    bool claimed(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void claim(int x, int y) { data_[static_cast<std::size_t>(y) * width_ + x] = 1; }

private:
    int width_;
    std::vector<std::uint8_t> data_;
};

struct RibbonStep {
    std::optional<Vec2> next_center; // empty means Terminate
    std::vector<LanePixel> captured; // true pixels inside the capture square
};

// One tracker iteration at `center`: capture the square's true pixels, then
// move the center to the forward-weighted centroid of the true pixels in the
// pear ribbon (inside the oval, outside the square), clamped to step_cap.
// Terminates when fewer than min_ribbon_pixels true pixels lie in the ribbon.
// Pixels claimed in `mask` are treated as false.
inline RibbonStep ribbon_step(const BinaryImage& img, Vec2 center, const RibbonConfig& cfg,
                              const ClaimMask* mask = nullptr) {
    RibbonStep out;
    const double sq = cfg.square_half_width;

    const auto visible = [&](int x, int y) {
        return img.at(x, y) && (mask == nullptr || !mask->claimed(x, y));
    };

    // Capture square.
    {
        const int x0 = std::max(0, static_cast<int>(std::ceil(center.x - sq)));
        const int x1 = std::min(img.width - 1, static_cast<int>(std::floor(center.x + sq)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(center.y - sq)));
        const int y1 = std::min(img.height - 1, static_cast<int>(std::floor(center.y + sq)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (visible(x, y)) out.captured.push_back({x, y});
    }

    // Ribbon centroid.
    const double bound = std::max(cfg.front_radius, std::max(cfg.back_radius, cfg.lateral_radius));
    const int x0 = std::max(0, static_cast<int>(std::floor(center.x - cfg.lateral_radius)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(center.x + cfg.lateral_radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(center.y - bound)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(center.y + bound)));

    double wsum = 0.0, wx = 0.0, wy = 0.0;
    int ribbon_count = 0;
    for (int y = y0; y <= y1; ++y) {
        const double dy = y - center.y;
        const double ry = dy < 0.0 ? cfg.front_radius : cfg.back_radius;
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - center.x;
            if (std::max(std::abs(dx), std::abs(dy)) <= sq) continue; // inside the square
            const double ex = dx / cfg.lateral_radius;
            const double ey = dy / ry;
            if (ex * ex + ey * ey > 1.0) continue; // outside the pear oval
            if (!visible(x, y)) continue;
            const double w = dy < 0.0 ? cfg.forward_weight : 1.0;
            wsum += w;
            wx += w * x;
            wy += w * y;
            ++ribbon_count;
        }
    }

    if (ribbon_count < cfg.min_ribbon_pixels) return out; // Terminate

    Vec2 next{wx / wsum, wy / wsum};
    Vec2 disp = next - center;
    const double d = disp.norm();
    if (d > cfg.step_cap) next = center + disp * (cfg.step_cap / d);
    out.next_center = next;
    return out;
}

// Tracks one lane from its base column upward, accumulating captured pixels.
// Starts at (base, bottom row - square_half_width) and iterates ribbon_step
// until it terminates, leaves the image, revisits a previous center within
// 1 px, or hits max_iterations. Captured pixels are recorded in `mask`, so a
// second call sharing the mask never claims them again.
inline LanePixelCluster track_lane(const BinaryImage& img, int base, const RibbonConfig& cfg,
                                   ClaimMask& mask, LaneSide side) {
    LanePixelCluster cluster;
    cluster.side = side;

    Vec2 center{static_cast<double>(base),
                static_cast<double>(img.height - 1 - cfg.square_half_width)};
    std::vector<Vec2> visited;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (center.x < 0.0 || center.x > img.width - 1.0 || center.y < 0.0 ||
            center.y > img.height - 1.0)
            break;

        const RibbonStep step = ribbon_step(img, center, cfg, &mask);
        for (const auto& p : step.captured) {
            mask.claim(p.x, p.y);
            cluster.points.push_back(p);
        }
        if (!step.next_center) break;

        bool revisit = false;
        for (const auto& prev : visited)
            if ((*step.next_center - prev).norm() < 1.0) {
                revisit = true;
                break;
            }
        if (revisit) break;

        visited.push_back(center);
        center = *step.next_center;
    }
    return cluster;
}

inline LanePixelCluster track_lane(const BinaryImage& img, int base, const RibbonConfig& cfg,
                                   LaneSide side = LaneSide::Left) {
    ClaimMask mask(img.width, img.height);
    return track_lane(img, base, cfg, mask, side);
}

// Classical stacked-window baseline. Windows sit in fixed y strips of height
// ceil(H / n_windows) and recenter only along x: each window takes the x-mean
// of the true pixels in the previous window (unchanged when that window was
// empty). Because the strips never adapt in y, lanes that exit through the
// image side are lost.
inline LanePixelCluster sliding_window_track(const BinaryImage& img, int base, int window_width,
                                             int n_windows, LaneSide side = LaneSide::Left) {
    LanePixelCluster cluster;
    cluster.side = side;
    if (n_windows < 1) return cluster;

    const int strip = (img.height + n_windows - 1) / n_windows;
    const int half = window_width / 2;
    double cx = base;
    for (int w = 0; w < n_windows; ++w) {
        const int y1 = img.height - 1 - w * strip;
        const int y0 = std::max(0, y1 - strip + 1);
        if (y1 < 0) break;
        const int x0 = std::max(0, static_cast<int>(std::lround(cx)) - half);
        const int x1 = std::min(img.width - 1, static_cast<int>(std::lround(cx)) + half);

        long long sum_x = 0;
        int count = 0;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (img.at(x, y)) {
                    cluster.points.push_back({x, y});
                    sum_x += x;
                    ++count;
                }
        if (count > 0) cx = static_cast<double>(sum_x) / count;
    }
    return cluster;
}

} // namespace lanekeep
