#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "lanekeep/errors.hpp"
#include "lanekeep/image.hpp"

namespace lanekeep {

// Per-column statistic over a binary image; length equals the image width.
// Raw histograms hold integer counts, convolved ones hold real weights.
struct Histogram {
    std::vector<double> bins;

    std::size_t size() const { return bins.size(); }
};

// Counts true pixels per column over the bottom ceil(row_fraction * height)
// rows. row_fraction in (0, 1].
inline Histogram column_histogram(const BinaryImage& img, double row_fraction) {
    Histogram h;
    h.bins.assign(img.width, 0.0);
    const int rows = static_cast<int>(std::ceil(row_fraction * img.height));
    const int y0 = img.height - rows;
    for (int y = y0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(x, y)) h.bins[x] += 1.0;
    return h;
}

// Same-length convolution with zero padding at the boundaries:
// out[i] = sum_j h[i + j - k] * kernel[j], k = (len - 1) / 2.
inline Histogram convolve_histogram(const Histogram& h, const std::vector<double>& kernel) {
    if (kernel.empty() || kernel.size() % 2 == 0)
        throw EvenKernel("convolve_histogram: kernel length must be odd and >= 1");
    const int n = static_cast<int>(h.bins.size());
    const int klen = static_cast<int>(kernel.size());
    const int half = (klen - 1) / 2;
    Histogram out;
    out.bins.assign(h.bins.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < klen; ++j) {
            const int src = i + j - half;
            if (src >= 0 && src < n) acc += h.bins[src] * kernel[j];
        }
        out.bins[i] = acc;
    }
    return out;
}

inline std::vector<double> box_kernel(int width) {
    return std::vector<double>(static_cast<std::size_t>(width), 1.0);
}

enum class SplitStrategy {
    AtGlobalPeak, // split at the histogram's global maximum
    AtMidpoint,   // split at width / 2
};

struct BasePoints {
    std::optional<int> left;
    std::optional<int> right;
};

namespace detail {

// Argmax over [lo, hi); lowest index wins ties; empty or all-zero regions
// yield no base point.
inline std::optional<int> region_peak(const std::vector<double>& bins, int lo, int hi) {
    std::optional<int> best;
    double best_v = 0.0;
    for (int i = lo; i < hi; ++i) {
        if (bins[i] > best_v) {
            best_v = bins[i];
            best = i;
        }
    }
    return best;
}

} // namespace detail

// Splits the (typically convolved) histogram into left and right lane regions
// and returns the peak of each. With AtGlobalPeak the split index is the
// global argmax and belongs to neither region; with AtMidpoint the split is
// width/2 and belongs to the right region.
inline BasePoints find_base_points(const Histogram& h, SplitStrategy split) {
    const int n = static_cast<int>(h.bins.size());
    BasePoints out;
    if (n == 0) return out;
    if (split == SplitStrategy::AtGlobalPeak) {
        int s = 0;
        for (int i = 1; i < n; ++i)
            if (h.bins[i] > h.bins[s]) s = i;
        out.left = detail::region_peak(h.bins, 0, s);
        out.right = detail::region_peak(h.bins, s + 1, n);
    } else {
        const int s = n / 2;
        out.left = detail::region_peak(h.bins, 0, s);
        out.right = detail::region_peak(h.bins, s, n);
    }
    return out;
}

} // namespace lanekeep
