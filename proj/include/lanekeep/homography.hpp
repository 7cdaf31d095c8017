#pragma once

#include <array>
#include <cmath>

#include "lanekeep/errors.hpp"
#include "lanekeep/geometry.hpp"
#include "lanekeep/image.hpp"

namespace lanekeep {

// 3x3 projective transform, normalized so m[2][2] == 1.
struct Homography {
    std::array<std::array<double, 3>, 3> m = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    static Homography identity() { return {}; }

    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    Vec2 apply(const Vec2& p) const {
        const double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        return {(m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
                (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w};
    }

    Homography inverse() const {
        const double d = det();
        if (std::abs(d) <= 1e-12) throw SingularHomography("homography: |det| <= 1e-12");
        Homography inv;
        inv.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
        inv.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
        inv.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
        inv.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
        inv.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
        inv.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
        inv.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
        inv.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
        inv.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
        // Renormalize to keep the bottom-right entry at 1.
        const double s = inv.m[2][2];
        if (std::abs(s) > 1e-300)
            for (auto& row : inv.m)
                for (auto& v : row) v /= s;
        return inv;
    }
};

namespace detail {

inline bool three_collinear(const std::array<Vec2, 4>& q) {
    double extent = 1.0;
    for (const auto& p : q) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
    const double eps = 1e-9 * extent * extent;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            for (int c = b + 1; c < 4; ++c) {
                const Vec2 u = q[b] - q[a];
                const Vec2 v = q[c] - q[a];
                if (std::abs(u.cross(v)) <= eps) return true;
            }
    return false;
}

// Gaussian elimination with partial pivoting on an n x (n+1) augmented matrix.
template <int N>
inline std::array<double, N> solve_linear(std::array<std::array<double, N + 1>, N> a) {
    for (int col = 0; col < N; ++col) {
        int pivot = col;
        for (int r = col + 1; r < N; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-14)
            throw DegenerateQuad("homography: singular system");
        std::swap(a[col], a[pivot]);
        for (int r = 0; r < N; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c <= N; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::array<double, N> x{};
    for (int i = 0; i < N; ++i) x[i] = a[i][N] / a[i][i];
    return x;
}

} // namespace detail

// Homography mapping each src corner onto the matching dst corner, via the
// standard 8x8 linear system with h33 pinned to 1.
inline Homography homography_from_quads(const std::array<Vec2, 4>& src,
                                        const std::array<Vec2, 4>& dst) {
    if (detail::three_collinear(src)) throw DegenerateQuad("homography: collinear src corners");
    if (detail::three_collinear(dst)) throw DegenerateQuad("homography: collinear dst corners");

    std::array<std::array<double, 9>, 8> sys{};
    for (int i = 0; i < 4; ++i) {
        const Vec2& s = src[i];
        const Vec2& d = dst[i];
        sys[2 * i] = {s.x, s.y, 1, 0, 0, 0, -d.x * s.x, -d.x * s.y, d.x};
        sys[2 * i + 1] = {0, 0, 0, s.x, s.y, 1, -d.y * s.x, -d.y * s.y, d.y};
    }
    const auto h = detail::solve_linear<8>(sys);
    Homography out;
    out.m = {{{h[0], h[1], h[2]}, {h[3], h[4], h[5]}, {h[6], h[7], 1.0}}};
    return out;
}

// Inverse-mapped nearest-neighbor warp; samples landing outside the source
// image become false, as do pixels on the horizon line (projective w ~ 0).
// The consumer is a binary image, so no interpolation.
inline BinaryImage warp_perspective(const BinaryImage& img, const Homography& h) {
    const Homography inv = h.inverse(); // throws SingularHomography
    BinaryImage out(img.width, img.height);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const auto& m = inv.m;
            const double w = m[2][0] * x + m[2][1] * y + m[2][2];
            if (std::abs(w) < 1e-12) continue;
            const double sxf = (m[0][0] * x + m[0][1] * y + m[0][2]) / w;
            const double syf = (m[1][0] * x + m[1][1] * y + m[1][2]) / w;
            if (std::abs(sxf) > 1e9 || std::abs(syf) > 1e9) continue;
            const int sx = static_cast<int>(std::lround(sxf));
            const int sy = static_cast<int>(std::lround(syf));
            if (img.in_bounds(sx, sy) && img.at(sx, sy)) out.set(x, y, true);
        }
    }
    return out;
}

} // namespace lanekeep
