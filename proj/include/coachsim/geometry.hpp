#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace coachsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double norm_sq() const { return x * x + y * y; }

    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{1.0, 0.0};
    }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Oriented rectangle: center, heading of the long axis, full extents.
struct Obb {
    Vec2 center;
    double heading = 0.0;  // rad
    double length = 1.0;   // along heading
    double width = 1.0;

    std::array<Vec2, 4> corners() const {
        const double c = std::cos(heading), s = std::sin(heading);
        const Vec2 ax{c, s}, ay{-s, c};
        const Vec2 hl = ax * (length * 0.5), hw = ay * (width * 0.5);
        return {center + hl + hw, center + hl - hw, center - hl - hw, center - hl + hw};
    }

    /// Half-size of the axis-aligned bounding box, for broad-phase pruning.
    Vec2 aabb_half() const {
        const double c = std::fabs(std::cos(heading)), s = std::fabs(std::sin(heading));
        return {0.5 * (length * c + width * s), 0.5 * (length * s + width * c)};
    }
};

namespace detail {

inline void project(const Obb& b, const Vec2& axis, double& lo, double& hi) {
    auto cs = b.corners();
    lo = hi = cs[0].dot(axis);
    for (int i = 1; i < 4; ++i) {
        double p = cs[i].dot(axis);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
}

}  // namespace detail

/// Separating-axis overlap test for two oriented rectangles.
/// If they overlap and mtv is non-null, writes the minimum translation
/// vector that moves `a` out of `b` (degenerate same-pose case falls back
/// to the x axis).
bool obb_overlap(const Obb& a, const Obb& b, Vec2* mtv = nullptr);

}  // namespace coachsim
