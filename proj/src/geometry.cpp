#include "coachsim/geometry.hpp"

#include <limits>

namespace coachsim {

bool obb_overlap(const Obb& a, const Obb& b, Vec2* mtv) {
    const double ca = std::cos(a.heading), sa = std::sin(a.heading);
    const double cb = std::cos(b.heading), sb = std::sin(b.heading);
    const std::array<Vec2, 4> axes = {Vec2{ca, sa}, Vec2{-sa, ca}, Vec2{cb, sb}, Vec2{-sb, cb}};

    double best_overlap = std::numeric_limits<double>::max();
    Vec2 best_axis{1.0, 0.0};

    for (const Vec2& axis : axes) {
        double alo, ahi, blo, bhi;
        detail::project(a, axis, alo, ahi);
        detail::project(b, axis, blo, bhi);
        const double overlap = std::min(ahi, bhi) - std::max(alo, blo);
        if (overlap <= 0.0) return false;  // separating axis found
        if (overlap < best_overlap) {
            best_overlap = overlap;
            best_axis = axis;
        }
    }

    if (mtv != nullptr) {
        Vec2 dir = a.center - b.center;
        if (dir.norm_sq() < 1e-12) dir = {1.0, 0.0};
        // Push a away from b along the least-penetration axis.
        double sign = dir.dot(best_axis) >= 0.0 ? 1.0 : -1.0;
        *mtv = best_axis * (sign * best_overlap);
    }
    return true;
}

}  // namespace coachsim
