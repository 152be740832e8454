#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhtmap/geometry.hpp"
#include "fhtmap/grid.hpp"

namespace fhtmap {

/// Sample poses along a polyline, spaced at most `step` apart, heading
/// tangent to the motion. The final pose lands exactly on the path end.
inline std::vector<Pose2> move_along(const World& world, std::span<const Point2> path,
                                     double step) {
    if (path.empty()) throw std::invalid_argument("move_along: empty path");
    if (!(step > 0.0)) throw std::invalid_argument("move_along: step must be > 0");

    auto check_free = [&](Point2 p, std::size_t seg) {
        if (!world.truth.point_free(p))
            throw std::runtime_error("move_along: path leaves free space at segment " +
                                     std::to_string(seg));
    };

    std::vector<Pose2> poses;
    check_free(path[0], 0);
    if (path.size() == 1) {
        poses.push_back({path[0].x, path[0].y, 0.0});
        return poses;
    }

    double heading0 = std::atan2(path[1].y - path[0].y, path[1].x - path[0].x);
    poses.push_back({path[0].x, path[0].y, wrap_angle(heading0)});
    for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const Point2 a = path[s];
        const Point2 b = path[s + 1];
        const double len = distance(a, b);
        if (len == 0.0) continue;
        const double heading = wrap_angle(std::atan2(b.y - a.y, b.x - a.x));
        const int n_sub = std::max(1, static_cast<int>(std::ceil(len / step - 1e-12)));
        for (int k = 1; k <= n_sub; ++k) {
            const double t = static_cast<double>(k) / n_sub;
            const Point2 p = a + t * (b - a);
            check_free(p, s);
            poses.push_back({p.x, p.y, heading});
        }
    }
    return poses;
}

inline double polyline_length(std::span<const Point2> pts) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) len += distance(pts[i], pts[i + 1]);
    return len;
}

inline double trajectory_length(std::span<const Pose2> poses) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < poses.size(); ++i)
        len += distance(poses[i].position(), poses[i + 1].position());
    return len;
}

}  // namespace fhtmap
