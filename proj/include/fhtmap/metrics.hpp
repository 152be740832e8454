#pragma once

#include <cmath>
#include <optional>

#include "fhtmap/geometry.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/motion.hpp"
#include "fhtmap/search.hpp"

namespace fhtmap {

struct RelocErrors {
    double eps_t = 0.0;          // translation error ratio (absolute if flagged)
    bool eps_t_absolute = false; // ground-truth translation was ~zero
    double eps_theta_deg = 0.0;
};

/// Relocalization error: translation error relative to the ground-truth
/// translation magnitude, and absolute wrapped angular error in degrees.
inline RelocErrors metric_reloc_errors(const Transform2& t_final,
                                       const Transform2& t_gt) {
    RelocErrors e;
    const double abs_err = (t_final.translation - t_gt.translation).norm();
    const double gt_norm = t_gt.translation.norm();
    if (gt_norm < 1e-6) {
        e.eps_t = abs_err;
        e.eps_t_absolute = true;
    } else {
        e.eps_t = abs_err / gt_norm;
    }
    e.eps_theta_deg = std::abs(rad_to_deg(wrap_angle(t_final.rotation - t_gt.rotation)));
    return e;
}

/// Success: absolute translation error < 1 m and angular error < 5 degrees.
inline bool metric_success(const Transform2& t_final, const Transform2& t_gt) {
    const double abs_err = (t_final.translation - t_gt.translation).norm();
    const double ang_deg =
        std::abs(rad_to_deg(wrap_angle(t_final.rotation - t_gt.rotation)));
    return abs_err < 1.0 && ang_deg < 5.0;
}

/// Path-planning capability: traveled topological length over the grid
/// baseline length.
inline double metric_c_path(double s_topo, double s_grid) {
    if (!(s_grid > 0.0)) throw std::invalid_argument("metric_c_path: s_grid must be > 0");
    return s_topo / s_grid;
}

/// Grid baseline: A* with octile metric over free cells, shortened by
/// greedy line of sight. Returns nothing when the goal is unreachable.
inline std::optional<double> grid_baseline_length(const OccupancyGrid& explored,
                                                  Point2 a, Point2 b,
                                                  double clearance = 0.0) {
    const GridMask mask = free_mask(explored);
    const auto path =
        astar_grid(mask, explored.resolution, explored.cell_of(a), explored.cell_of(b));
    if (!path) return std::nullopt;
    const std::vector<Point2> pts = smooth_path(explored, path->cells, clearance);
    double len = distance(a, explored.center_of(path->cells.front())) +
                 polyline_length(pts) +
                 distance(explored.center_of(path->cells.back()), b);
    return len;
}

}  // namespace fhtmap
