#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fhtmap/geometry.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/rng.hpp"

namespace fhtmap {

/// Sentinel for beams that reached max_range without hitting anything.
inline constexpr float kNoReturn = -1.0f;

/// 360-degree range scan. angles are robot-frame, uniformly spaced,
/// angles[i] = 2*pi*i/n starting at the robot's forward direction.
struct LaserScan {
    std::vector<double> angles;
    std::vector<float> ranges;
    double max_range = 0.0;

    std::size_t size() const { return ranges.size(); }
    bool has_return(std::size_t i) const { return ranges[i] > 0.0f; }

    friend bool operator==(const LaserScan&, const LaserScan&) = default;
};

inline std::vector<double> uniform_beam_angles(int n_beams) {
    std::vector<double> a(static_cast<std::size_t>(n_beams));
    for (int i = 0; i < n_beams; ++i)
        a[static_cast<std::size_t>(i)] = kTwoPi * i / n_beams;
    return a;
}

/// Amanatides & Woo grid traversal. Visits every cell the ray passes
/// through, in order, with the distance at which the ray enters it.
/// The visitor returns false to stop. Traversal ends past max_t or when
/// the ray leaves the grid.
template <typename Visitor>
void traverse_ray(const OccupancyGrid& g, Point2 origin, double angle, double max_t,
                  Visitor&& visit) {
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    const double gx = (origin.x - g.origin.x) / g.resolution;
    const double gy = (origin.y - g.origin.y) / g.resolution;
    int cx = static_cast<int>(std::floor(gx));
    int cy = static_cast<int>(std::floor(gy));

    const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
    const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    // distance along the ray to the next x/y cell boundary
    double t_max_x = inf, t_delta_x = inf;
    double t_max_y = inf, t_delta_y = inf;
    if (step_x != 0) {
        const double next_bx = step_x > 0 ? std::floor(gx) + 1.0 : std::floor(gx);
        t_max_x = (next_bx - gx) * g.resolution / dx;
        t_delta_x = g.resolution / std::abs(dx);
    }
    if (step_y != 0) {
        const double next_by = step_y > 0 ? std::floor(gy) + 1.0 : std::floor(gy);
        t_max_y = (next_by - gy) * g.resolution / dy;
        t_delta_y = g.resolution / std::abs(dy);
    }

    double t_enter = 0.0;
    while (t_enter < max_t && g.in_bounds(cx, cy)) {
        if (!visit(CellIndex{cx, cy}, t_enter)) return;
        if (t_max_x < t_max_y) {
            t_enter = t_max_x;
            t_max_x += t_delta_x;
            cx += step_x;
        } else {
            t_enter = t_max_y;
            t_max_y += t_delta_y;
            cy += step_y;
        }
    }
}

/// Distance to the first Occupied cell boundary along `angle`, or kNoReturn
/// if nothing is hit within max_range. `hit_cell` receives the obstacle cell.
inline float cast_single_ray(const OccupancyGrid& g, Point2 origin, double angle,
                             double max_range, CellIndex* hit_cell = nullptr) {
    float range = kNoReturn;
    traverse_ray(g, origin, angle, max_range, [&](CellIndex c, double t_enter) {
        if (g.at(c) == Cell::Occupied) {
            range = static_cast<float>(t_enter);
            if (hit_cell) *hit_cell = c;
            return false;
        }
        return true;
    });
    return range;
}

/// Simulated LiDAR against the ground-truth world. Beam i leaves at
/// pose.theta + 2*pi*i/n_beams. Deterministic unless noise_std > 0.
inline LaserScan raycast_scan(const World& world, const Pose2& pose, int n_beams,
                              double max_range, double noise_std = 0.0,
                              Rng* rng = nullptr) {
    if (n_beams < 4) throw std::invalid_argument("raycast_scan: n_beams must be >= 4");
    if (!(max_range > 0.0)) throw std::invalid_argument("raycast_scan: max_range must be > 0");
    if (!world.truth.point_free(pose.position()))
        throw std::invalid_argument("raycast_scan: pose inside obstacle");

    LaserScan scan;
    scan.max_range = max_range;
    scan.angles = uniform_beam_angles(n_beams);
    scan.ranges.resize(static_cast<std::size_t>(n_beams));
    for (int i = 0; i < n_beams; ++i) {
        const double a = pose.theta + scan.angles[static_cast<std::size_t>(i)];
        float r = cast_single_ray(world.truth, pose.position(), a, max_range);
        if (r > 0.0f && noise_std > 0.0 && rng) {
            // Box-Muller; clamped so noisy returns stay in (0, max_range]
            const double u1 = std::max(rng->uniform(), 1e-12);
            const double u2 = rng->uniform();
            const double n = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
            r = static_cast<float>(std::clamp(r + noise_std * n, 1e-3, max_range));
        }
        scan.ranges[static_cast<std::size_t>(i)] = r;
    }
    return scan;
}

/// Round ranges to millimeters, the usual sensor reporting granularity.
/// Node-payload scans are stored quantized; this also keeps their binary32
/// decimal forms short.
inline void quantize_ranges_mm(LaserScan& scan) {
    for (float& r : scan.ranges) {
        if (r <= 0.0f) continue;
        r = static_cast<float>(std::round(static_cast<double>(r) * 1000.0) / 1000.0);
        if (r <= 0.0f) r = 0.001f;
    }
}

namespace detail {
// Half-width of the window around the float-rounded range in which the
// obstacle cell's entry distance must fall (float ulp at 8 m is ~4.8e-7).
inline constexpr double kHitEps = 1e-6;
}  // namespace detail

/// Fold one scan into the explored grid: traversed cells become Free, the
/// hit cell becomes Occupied, no-return beams free everything up to
/// max_range. Occupied cells are never downgraded. Idempotent.
inline void integrate_scan_inplace(OccupancyGrid& explored, const Pose2& pose,
                                   const LaserScan& scan) {
    for (std::size_t i = 0; i < scan.size(); ++i) {
        const double a = pose.theta + scan.angles[i];
        if (!scan.has_return(i)) {
            traverse_ray(explored, pose.position(), a, scan.max_range,
                         [&](CellIndex c, double) {
                             if (explored.at(c) != Cell::Occupied)
                                 explored.set(c, Cell::Free);
                             return true;
                         });
            continue;
        }
        // The obstacle cell is the first one entered inside the +-kHitEps
        // window around the recorded range; cells strictly before it are
        // traversed free space. A true obstacle cell can never have been
        // freed, so known-free cells (corner slivers at the window edge)
        // are left alone and the free set only ever grows.
        const double r = static_cast<double>(scan.ranges[i]);
        const double lo = r - detail::kHitEps;
        traverse_ray(explored, pose.position(), a, r + detail::kHitEps,
                     [&](CellIndex c, double t_enter) {
                         if (t_enter > lo) {
                             if (explored.at(c) != Cell::Free)
                                 explored.set(c, Cell::Occupied);
                             return false;
                         }
                         if (explored.at(c) != Cell::Occupied)
                             explored.set(c, Cell::Free);
                         return true;
                     });
    }
}

inline OccupancyGrid integrate_scan(const OccupancyGrid& explored, const Pose2& pose,
                                    const LaserScan& scan) {
    OccupancyGrid out = explored;
    integrate_scan_inplace(out, pose, scan);
    return out;
}

/// True iff every cell within `clearance` meters of segment ab is Free.
/// Cell-accurate: the cells the segment passes through, dilated by
/// ceil(clearance/resolution) in Chebyshev distance. Unknown and
/// out-of-bounds both count as not-free. Symmetric in (a, b).
inline bool segment_in_free(const OccupancyGrid& g, Point2 a, Point2 b,
                            double clearance) {
    // canonical order makes the traversal exactly symmetric
    if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
    const int r = clearance <= 0.0
                      ? 0
                      : static_cast<int>(std::ceil(clearance / g.resolution - 1e-9));
    auto block_free = [&](CellIndex c) {
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                const int x = c.x + dx, y = c.y + dy;
                if (!g.in_bounds(x, y) || g.at(x, y) != Cell::Free) return false;
            }
        return true;
    };

    const double len = distance(a, b);
    if (len == 0.0) return block_free(g.cell_of(a));
    const double angle = std::atan2(b.y - a.y, b.x - a.x);
    bool ok = true;
    bool reached_end = false;
    const CellIndex end_cell = g.cell_of(b);
    traverse_ray(g, a, angle, len, [&](CellIndex c, double) {
        if (!block_free(c)) {
            ok = false;
            return false;
        }
        if (c == end_cell) reached_end = true;
        return true;
    });
    if (!ok) return false;
    // the end cell is entered exactly at t == len, which traverse_ray excludes
    if (!reached_end && g.in_bounds(end_cell) && !block_free(end_cell)) return false;
    return true;
}

}  // namespace fhtmap
