#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "fhtmap/rng.hpp"

#include "fhtmap/frontier.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/motion.hpp"
#include "fhtmap/raycast.hpp"
#include "fhtmap/search.hpp"

namespace fhtmap {

struct ExploreConfig {
    int n_beams = 360;
    double max_range = 7.0;
    double step = 0.25;           // motion step, meters
    int replan_every = 10;        // motion steps between frontier re-selection
    long budget = 200000;         // max motion steps before giving up
    double r_info = -1.0;         // -1: use max_range
    int min_frontier_cells = 3;
    double clearance = -1.0;      // edge-test clearance; -1: one cell
    std::uint64_t seed = 0;       // reserved for noise; exploration itself is greedy
    double noise_std = 0.0;
};

struct ExploreResult {
    std::vector<Pose2> trajectory;
    OccupancyGrid explored;
    bool budget_exhausted = false;
};

/// Invoked at every motion step with the new pose and the explored grid so
/// far. The map builder hangs off this.
using StepCallback = std::function<void(const Pose2&, const OccupancyGrid&)>;

/// Greedy frontier exploration: scan, pick the max-utility frontier, walk
/// an A* path toward it on the navigable (obstacle-eroded) explored grid,
/// replan every few steps. Deterministic for a fixed world and config.
inline ExploreResult explore(const World& world, const Pose2& start,
                             const ExploreConfig& cfg, const StepCallback& on_step) {
    const OccupancyGrid& truth = world.truth;
    if (!truth.point_free(start.position()))
        throw std::invalid_argument("explore: start pose inside obstacle");

    const double r_info = cfg.r_info > 0.0 ? cfg.r_info : cfg.max_range;
    const double clearance =
        cfg.clearance >= 0.0 ? cfg.clearance : truth.resolution;
    const int clear_cells = clearance <= 0.0
                                ? 0
                                : static_cast<int>(std::ceil(clearance / truth.resolution - 1e-9));
    const int nav_radius = clear_cells + 1;

    ExploreResult res;
    res.explored = OccupancyGrid::filled(truth.width, truth.height, truth.resolution,
                                         Cell::Unknown);
    res.explored.origin = truth.origin;

    Rng rng(cfg.seed);
    Rng* noise_rng = cfg.noise_std > 0.0 ? &rng : nullptr;
    long steps = 0;
    Pose2 pose = start;

    auto sense_and_step = [&](const Pose2& p) {
        const LaserScan scan =
            raycast_scan(world, p, cfg.n_beams, cfg.max_range, cfg.noise_std, noise_rng);
        integrate_scan_inplace(res.explored, p, scan);
        res.trajectory.push_back(p);
        if (on_step) on_step(p, res.explored);
        ++steps;
    };

    sense_and_step(pose);

    // Frontier targets that turned out unreachable on the navigable grid.
    std::set<std::pair<int, int>> blacklist;

    while (true) {
        if (steps >= cfg.budget) {
            res.budget_exhausted = true;
            break;
        }
        auto frontiers = detect_frontiers(res.explored, r_info, cfg.min_frontier_cells);
        if (frontiers.empty()) break;

        const GridMask nav = navigable_mask(res.explored, nav_radius);
        const GridMask walkable = free_mask(res.explored);
        const CellIndex pose_cell = res.explored.cell_of(pose.position());

        // Cost sweep once from the robot; utility = info / octile distance.
        std::vector<CellIndex> targets;
        targets.reserve(frontiers.size());
        for (const Frontier& f : frontiers) targets.push_back(f.target);
        const GridSweep cost_sweep =
            dijkstra_grid(walkable, truth.resolution, pose_cell, &targets);

        const Frontier* best = nullptr;
        double best_u = 0.0;
        for (const Frontier& f : frontiers) {
            if (blacklist.count({f.target.x, f.target.y})) continue;
            const double c = cost_sweep.at(f.target);
            if (c == std::numeric_limits<double>::infinity()) continue;
            const double u =
                static_cast<double>(f.info_gain) / std::max(c, truth.resolution);
            if (!best || u > best_u + 1e-12) {
                best = &f;
                best_u = u;
            } else if (std::abs(u - best_u) <= 1e-12) {
                // tie: lower centroid row, then column
                const CellIndex bc = res.explored.cell_of(best->centroid);
                const CellIndex fc = res.explored.cell_of(f.centroid);
                if (fc.y < bc.y || (fc.y == bc.y && fc.x < bc.x)) best = &f;
            }
        }
        if (!best) break;  // nothing reachable is left

        const auto nav_goal = nearest_passable(nav, best->target);
        // the pose itself may sit one cell off the navigable mask
        const auto nav_start =
            nearest_passable(nav, res.explored.cell_of(pose.position()), 4);
        if (!nav_goal || !nav_start) {
            blacklist.insert({best->target.x, best->target.y});
            continue;
        }
        auto path = astar_grid(nav, truth.resolution, *nav_start, *nav_goal);
        if (!path) {
            blacklist.insert({best->target.x, best->target.y});
            continue;
        }

        std::vector<Point2> pts = smooth_path(res.explored, path->cells, clearance);
        if (pts.size() < 2) {
            // already at the goal cell; the frontier didn't resolve, drop it
            blacklist.insert({best->target.x, best->target.y});
            continue;
        }
        // hop from the exact pose to its cell center first; both lie in the
        // same free cell, so the splice segment is safe
        pts.insert(pts.begin(), pose.position());
        const std::vector<Pose2> leg = move_along(world, pts, cfg.step);

        int walked = 0;
        for (std::size_t i = 1; i < leg.size(); ++i) {
            pose = leg[i];
            sense_and_step(pose);
            if (++walked >= cfg.replan_every || steps >= cfg.budget) break;
        }
    }
    return res;
}

}  // namespace fhtmap
