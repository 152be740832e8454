#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhtmap/geometry.hpp"
#include "fhtmap/graph.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/raycast.hpp"
#include "fhtmap/relocalize.hpp"
#include "fhtmap/search.hpp"

namespace fhtmap {

/// Shortest path between two nodes with Euclidean edge weights. Distance is
/// infinite (and the path empty) for disconnected pairs.
inline std::pair<double, std::vector<int>> shortest_topo(const FhtMap& map, int a, int b) {
    map.node(a);
    map.node(b);
    if (a == b) return {0.0, {a}};
    const GraphSweep sweep = graph_dijkstra(map, a);
    const double d = sweep.dist[static_cast<std::size_t>(b)];
    std::vector<int> path;
    if (d == std::numeric_limits<double>::infinity()) return {d, path};
    for (int cur = b; cur != -1; cur = sweep.parent[static_cast<std::size_t>(cur)])
        path.push_back(cur);
    std::reverse(path.begin(), path.end());
    return {d, path};
}

/// Access cost of a free point to a node: plain Euclidean distance inside
/// the node's free rectangle, k times it outside (k >> 1).
inline double eq11_access_cost(Point2 n, const MapNode& node, double k) {
    if (!(k > 1.0)) throw std::invalid_argument("eq11_access_cost: k must be > 1");
    const double d = distance(n, node.position);
    return node.free_rect.contains(n) ? d : k * d;
}

struct TerminalSelection {
    int start_node = -1;
    int end_node = -1;
    double total_cost = std::numeric_limits<double>::infinity();
};

/// Exact minimization of access(n_s, v_s) + d_topo(v_s, v_d) + access(n_d, v_d)
/// over all node pairs; ties resolve to the lexicographically smallest pair.
inline TerminalSelection select_terminals(const FhtMap& map, Point2 n_s, Point2 n_d,
                                          double k) {
    if (map.empty()) throw std::invalid_argument("select_terminals: empty map");
    TerminalSelection best;
    for (int vs = 0; vs < map.size(); ++vs) {
        const double f_s = eq11_access_cost(n_s, map.node(vs), k);
        if (f_s >= best.total_cost) continue;
        const GraphSweep sweep = graph_dijkstra(map, vs);
        for (int vd = 0; vd < map.size(); ++vd) {
            const double d = sweep.dist[static_cast<std::size_t>(vd)];
            if (d == std::numeric_limits<double>::infinity()) continue;
            const double cost = f_s + d + eq11_access_cost(n_d, map.node(vd), k);
            if (cost < best.total_cost - 1e-12) {
                best = {vs, vd, cost};
            }
        }
    }
    if (best.start_node < 0)
        throw std::runtime_error("select_terminals: no connected node pair");
    return best;
}

struct PlanResult {
    int start_node = -1;
    int end_node = -1;
    std::vector<Point2> waypoints;  // n_s, node positions v_s..v_d, n_d
    std::vector<int> node_path;
    double topo_length = 0.0;       // graph distance v_s -> v_d
    double total_cost = 0.0;        // objective value
};

/// Assemble a topological plan: bring the odom-frame start into the map
/// frame, pick terminals, run the graph shortest path.
inline PlanResult plan(const FhtMap& map, const Transform2& t_map_odom, Point2 n_s_odom,
                       Point2 n_d_map, double k) {
    if (map.empty()) throw std::invalid_argument("plan: empty map");
    const Point2 n_s = t_map_odom.apply(n_s_odom);
    const TerminalSelection sel = select_terminals(map, n_s, n_d_map, k);
    auto [dist, node_path] = shortest_topo(map, sel.start_node, sel.end_node);

    PlanResult out;
    out.start_node = sel.start_node;
    out.end_node = sel.end_node;
    out.topo_length = dist;
    out.total_cost = sel.total_cost;
    out.node_path = node_path;
    out.waypoints.push_back(n_s);
    for (int id : node_path) out.waypoints.push_back(map.node(id).position);
    out.waypoints.push_back(n_d_map);
    return out;
}

struct ExecResult {
    double traveled = 0.0;
    bool reached = false;
};

/// Drive the waypoint list with node skipping: before each leg, retarget to
/// the farthest later waypoint reachable by a free segment. Legs with no
/// visibility fall back to a grid path on the explored map.
inline ExecResult execute_with_skip(const World& world, const PlanResult& plan_result,
                                    const OccupancyGrid& explored, double clearance) {
    // motion validated against the explored grid; its free cells are a
    // subset of the world's, so explored-checked segments are safe to drive
    (void)world;
    const std::vector<Point2>& wp = plan_result.waypoints;
    if (wp.size() < 2) return {0.0, true};
    ExecResult res;
    Point2 pos = wp.front();
    std::size_t idx = 0;

    const int clear_cells =
        clearance <= 0.0
            ? 0
            : static_cast<int>(std::ceil(clearance / explored.resolution - 1e-9));

    while (idx + 1 < wp.size()) {
        std::size_t target = idx;
        for (std::size_t j = wp.size() - 1; j > idx; --j) {
            if (segment_in_free(explored, pos, wp[j], clearance)) {
                target = j;
                break;
            }
        }
        if (target == idx) {
            // no skip available; try the direct leg at zero clearance (a
            // point robot), else follow the grid
            const std::size_t next = idx + 1;
            if (segment_in_free(explored, pos, wp[next], 0.0)) {
                res.traveled += distance(pos, wp[next]);
            } else {
                const GridMask nav = navigable_mask(explored, clear_cells + 1);
                const auto a = nearest_passable(nav, explored.cell_of(pos));
                const auto b = nearest_passable(nav, explored.cell_of(wp[next]));
                std::optional<GridPath> path;
                if (a && b) path = astar_grid(nav, explored.resolution, *a, *b);
                if (!path)
                    throw std::runtime_error(
                        "execute_with_skip: motion blocked at waypoint " +
                        std::to_string(next));
                const std::vector<Point2> pts =
                    smooth_path(explored, path->cells, clear_cells * explored.resolution);
                res.traveled += distance(pos, pts.front()) + polyline_length(pts) +
                                distance(pts.back(), wp[next]);
            }
            pos = wp[next];
            idx = next;
        } else {
            res.traveled += distance(pos, wp[target]);
            pos = wp[target];
            idx = target;
        }
    }
    res.reached = true;
    return res;
}

struct UtilizeConfig {
    RelocConfig reloc{};
    double k = 1000.0;
    double goal_tolerance = 0.3;    // meters in the true frame
    double exec_step = 0.25;
    double clearance = 0.05;
    double replan_min_shift = 0.0;  // replan whenever the estimate moves
};

struct UtilizeResult {
    RelocResult reloc;
    PlanResult plan;
    double traveled = 0.0;
    bool reached = false;
    int replans = 0;
};

/// Full map utilization: relocalize along the walk (unless a transform is
/// supplied), plan to the map-frame destination, execute with skipping, and
/// replan whenever passing a main node yields a fresh estimation.
inline UtilizeResult utilize(const FhtMap& map, const World& world,
                             const Transform2& odom_offset, std::span<const Pose2> walk,
                             Point2 n_d_map, const UtilizeConfig& cfg,
                             std::optional<Transform2> pre_converged = std::nullopt) {
    UtilizeResult out;
    const Transform2 odom_from_map = inverse(odom_offset);
    Pose2 true_pose = walk.empty() ? Pose2{} : walk.front();

    std::vector<Estimation> ests;
    if (pre_converged) {
        out.reloc.t_final = *pre_converged;
        out.reloc.converged = true;
        out.reloc.n_used = 0;
    } else {
        RelocConfig rc = cfg.reloc;
        rc.stop_at_convergence = true;
        RelocTrace trace;
        out.reloc = relocalize(map, world, odom_offset, walk, rc, &trace);
        if (!out.reloc.converged) return out;
        true_pose = walk[trace.stop_index];
        // seed the execution-time estimation set from the converged spot
    }

    Transform2 t = out.reloc.t_final;
    // the converged transform is itself a consensus; keep that weight so a
    // single bad mid-route estimation cannot hijack the belief
    for (int i = 0; i < cfg.reloc.min_estimations; ++i) {
        Estimation prior;
        prior.node_id = -1;
        prior.t_est = t;
        prior.score = 1.0;
        ests.push_back(std::move(prior));
    }
    const Pose2 odom_pose = apply(odom_from_map, true_pose);
    out.plan = plan(map, t, odom_pose.position(), n_d_map, cfg.k);

    const double budget = 3.0 * (out.plan.total_cost + 20.0);
    std::unordered_map<int, double> node_last_trail;
    std::unordered_map<int, int> node_est_count;
    double since_estimate = 0.0;
    std::size_t idx = 0;
    std::vector<Point2> wp = out.plan.waypoints;

    while (out.traveled < budget) {
        if (distance(true_pose.position(), n_d_map) <= cfg.goal_tolerance) {
            out.reached = true;
            break;
        }
        // retarget: farthest later waypoint visible from the believed pose
        const Point2 belief = (t * odom_from_map).apply(true_pose.position());
        std::size_t target = idx + 1 >= wp.size() ? wp.size() - 1 : idx + 1;
        for (std::size_t j = wp.size() - 1; j > idx; --j) {
            if (segment_in_free(world.truth, belief, wp[j], cfg.clearance)) {
                target = j;
                break;
            }
        }
        // believed map-frame waypoint -> true frame
        const Point2 goal_true = (odom_offset * inverse(t)).apply(wp[target]);
        const Point2 delta = goal_true - true_pose.position();
        const double dist_left = delta.norm();
        const double step = std::min(cfg.exec_step, dist_left);
        if (dist_left < 1e-9) {
            idx = target;
            if (target + 1 >= wp.size()) {
                out.reached =
                    distance(true_pose.position(), n_d_map) <= cfg.goal_tolerance;
                break;
            }
            continue;
        }
        const Point2 next = true_pose.position() + (step / dist_left) * delta;
        if (!world.truth.point_free(next)) {
            // belief error drove us into a wall; stop here
            break;
        }
        out.traveled += distance(true_pose.position(), next);
        since_estimate += distance(true_pose.position(), next);
        true_pose = {next.x, next.y, std::atan2(delta.y, delta.x)};
        if (step >= dist_left - 1e-9) idx = target;

        // opportunistic estimation while passing main nodes
        const Descriptor query = sense_descriptor(world, true_pose.position(),
                                                  cfg.reloc.max_range,
                                                  map.meta.descriptor_dim);
        const auto match = match_descriptor(map, query, cfg.reloc.th_match);
        if (!match) continue;
        const auto [node_id, score] = *match;
        const auto seen = node_last_trail.find(node_id);
        if (seen != node_last_trail.end() &&
            out.traveled - seen->second < cfg.reloc.est_min_travel)
            continue;
        if (node_est_count[node_id] >= cfg.reloc.max_est_per_node) continue;

        Transform2 t_node_robot = Transform2::identity();
        double rms = 0.0;
        if (!cfg.reloc.feature_only) {
            const LaserScan current = raycast_scan(world, true_pose, cfg.reloc.n_beams,
                                                   cfg.reloc.max_range);
            try {
                const IcpResult icp = global_icp(*map.node(node_id).scan, current,
                                                 cfg.reloc.n_seeds, cfg.reloc.icp);
                t_node_robot = icp.transform;
                rms = icp.rms;
            } catch (const std::runtime_error&) {
                continue;
            }
        }
        node_last_trail[node_id] = out.traveled;
        ++node_est_count[node_id];
        Estimation e = make_estimation(map, node_id, t_node_robot,
                                       apply(odom_from_map, true_pose));
        e.score = score;
        e.icp_rms = rms;
        ests.push_back(std::move(e));

        const std::vector<Estimation> kept = reject_outliers(ests);
        const Transform2 t_new = optimize_transform(kept, cfg.reloc.optimize);
        const double shift =
            (t_new.translation - t.translation).norm() +
            std::abs(wrap_angle(t_new.rotation - t.rotation));
        t = t_new;
        if (shift > cfg.replan_min_shift) {
            const Pose2 odom_now = apply(odom_from_map, true_pose);
            out.plan = plan(map, t, odom_now.position(), n_d_map, cfg.k);
            wp = out.plan.waypoints;
            idx = 0;
            ++out.replans;
        }
    }
    out.reloc.t_final = t;
    return out;
}

}  // namespace fhtmap
