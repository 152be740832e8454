#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fhtmap/descriptor.hpp"
#include "fhtmap/geometry.hpp"
#include "fhtmap/graph.hpp"
#include "fhtmap/icp.hpp"
#include "fhtmap/motion.hpp"
#include "fhtmap/raycast.hpp"
#include "fhtmap/rng.hpp"
#include "fhtmap/search.hpp"

namespace fhtmap {

/// Best-matching main node by descriptor inner product; nothing when the
/// score stays below th_match or the map has no main nodes.
inline std::optional<std::pair<int, double>> match_descriptor(const FhtMap& map,
                                                              const Descriptor& query,
                                                              double th_match) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const MapNode& n : map.nodes()) {
        if (!n.is_main()) continue;
        const double s = dot(*n.descriptor, query);
        if (s > best_score) {
            best_score = s;
            best = n.id;
        }
    }
    if (best < 0 || best_score < th_match) return std::nullopt;
    return std::make_pair(best, best_score);
}

/// One map<-odom hypothesis from a matched main node.
struct Estimation {
    int node_id = -1;
    Transform2 t_node_robot{};  // current robot frame -> node frame
    Transform2 t_est{};         // implied map <- odom transform
    double score = 0.0;         // descriptor match score
    double icp_rms = 0.0;
};

/// T_est = T_map_node * T_node_robot * inverse(T_odom_robot). Node frames
/// are translation-only: stored scans are captured in map orientation.
inline Estimation make_estimation(const FhtMap& map, int node_id,
                                  const Transform2& t_node_robot,
                                  const Pose2& odom_pose) {
    const MapNode& n = map.node(node_id);
    if (!n.is_main())
        throw std::invalid_argument("make_estimation: node is not a main node");
    Estimation e;
    e.node_id = node_id;
    e.t_node_robot = t_node_robot;
    const Transform2 t_map_node{{n.position.x, n.position.y}, 0.0};
    e.t_est = t_map_node * t_node_robot * inverse(pose_to_transform(odom_pose));
    return e;
}

/// Median/MAD gate on the estimation set: drop hypotheses whose translation
/// or wrapped angle deviates far from the component medians. Never empties
/// the set; order is preserved.
inline std::vector<Estimation> reject_outliers(const std::vector<Estimation>& ests) {
    if (ests.empty()) throw std::invalid_argument("reject_outliers: empty input");
    if (ests.size() == 1) return ests;

    std::vector<double> xs, ys, thetas;
    for (const Estimation& e : ests) {
        xs.push_back(e.t_est.translation.x);
        ys.push_back(e.t_est.translation.y);
        thetas.push_back(e.t_est.rotation);
    }
    const double mx = median(xs);
    const double my = median(ys);
    const double mth = circular_median(thetas);

    std::vector<double> tdev, adev;
    for (const Estimation& e : ests) {
        tdev.push_back(std::hypot(e.t_est.translation.x - mx, e.t_est.translation.y - my));
        adev.push_back(std::abs(wrap_angle(e.t_est.rotation - mth)));
    }
    const double mad_t = median(tdev);
    const double mad_a = median(adev);
    const double t_gate = 3.0 * mad_t + 0.2;
    const double a_gate = 3.0 * mad_a + deg_to_rad(2.0);

    std::vector<Estimation> kept;
    for (std::size_t i = 0; i < ests.size(); ++i)
        if (tdev[i] <= t_gate && adev[i] <= a_gate) kept.push_back(ests[i]);

    if (kept.empty()) {
        // keep the median-nearest hypothesis
        std::size_t best = 0;
        for (std::size_t i = 1; i < ests.size(); ++i)
            if (tdev[i] + adev[i] < tdev[best] + adev[best]) best = i;
        kept.push_back(ests[best]);
    }
    return kept;
}

struct OptimizeConfig {
    double huber_translation = 0.5;  // meters
    double huber_rotation = 0.5;     // radians
    int max_iterations = 50;
    double tolerance = 1e-6;         // weight change convergence
    bool pure_l2 = false;            // ablation switch
};

/// Robust SE(2) averaging of the estimation set: per-component Huber loss
/// minimized by iteratively reweighted least squares. Translation is the
/// weighted mean, rotation the weighted circular mean.
inline Transform2 optimize_transform(const std::vector<Estimation>& ests,
                                     const OptimizeConfig& cfg = {}) {
    if (ests.empty()) throw std::invalid_argument("optimize_transform: empty input");
    if (ests.size() == 1) return ests[0].t_est;

    const std::size_t n = ests.size();
    std::vector<double> wx(n, 1.0), wy(n, 1.0), wt(n, 1.0);
    auto weighted = [&]() {
        double sx = 0.0, sy = 0.0, nx = 0.0, ny = 0.0, ss = 0.0, sc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sx += wx[i] * ests[i].t_est.translation.x;
            nx += wx[i];
            sy += wy[i] * ests[i].t_est.translation.y;
            ny += wy[i];
            ss += wt[i] * std::sin(ests[i].t_est.rotation);
            sc += wt[i] * std::cos(ests[i].t_est.rotation);
        }
        return make_transform(sx / nx, sy / ny, std::atan2(ss, sc));
    };

    Transform2 t = weighted();
    if (cfg.pure_l2) return t;

    // the wrapped rotation objective is not convex; starting the descent at
    // the circular median keeps it in the dominant basin
    {
        std::vector<double> thetas;
        thetas.reserve(n);
        for (const Estimation& e : ests) thetas.push_back(e.t_est.rotation);
        t.rotation = circular_median(thetas);
    }

    auto huber_w = [](double r, double delta) {
        const double a = std::abs(r);
        return a <= delta ? 1.0 : delta / a;
    };
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double nwx = huber_w(ests[i].t_est.translation.x - t.translation.x,
                                       cfg.huber_translation);
            const double nwy = huber_w(ests[i].t_est.translation.y - t.translation.y,
                                       cfg.huber_translation);
            const double nwt = huber_w(wrap_angle(ests[i].t_est.rotation - t.rotation),
                                       cfg.huber_rotation);
            max_change = std::max({max_change, std::abs(nwx - wx[i]),
                                   std::abs(nwy - wy[i]), std::abs(nwt - wt[i])});
            wx[i] = nwx;
            wy[i] = nwy;
            wt[i] = nwt;
        }
        // translation: weighted means; rotation: weighted mean of wrapped
        // residuals around the current estimate (circular mean on the local
        // chart), which is the actual minimizer of the wrapped huber terms
        double sx = 0.0, sy = 0.0, nx = 0.0, ny = 0.0, sr = 0.0, nr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sx += wx[i] * ests[i].t_est.translation.x;
            nx += wx[i];
            sy += wy[i] * ests[i].t_est.translation.y;
            ny += wy[i];
            sr += wt[i] * wrap_angle(ests[i].t_est.rotation - t.rotation);
            nr += wt[i];
        }
        t = make_transform(sx / nx, sy / ny, t.rotation + sr / nr);
        if (max_change < cfg.tolerance) break;
    }
    return t;
}

struct RelocConfig {
    double th_match = 0.85;
    int n_seeds = 36;
    int min_estimations = 3;
    double est_min_travel = 1.0;  // meters between estimations from one node
    int max_est_per_node = 2;     // cap so one node cannot form a consensus
    bool feature_only = false;    // identity node<-robot transforms, no ICP
    int n_beams = 360;
    double max_range = 7.0;
    IcpConfig icp{};
    OptimizeConfig optimize{};
    bool stop_at_convergence = false;
};

struct RelocResult {
    Transform2 t_final{};
    int n_used = 0;
    bool converged = false;
    double trail_length = 0.0;  // walked distance at first convergence
};

/// Optimizer state after each accepted estimation; lets the harness replay
/// when the estimate first became good.
struct RelocSnapshot {
    double trail = 0.0;
    Transform2 t{};
    int n_used = 0;
};

struct RelocTrace {
    std::vector<RelocSnapshot> snapshots;
    int icp_runs = 0;
    int attempts = 0;
    std::size_t stop_index = 0;  // walk index where the loop ended
};

/// Walk the given map-frame trajectory, accumulate estimations near main
/// nodes, reject outliers and robust-average after each one. The robot only
/// ever sees odom-frame poses (walk composed with the hidden offset).
inline RelocResult relocalize(const FhtMap& map, const World& world,
                              const Transform2& odom_offset, std::span<const Pose2> walk,
                              const RelocConfig& cfg, RelocTrace* trace = nullptr) {
    RelocResult res;
    std::vector<Estimation> ests;
    std::vector<Estimation> kept;
    const Transform2 odom_from_map = inverse(odom_offset);
    std::unordered_map<int, double> last_trail_for_node;
    std::unordered_map<int, int> est_count_for_node;
    double trail = 0.0;

    for (std::size_t i = 0; i < walk.size(); ++i) {
        if (i > 0) trail += distance(walk[i].position(), walk[i - 1].position());
        const Pose2& pose = walk[i];

        const Descriptor query =
            sense_descriptor(world, pose.position(), cfg.max_range,
                             map.meta.descriptor_dim);
        const auto match = match_descriptor(map, query, cfg.th_match);
        if (!match) continue;
        const auto [node_id, score] = *match;
        const auto seen = last_trail_for_node.find(node_id);
        if (seen != last_trail_for_node.end() &&
            trail - seen->second < cfg.est_min_travel)
            continue;
        if (est_count_for_node[node_id] >= cfg.max_est_per_node) continue;
        if (trace) ++trace->attempts;

        Transform2 t_node_robot = Transform2::identity();
        double rms = 0.0;
        if (!cfg.feature_only) {
            const LaserScan current =
                raycast_scan(world, pose, cfg.n_beams, cfg.max_range);
            try {
                if (trace) ++trace->icp_runs;
                const IcpResult icp =
                    global_icp(*map.node(node_id).scan, current, cfg.n_seeds, cfg.icp);
                t_node_robot = icp.transform;
                rms = icp.rms;
            } catch (const std::runtime_error&) {
                continue;  // no usable alignment at this spot
            }
        }
        last_trail_for_node[node_id] = trail;
        ++est_count_for_node[node_id];

        const Pose2 odom_pose = apply(odom_from_map, pose);
        Estimation e = make_estimation(map, node_id, t_node_robot, odom_pose);
        e.score = score;
        e.icp_rms = rms;
        ests.push_back(std::move(e));

        kept = reject_outliers(ests);
        res.t_final = optimize_transform(kept, cfg.optimize);
        res.n_used = static_cast<int>(kept.size());
        if (trace)
            trace->snapshots.push_back({trail, res.t_final, res.n_used});
        if (!res.converged && res.n_used >= cfg.min_estimations) {
            res.converged = true;
            res.trail_length = trail;
            if (cfg.stop_at_convergence) {
                if (trace) trace->stop_index = i;
                return res;
            }
        }
    }
    if (!res.converged) res.trail_length = trail;
    if (trace) trace->stop_index = walk.empty() ? 0 : walk.size() - 1;
    return res;
}

/// Seeded wandering for relocalization trials: repeated shortest paths to
/// uniformly sampled navigable cells until the requested length is reached.
inline std::vector<Pose2> random_walk(const World& world, Rng& rng, double max_length,
                                      double step, double clearance) {
    const OccupancyGrid& g = world.truth;
    const int clear_cells =
        clearance <= 0.0 ? 0
                         : static_cast<int>(std::ceil(clearance / g.resolution - 1e-9));
    const GridMask nav = navigable_mask(g, clear_cells + 1);
    std::vector<CellIndex> nav_cells;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            if (nav.at(x, y)) nav_cells.push_back({x, y});
    if (nav_cells.empty())
        throw std::runtime_error("random_walk: no navigable space in world");

    std::vector<Pose2> walk;
    CellIndex cur = nav_cells[rng.uniform_int(nav_cells.size())];
    double length = 0.0;
    int failures = 0;
    while (length < max_length && failures < 64) {
        const CellIndex goal = nav_cells[rng.uniform_int(nav_cells.size())];
        const auto path = astar_grid(nav, g.resolution, cur, goal);
        if (!path || path->cells.size() < 2) {
            ++failures;
            continue;
        }
        const std::vector<Point2> pts =
            smooth_path(g, path->cells, clear_cells * g.resolution);
        const std::vector<Pose2> leg = move_along(world, pts, step);
        for (std::size_t i = walk.empty() ? 0 : 1; i < leg.size(); ++i) {
            if (!walk.empty())
                length += distance(walk.back().position(), leg[i].position());
            walk.push_back(leg[i]);
            if (length >= max_length) break;
        }
        cur = goal;
    }
    return walk;
}

}  // namespace fhtmap
