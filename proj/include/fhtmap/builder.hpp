#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "fhtmap/common.hpp"
#include "fhtmap/descriptor.hpp"
#include "fhtmap/graph.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/raycast.hpp"
#include "fhtmap/search.hpp"

namespace fhtmap {

/// Map composition variants used by the evaluation harness.
///   Fht        - main + support nodes, refinement shortcuts
///   MainOnly   - every creation trigger emits a full main node, no shortcuts
///   FeatureOnly- main nodes only (descriptor baseline), no support triggers
enum class MapMode { Fht, MainOnly, FeatureOnly };

struct BuilderConfig {
    double sigma_c = 2.65;
    double gamma1 = 0.06;
    double gamma2 = 0.03;
    double th_s = 3.0;
    double clearance = 0.05;        // meters; edge and visibility tests
    double rho = 1.5;               // refinement trigger: d_topo > rho * d_grid
    double max_half_extent = 7.0;   // free-rectangle growth cap
    int n_bins = 10;                // entropy histogram bins
    MapMode mode = MapMode::Fht;

    void validate() const {
        if (!(gamma2 < gamma1))
            throw ConfigError("builder: gamma2 must be < gamma1");
        if (!(sigma_c > 0.0)) throw ConfigError("builder: sigma_c must be > 0");
        if (n_bins < 2) throw ConfigError("builder: n_bins must be >= 2");
        if (!(th_s > 0.0)) throw ConfigError("builder: th_s must be > 0");
    }
};

/// Grow an axis-aligned free rectangle outward from the cell containing
/// `center`, one cell strip at a time, freezing each side when it meets a
/// non-free cell or the per-side half-extent cap.
inline Rect grow_free_rect(const OccupancyGrid& g, Point2 center,
                           double max_half_extent) {
    const CellIndex c0 = g.cell_of(center);
    if (!g.is_free(c0))
        throw std::invalid_argument("grow_free_rect: center not in free space");
    const int cap = std::max(1, static_cast<int>(max_half_extent / g.resolution));
    int lo_x = c0.x, hi_x = c0.x, lo_y = c0.y, hi_y = c0.y;
    bool frozen[4] = {false, false, false, false};  // -x, +x, -y, +y

    auto strip_free = [&](int fx0, int fx1, int fy0, int fy1) {
        for (int y = fy0; y <= fy1; ++y)
            for (int x = fx0; x <= fx1; ++x)
                if (!g.in_bounds(x, y) || g.at(x, y) != Cell::Free) return false;
        return true;
    };

    while (!(frozen[0] && frozen[1] && frozen[2] && frozen[3])) {
        if (!frozen[0]) {
            if (c0.x - (lo_x - 1) > cap || !strip_free(lo_x - 1, lo_x - 1, lo_y, hi_y))
                frozen[0] = true;
            else
                --lo_x;
        }
        if (!frozen[1]) {
            if ((hi_x + 1) - c0.x > cap || !strip_free(hi_x + 1, hi_x + 1, lo_y, hi_y))
                frozen[1] = true;
            else
                ++hi_x;
        }
        if (!frozen[2]) {
            if (c0.y - (lo_y - 1) > cap || !strip_free(lo_x, hi_x, lo_y - 1, lo_y - 1))
                frozen[2] = true;
            else
                --lo_y;
        }
        if (!frozen[3]) {
            if ((hi_y + 1) - c0.y > cap || !strip_free(lo_x, hi_x, hi_y + 1, hi_y + 1))
                frozen[3] = true;
            else
                ++hi_y;
        }
    }
    return Rect{g.origin.x + lo_x * g.resolution, g.origin.y + lo_y * g.resolution,
                g.origin.x + (hi_x + 1) * g.resolution,
                g.origin.y + (hi_y + 1) * g.resolution};
}

inline Rect one_cell_rect(const OccupancyGrid& g, Point2 p) {
    const CellIndex c = g.cell_of(p);
    return Rect{g.origin.x + c.x * g.resolution, g.origin.y + c.y * g.resolution,
                g.origin.x + (c.x + 1) * g.resolution,
                g.origin.y + (c.y + 1) * g.resolution};
}

/// Connect a freshly inserted node to every existing node reachable by a
/// free-space segment. Returns the number of edges added.
inline int add_edges(FhtMap& map, int node_id, const OccupancyGrid& explored,
                     double clearance) {
    const Point2 p = map.node(node_id).position;
    int added = 0;
    for (const MapNode& other : map.nodes()) {
        if (other.id == node_id) continue;
        if (segment_in_free(explored, other.position, p, clearance))
            if (map.add_edge(node_id, other.id)) ++added;
    }
    return added;
}

/// Online FHT-Map construction state machine (candidate window for main
/// nodes, support-node triggers, edges, rectangles, refinement).
class Builder {
public:
    struct Candidate {
        Pose2 pose;
        Descriptor descriptor;
        LaserScan scan;
        double entropy = 0.0;
    };

    explicit Builder(BuilderConfig cfg, int descriptor_dim, double resolution)
        : cfg_(cfg) {
        cfg_.validate();
        map_.meta.descriptor_dim = descriptor_dim;
        map_.meta.resolution = resolution;
    }

    const FhtMap& map() const { return map_; }
    FhtMap& map() { return map_; }
    const BuilderConfig& config() const { return cfg_; }
    bool in_candidate_phase() const { return in_candidate_phase_; }
    const std::vector<Candidate>& candidates() const { return candidates_; }

    /// Main-node selection. Bootstraps the first node on an empty map, then
    /// tracks the relocalization capability: the candidate window opens when
    /// C drops below gamma1 and the best-entropy candidate is emitted once C
    /// reaches gamma2.
    std::optional<MapNode> update_main_node(const Pose2& pose, const Descriptor& d,
                                            const LaserScan& scan) {
        const double h = entropy(d, cfg_.n_bins);
        if (map_.empty()) return make_main(pose, d, scan, h);

        const double c = reloc_capability(map_, pose.position(), cfg_.sigma_c);
        if (!in_candidate_phase_ && c < cfg_.gamma1) in_candidate_phase_ = true;
        if (!in_candidate_phase_) return std::nullopt;

        if (c > cfg_.gamma2) {
            candidates_.push_back({pose, d, scan, h});
            return std::nullopt;
        }
        // capability exhausted: emit the best candidate seen in the window
        if (candidates_.empty()) candidates_.push_back({pose, d, scan, h});
        std::size_t best = 0;
        for (std::size_t i = 1; i < candidates_.size(); ++i)
            if (candidates_[i].entropy > candidates_[best].entropy + 1e-15) best = i;
        Candidate chosen = std::move(candidates_[best]);
        candidates_.clear();
        in_candidate_phase_ = false;
        return make_main(chosen.pose, chosen.descriptor, chosen.scan, chosen.entropy);
    }

    /// Support-node triggers: (1) no existing node is reachable by a
    /// free-space segment from the pose, or (2) every node is farther than
    /// th_s. Returns an unpayloaded support node, or nothing.
    std::optional<MapNode> update_support_node(const Pose2& pose,
                                               const OccupancyGrid& explored) const {
        if (!support_trigger(pose, explored)) return std::nullopt;
        MapNode n;
        n.kind = NodeKind::Support;
        n.position = pose.position();
        n.free_rect = one_cell_rect(explored, n.position);
        return n;
    }

    bool support_trigger(const Pose2& pose, const OccupancyGrid& explored) const {
        if (map_.empty()) return false;
        const Point2 p = pose.position();
        double min_d = std::numeric_limits<double>::infinity();
        // nearest first: the common case resolves with a single segment test
        std::vector<int> order(static_cast<std::size_t>(map_.size()));
        for (int i = 0; i < map_.size(); ++i) order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return (map_.node(a).position - p).squared_norm() <
                   (map_.node(b).position - p).squared_norm();
        });
        bool any_visible = false;
        for (int id : order) {
            const double d = distance(map_.node(id).position, p);
            min_d = std::min(min_d, d);
            if (segment_in_free(explored, map_.node(id).position, p, cfg_.clearance)) {
                any_visible = true;
                break;
            }
        }
        return !any_visible || min_d > cfg_.th_s;
    }

    /// One step of Algorithm-style construction: main-node check first (its
    /// emission suppresses the support check), then insertion, edges, the
    /// previous node's rectangle, and refinement.
    void build_step(const Pose2& pose, const Descriptor& d, const LaserScan& scan,
                    const OccupancyGrid& explored) {
        std::optional<MapNode> created = update_main_node(pose, d, scan);
        if (!created && cfg_.mode != MapMode::FeatureOnly) {
            if (cfg_.mode == MapMode::MainOnly) {
                if (support_trigger(pose, explored))
                    created = make_main(pose, d, scan, entropy(d, cfg_.n_bins));
            } else {
                created = update_support_node(pose, explored);
            }
        }
        if (!created) return;
        const int id = insert_node(std::move(*created), explored);
        refine_map(explored, id);
    }

    /// Re-grow the free rectangle of the next-to-last node against the
    /// current explored grid (it has grown since that node was created).
    void finalize_previous_rect(const OccupancyGrid& explored) {
        if (map_.size() < 2) return;
        MapNode& prev = map_.node(map_.size() - 2);
        prev.free_rect = grow_free_rect(explored, prev.position, cfg_.max_half_extent);
    }

    /// Insert + edges + previous-rect finalization; shared by build_step and
    /// the refinement chain.
    int insert_node(MapNode n, const OccupancyGrid& explored) {
        n.free_rect = one_cell_rect(explored, n.position);
        const int id = map_.add_node(std::move(n));
        add_edges(map_, id, explored, cfg_.clearance);
        finalize_previous_rect(explored);
        return id;
    }

    /// Topological refinement around a new node: wherever the graph distance
    /// to another node exceeds rho times the grid distance (or the nodes are
    /// not graph-connected at all), insert a chain of sparsely spaced nodes
    /// along the grid path. Returns the number of nodes inserted.
    int refine_map(const OccupancyGrid& explored, int new_id) {
        const double rho =
            cfg_.mode == MapMode::Fht ? cfg_.rho : std::numeric_limits<double>::infinity();
        const NodeKind chain_kind =
            cfg_.mode == MapMode::Fht ? NodeKind::Support : NodeKind::Main;

        const int clear_cells =
            cfg_.clearance <= 0.0
                ? 0
                : static_cast<int>(std::ceil(cfg_.clearance / explored.resolution - 1e-9));
        const GridMask nav = navigable_mask(explored, clear_cells + 1);
        const CellIndex start = explored.cell_of(map_.node(new_id).position);
        const auto nav_start = nearest_passable(nav, start, 8);
        if (!nav_start) return 0;

        const int n_before = map_.size();
        std::vector<std::optional<CellIndex>> goals(static_cast<std::size_t>(n_before));
        std::vector<CellIndex> goal_cells;
        for (int j = 0; j < n_before; ++j) {
            if (j == new_id) continue;
            goals[static_cast<std::size_t>(j)] =
                nearest_passable(nav, explored.cell_of(map_.node(j).position), 8);
            if (goals[static_cast<std::size_t>(j)])
                goal_cells.push_back(*goals[static_cast<std::size_t>(j)]);
        }
        const GridSweep grid_sweep =
            dijkstra_grid(nav, explored.resolution, *nav_start, &goal_cells);

        int inserted = 0;
        GraphSweep topo = graph_dijkstra(map_, new_id);
        for (int j = 0; j < n_before; ++j) {
            if (j == new_id) continue;
            const auto& goal = goals[static_cast<std::size_t>(j)];
            if (!goal) continue;
            const double d_grid = grid_sweep.at(*goal);
            if (d_grid == std::numeric_limits<double>::infinity()) continue;
            const double d_topo = topo.dist[static_cast<std::size_t>(j)];
            const bool disconnected = d_topo == std::numeric_limits<double>::infinity();
            if (!disconnected && !(d_topo > rho * d_grid)) continue;

            const std::vector<CellIndex> cells = grid_sweep.path_to(*goal);
            inserted += insert_chain(explored, new_id, j, cells, chain_kind);
            topo = graph_dijkstra(map_, new_id);  // distances changed
        }
        return inserted;
    }

    /// Finish construction: grow the last node's still-provisional rectangle.
    void finish(const OccupancyGrid& explored) {
        if (map_.empty()) return;
        MapNode& last = map_.node(map_.size() - 1);
        last.free_rect = grow_free_rect(explored, last.position, cfg_.max_half_extent);
    }

private:
    MapNode make_main(const Pose2& pose, const Descriptor& d, const LaserScan& scan,
                      double h) const {
        MapNode n;
        n.kind = NodeKind::Main;
        n.position = pose.position();
        n.descriptor = d;
        n.scan = scan;
        n.entropy = h;
        return n;
    }

    /// Walk the grid path from `from_id` toward `to_id`, dropping nodes at
    /// the farthest point that is still segment-visible from the current
    /// anchor and within th_s of it. Existing nodes near a prospective spot
    /// are reused as anchors instead of inserting duplicates.
    int insert_chain(const OccupancyGrid& explored, int from_id, int to_id,
                     const std::vector<CellIndex>& cells, NodeKind kind) {
        if (cells.size() < 2) return 0;
        int inserted = 0;
        int anchor = from_id;
        std::size_t idx = 0;
        const Point2 to_pos = map_.node(to_id).position;
        std::size_t guard = cells.size() + 4;

        while (guard-- > 0) {
            const Point2 anchor_pos = map_.node(anchor).position;
            if (segment_in_free(explored, anchor_pos, to_pos, cfg_.clearance)) {
                map_.add_edge(anchor, to_id);
                break;
            }
            // farthest path point visible from the anchor within th_s
            std::size_t best = idx;
            for (std::size_t k = idx + 1; k < cells.size(); ++k) {
                const Point2 q = explored.center_of(cells[k]);
                if (distance(anchor_pos, q) > cfg_.th_s) break;
                if (segment_in_free(explored, anchor_pos, q, cfg_.clearance)) best = k;
            }
            if (best == idx) break;  // no progress possible
            const Point2 spot = explored.center_of(cells[best]);

            // reuse a nearby visible node rather than stacking a new one
            int reuse = -1;
            double reuse_d = cfg_.th_s / 2.0;
            for (const MapNode& other : map_.nodes()) {
                if (other.id == anchor) continue;
                const double d = distance(other.position, spot);
                if (d < reuse_d &&
                    segment_in_free(explored, anchor_pos, other.position, cfg_.clearance)) {
                    reuse = other.id;
                    reuse_d = d;
                }
            }
            if (reuse >= 0) {
                map_.add_edge(anchor, reuse);
                anchor = reuse;
            } else {
                MapNode n;
                n.kind = kind;
                n.position = spot;
                if (kind == NodeKind::Main) {
                    // chains outside fht mode need the full main-node payload
                    if (!sensor_hook_)
                        throw std::logic_error(
                            "Builder: main-node chain requires a sensor hook");
                    auto [desc, chain_scan] = sensor_hook_(spot);
                    n.descriptor = std::move(desc);
                    n.scan = std::move(chain_scan);
                    n.entropy = entropy(*n.descriptor, cfg_.n_bins);
                }
                anchor = insert_node(std::move(n), explored);
                ++inserted;
            }
            idx = best;
        }
        return inserted;
    }

public:
    /// Optional sensing callback for main-only chains (descriptor + heading
    /// zero scan at a position).
    using SensorHook = std::function<std::pair<Descriptor, LaserScan>(Point2)>;
    void set_sensor_hook(SensorHook hook) { sensor_hook_ = std::move(hook); }

private:
    BuilderConfig cfg_;
    FhtMap map_;
    std::vector<Candidate> candidates_;
    bool in_candidate_phase_ = false;
    SensorHook sensor_hook_;
};

}  // namespace fhtmap
