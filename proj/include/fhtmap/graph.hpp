#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fhtmap/descriptor.hpp"
#include "fhtmap/geometry.hpp"
#include "fhtmap/raycast.hpp"

namespace fhtmap {

enum class NodeKind { Main, Support };

/// Graph node. Main nodes carry the place descriptor, a heading-zero local
/// scan and the cached descriptor entropy; support nodes carry none of
/// those, only id, position and the local free rectangle.
struct MapNode {
    int id = -1;
    NodeKind kind = NodeKind::Support;
    Point2 position{};
    Rect free_rect{};
    std::optional<Descriptor> descriptor;
    std::optional<LaserScan> scan;
    std::optional<double> entropy;

    bool is_main() const { return kind == NodeKind::Main; }

    friend bool operator==(const MapNode&, const MapNode&) = default;
};

struct MapMeta {
    int descriptor_dim = 0;
    double resolution = 0.05;
    std::string frame = "map";

    friend bool operator==(const MapMeta&, const MapMeta&) = default;
};

/// Undirected graph of map nodes with free-space edges.
class FhtMap {
public:
    MapMeta meta;

    const std::vector<MapNode>& nodes() const { return nodes_; }
    const std::set<std::pair<int, int>>& edges() const { return edges_; }

    bool empty() const { return nodes_.empty(); }
    int size() const { return static_cast<int>(nodes_.size()); }

    const MapNode& node(int id) const {
        if (id < 0 || id >= size()) throw std::out_of_range("FhtMap: unknown node id");
        return nodes_[static_cast<std::size_t>(id)];
    }
    MapNode& node(int id) {
        if (id < 0 || id >= size()) throw std::out_of_range("FhtMap: unknown node id");
        return nodes_[static_cast<std::size_t>(id)];
    }

    /// Insert a node; its id is assigned densely in creation order.
    int add_node(MapNode n) {
        n.id = size();
        if (n.kind == NodeKind::Support &&
            (n.descriptor || n.scan || n.entropy))
            throw std::invalid_argument("FhtMap: support node must not carry payload");
        nodes_.push_back(std::move(n));
        adjacency_.emplace_back();
        return nodes_.back().id;
    }

    bool add_edge(int a, int b) {
        if (a == b) throw std::invalid_argument("FhtMap: self loop");
        node(a);
        node(b);
        auto [it, inserted] = edges_.insert(std::minmax(a, b));
        if (inserted) {
            adjacency_[static_cast<std::size_t>(a)].push_back(b);
            adjacency_[static_cast<std::size_t>(b)].push_back(a);
        }
        return inserted;
    }

    bool has_edge(int a, int b) const { return edges_.count(std::minmax(a, b)) > 0; }

    const std::vector<int>& neighbors(int id) const {
        return adjacency_[static_cast<std::size_t>(id)];
    }

    int main_count() const {
        return static_cast<int>(
            std::count_if(nodes_.begin(), nodes_.end(),
                          [](const MapNode& n) { return n.is_main(); }));
    }
    int support_count() const { return size() - main_count(); }

    bool connected() const {
        if (nodes_.empty()) return true;
        std::vector<std::uint8_t> seen(nodes_.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        std::size_t visited = 1;
        while (!stack.empty()) {
            const int c = stack.back();
            stack.pop_back();
            for (int nb : neighbors(c))
                if (!seen[static_cast<std::size_t>(nb)]) {
                    seen[static_cast<std::size_t>(nb)] = 1;
                    ++visited;
                    stack.push_back(nb);
                }
        }
        return visited == nodes_.size();
    }

    friend bool operator==(const FhtMap& a, const FhtMap& b) {
        return a.meta == b.meta && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
    }

private:
    std::vector<MapNode> nodes_;
    std::set<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adjacency_;
};

/// Shannon entropy of the component-value histogram: [0,1] split into
/// n_bins equal sub-intervals, natural log, empty bins contribute zero.
inline double entropy(std::span<const float> values, int n_bins) {
    if (n_bins < 2) throw std::invalid_argument("entropy: n_bins must be >= 2");
    if (values.empty()) return 0.0;
    std::vector<int> counts(static_cast<std::size_t>(n_bins), 0);
    for (float v : values) {
        const double x = std::clamp(static_cast<double>(v), 0.0, 1.0);
        int b = static_cast<int>(x * n_bins);
        if (b >= n_bins) b = n_bins - 1;
        ++counts[static_cast<std::size_t>(b)];
    }
    const double total = static_cast<double>(values.size());
    double h = 0.0;
    for (int c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log(p);
    }
    return h;
}

inline double entropy(const Descriptor& d, int n_bins) {
    return entropy(std::span<const float>(d.values), n_bins);
}

struct GraphSweep {
    std::vector<double> dist;
    std::vector<int> parent;
};

/// Dijkstra over the node graph with Euclidean edge weights.
inline GraphSweep graph_dijkstra(const FhtMap& map, int source) {
    map.node(source);
    const std::size_t n = static_cast<std::size_t>(map.size());
    GraphSweep sweep;
    sweep.dist.assign(n, std::numeric_limits<double>::infinity());
    sweep.parent.assign(n, -1);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    sweep.dist[static_cast<std::size_t>(source)] = 0.0;
    open.push({0.0, source});
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (d > sweep.dist[static_cast<std::size_t>(u)]) continue;
        for (int v : map.neighbors(u)) {
            const double w = distance(map.node(u).position, map.node(v).position);
            const double nd = d + w;
            if (nd < sweep.dist[static_cast<std::size_t>(v)] - 1e-15) {
                sweep.dist[static_cast<std::size_t>(v)] = nd;
                sweep.parent[static_cast<std::size_t>(v)] = u;
                open.push({nd, v});
            }
        }
    }
    return sweep;
}

/// Relocalization capability at q: entropy-weighted Gaussian sum over the
/// main nodes. Support nodes contribute nothing.
inline double reloc_capability(const FhtMap& map, Point2 q, double sigma_c) {
    if (!(sigma_c > 0.0)) throw std::invalid_argument("reloc_capability: sigma_c must be > 0");
    double c = 0.0;
    for (const MapNode& n : map.nodes()) {
        if (!n.is_main()) continue;
        const double d2 = (q - n.position).squared_norm();
        c += *n.entropy * std::exp(-d2 / (sigma_c * sigma_c));
    }
    return c;
}

}  // namespace fhtmap
