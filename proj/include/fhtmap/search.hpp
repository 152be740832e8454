#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <vector>

#include "fhtmap/geometry.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/raycast.hpp"

namespace fhtmap {

/// Per-cell boolean mask with the grid's indexing.
struct GridMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pass;

    bool at(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height &&
               pass[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                    static_cast<std::size_t>(x)] != 0;
    }
    bool at(CellIndex c) const { return at(c.x, c.y); }
};

/// Cells whose Chebyshev ball of `radius_cells` is entirely Free. Motion
/// planned on this mask keeps the robot clear of obstacles and unknown
/// space, and straight segments between 8-adjacent mask cells stay valid
/// for edge tests with clearance (radius_cells - 1) * resolution.
inline GridMask navigable_mask(const OccupancyGrid& g, int radius_cells) {
    GridMask m;
    m.width = g.width;
    m.height = g.height;
    m.pass.assign(g.cells.size(), 0);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            bool ok = true;
            for (int dy = -radius_cells; ok && dy <= radius_cells; ++dy)
                for (int dx = -radius_cells; dx <= radius_cells; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (!g.in_bounds(nx, ny) || g.at(nx, ny) != Cell::Free) {
                        ok = false;
                        break;
                    }
                }
            if (ok) m.pass[g.index(x, y)] = 1;
        }
    }
    return m;
}

inline GridMask free_mask(const OccupancyGrid& g) {
    GridMask m;
    m.width = g.width;
    m.height = g.height;
    m.pass.assign(g.cells.size(), 0);
    for (std::size_t i = 0; i < g.cells.size(); ++i)
        if (g.cells[i] == Cell::Free) m.pass[i] = 1;
    return m;
}

namespace detail {

struct QueueEntry {
    double f;
    double g;
    std::int64_t idx;
    friend bool operator>(const QueueEntry& a, const QueueEntry& b) {
        if (a.f != b.f) return a.f > b.f;
        if (a.g != b.g) return a.g > b.g;
        return a.idx > b.idx;
    }
};

// 8-connected neighbor offsets: cardinals first, then diagonals.
inline constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
inline constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

}  // namespace detail

struct GridPath {
    std::vector<CellIndex> cells;
    double length = 0.0;  // meters, octile metric
};

/// Deterministic 8-connected A* with octile costs. Diagonal moves require
/// both adjacent cardinal cells passable (no corner cutting).
inline std::optional<GridPath> astar_grid(const GridMask& mask, double resolution,
                                          CellIndex start, CellIndex goal) {
    if (!mask.at(start) || !mask.at(goal)) return std::nullopt;
    const std::size_t n =
        static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<std::int32_t> parent(n, -1);
    auto id = [&](CellIndex c) {
        return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(mask.width) +
               static_cast<std::size_t>(c.x);
    };
    auto heuristic = [&](CellIndex c) {
        const double dx = std::abs(c.x - goal.x);
        const double dy = std::abs(c.y - goal.y);
        return (std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy)) *
               resolution;
    };

    std::priority_queue<detail::QueueEntry, std::vector<detail::QueueEntry>,
                        std::greater<detail::QueueEntry>>
        open;
    dist[id(start)] = 0.0;
    open.push({heuristic(start), 0.0, static_cast<std::int64_t>(id(start))});
    const double diag = std::numbers::sqrt2 * resolution;

    while (!open.empty()) {
        const auto top = open.top();
        open.pop();
        const std::size_t ci = static_cast<std::size_t>(top.idx);
        if (top.g > dist[ci]) continue;
        CellIndex c{static_cast<int>(ci % static_cast<std::size_t>(mask.width)),
                    static_cast<int>(ci / static_cast<std::size_t>(mask.width))};
        if (c == goal) break;
        for (int k = 0; k < 8; ++k) {
            const CellIndex nb{c.x + detail::kDx[k], c.y + detail::kDy[k]};
            if (!mask.at(nb)) continue;
            if (k >= 4 && (!mask.at(c.x + detail::kDx[k], c.y) ||
                           !mask.at(c.x, c.y + detail::kDy[k])))
                continue;
            const double w = k < 4 ? resolution : diag;
            const double nd = top.g + w;
            const std::size_t ni = id(nb);
            if (nd < dist[ni] - 1e-15) {
                dist[ni] = nd;
                parent[ni] = static_cast<std::int32_t>(ci);
                open.push({nd + heuristic(nb), nd, static_cast<std::int64_t>(ni)});
            }
        }
    }

    if (dist[id(goal)] == inf) return std::nullopt;
    GridPath path;
    path.length = dist[id(goal)];
    for (std::int64_t cur = static_cast<std::int64_t>(id(goal)); cur >= 0;
         cur = parent[static_cast<std::size_t>(cur)]) {
        path.cells.push_back(
            {static_cast<int>(cur % mask.width), static_cast<int>(cur / mask.width)});
        if (parent[static_cast<std::size_t>(cur)] < 0) break;
    }
    std::reverse(path.cells.begin(), path.cells.end());
    return path;
}

/// Single-source shortest distances over the whole mask (octile weights).
struct GridSweep {
    std::vector<double> dist;
    std::vector<std::int32_t> parent;
    int width = 0;

    double at(CellIndex c) const {
        return dist[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) +
                    static_cast<std::size_t>(c.x)];
    }

    std::vector<CellIndex> path_to(CellIndex goal) const {
        std::vector<CellIndex> out;
        std::int64_t cur = static_cast<std::int64_t>(goal.y) * width + goal.x;
        if (dist[static_cast<std::size_t>(cur)] ==
            std::numeric_limits<double>::infinity())
            return out;
        while (cur >= 0) {
            out.push_back({static_cast<int>(cur % width), static_cast<int>(cur / width)});
            cur = parent[static_cast<std::size_t>(cur)];
        }
        std::reverse(out.begin(), out.end());
        return out;
    }
};

/// Single-source sweep. When `targets` is given, the search stops as soon
/// as every target cell has settled (distances elsewhere stay infinite).
inline GridSweep dijkstra_grid(const GridMask& mask, double resolution, CellIndex start,
                               const std::vector<CellIndex>* targets = nullptr) {
    GridSweep sweep;
    sweep.width = mask.width;
    const std::size_t n =
        static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height);
    sweep.dist.assign(n, std::numeric_limits<double>::infinity());
    sweep.parent.assign(n, -1);
    if (!mask.at(start)) return sweep;

    auto id = [&](CellIndex c) {
        return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(mask.width) +
               static_cast<std::size_t>(c.x);
    };
    std::vector<std::uint8_t> pending(targets ? n : 0, 0);
    std::size_t remaining = 0;
    if (targets)
        for (const CellIndex& t : *targets)
            if (mask.at(t) && !pending[id(t)]) {
                pending[id(t)] = 1;
                ++remaining;
            }

    std::priority_queue<detail::QueueEntry, std::vector<detail::QueueEntry>,
                        std::greater<detail::QueueEntry>>
        open;
    sweep.dist[id(start)] = 0.0;
    open.push({0.0, 0.0, static_cast<std::int64_t>(id(start))});
    const double diag = std::numbers::sqrt2 * resolution;
    while (!open.empty()) {
        const auto top = open.top();
        open.pop();
        const std::size_t ci = static_cast<std::size_t>(top.idx);
        if (top.g > sweep.dist[ci]) continue;
        if (targets && pending[ci]) {
            pending[ci] = 0;
            if (--remaining == 0) break;
        }
        CellIndex c{static_cast<int>(ci % static_cast<std::size_t>(mask.width)),
                    static_cast<int>(ci / static_cast<std::size_t>(mask.width))};
        for (int k = 0; k < 8; ++k) {
            const CellIndex nb{c.x + detail::kDx[k], c.y + detail::kDy[k]};
            if (!mask.at(nb)) continue;
            if (k >= 4 && (!mask.at(c.x + detail::kDx[k], c.y) ||
                           !mask.at(c.x, c.y + detail::kDy[k])))
                continue;
            const double nd = top.g + (k < 4 ? resolution : diag);
            const std::size_t ni = id(nb);
            if (nd < sweep.dist[ni] - 1e-15) {
                sweep.dist[ni] = nd;
                sweep.parent[ni] = static_cast<std::int32_t>(ci);
                open.push({nd, nd, static_cast<std::int64_t>(ni)});
            }
        }
    }
    return sweep;
}

/// Nearest passable cell to `from` by BFS over the full lattice; useful for
/// snapping frontier targets into the navigable region.
inline std::optional<CellIndex> nearest_passable(const GridMask& mask, CellIndex from,
                                                 int max_radius = 64) {
    if (mask.at(from)) return from;
    for (int r = 1; r <= max_radius; ++r) {
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                const CellIndex c{from.x + dx, from.y + dy};
                if (mask.at(c)) return c;
            }
        }
    }
    return std::nullopt;
}

/// Greedy line-of-sight shortening of a grid path: from each anchor, extend
/// the jump while the segment stays free, committing the last success.
inline std::vector<Point2> smooth_path(const OccupancyGrid& g,
                                       const std::vector<CellIndex>& cells,
                                       double clearance) {
    std::vector<Point2> out;
    if (cells.empty()) return out;
    std::size_t i = 0;
    out.push_back(g.center_of(cells[0]));
    while (i + 1 < cells.size()) {
        std::size_t best = i + 1;
        // geometric stride keeps the scan near-linear on long open paths
        std::size_t stride = 1;
        std::size_t probe = i + 1;
        while (probe < cells.size()) {
            if (segment_in_free(g, g.center_of(cells[i]), g.center_of(cells[probe]),
                                clearance)) {
                best = probe;
                if (probe == cells.size() - 1) break;
                stride *= 2;
                probe = std::min(cells.size() - 1, probe + stride);
            } else if (stride > 1) {
                stride = 1;
                probe = best + 1;
            } else {
                break;
            }
        }
        out.push_back(g.center_of(cells[best]));
        i = best;
    }
    return out;
}

}  // namespace fhtmap
