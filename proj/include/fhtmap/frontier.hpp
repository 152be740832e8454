#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fhtmap/geometry.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/search.hpp"

namespace fhtmap {

/// One 8-connected cluster of Free cells on the Free/Unknown boundary.
struct Frontier {
    std::vector<CellIndex> cells;
    Point2 centroid{};
    CellIndex target{};   // frontier cell nearest the centroid
    int info_gain = 0;    // unknown cells within r_info of the centroid
};

inline bool is_frontier_cell(const OccupancyGrid& g, int x, int y) {
    if (g.at(x, y) != Cell::Free) return false;
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (g.in_bounds(nx, ny) && g.at(nx, ny) == Cell::Unknown) return true;
    }
    return false;
}

/// Cluster frontier cells into 8-connected components; components smaller
/// than min_cells are dropped. Output is ordered by lowest (row, column)
/// member for determinism.
inline std::vector<Frontier> detect_frontiers(const OccupancyGrid& g, double r_info,
                                              int min_cells = 3) {
    std::vector<std::uint8_t> fmask(g.cells.size(), 0);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            if (is_frontier_cell(g, x, y)) fmask[g.index(x, y)] = 1;

    std::vector<Frontier> out;
    std::vector<std::uint8_t> seen(g.cells.size(), 0);
    const int ricells = static_cast<int>(std::ceil(r_info / g.resolution));

    // row prefix sums of unknown cells: unk[y*(w+1)+x] = count in row y, cols [0,x)
    std::vector<std::int32_t> unk(static_cast<std::size_t>(g.width + 1) *
                                      static_cast<std::size_t>(g.height),
                                  0);
    for (int y = 0; y < g.height; ++y) {
        const std::size_t base = static_cast<std::size_t>(y) * (g.width + 1);
        for (int x = 0; x < g.width; ++x)
            unk[base + x + 1] =
                unk[base + x] + (g.at(x, y) == Cell::Unknown ? 1 : 0);
    }
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const std::size_t i0 = g.index(x, y);
            if (!fmask[i0] || seen[i0]) continue;
            Frontier f;
            std::vector<CellIndex> stack{{x, y}};
            seen[i0] = 1;
            while (!stack.empty()) {
                const CellIndex c = stack.back();
                stack.pop_back();
                f.cells.push_back(c);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = c.x + dx, ny = c.y + dy;
                        if (!g.in_bounds(nx, ny)) continue;
                        const std::size_t ni = g.index(nx, ny);
                        if (fmask[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
            }
            if (static_cast<int>(f.cells.size()) < min_cells) continue;

            Point2 sum{};
            for (CellIndex c : f.cells) sum = sum + g.center_of(c);
            f.centroid = {sum.x / static_cast<double>(f.cells.size()),
                          sum.y / static_cast<double>(f.cells.size())};

            double best = std::numeric_limits<double>::infinity();
            f.target = f.cells.front();
            for (CellIndex c : f.cells) {
                const double d = distance(g.center_of(c), f.centroid);
                if (d < best - 1e-12 ||
                    (std::abs(d - best) <= 1e-12 &&
                     (c.y < f.target.y || (c.y == f.target.y && c.x < f.target.x)))) {
                    best = d;
                    f.target = c;
                }
            }

            // disk scan in row spans over the unknown-count prefix sums:
            // counts cells whose center lies within r_info of the centroid
            const CellIndex cc = g.cell_of(f.centroid);
            const double rc = r_info / g.resolution;
            for (int dy = -ricells; dy <= ricells; ++dy) {
                const int ny = cc.y + dy;
                if (ny < 0 || ny >= g.height) continue;
                const double fy = (ny + 0.5) - (f.centroid.y - g.origin.y) / g.resolution;
                if (std::abs(fy) > rc) continue;
                const double half = std::sqrt(rc * rc - fy * fy);
                const double fx0 = (f.centroid.x - g.origin.x) / g.resolution;
                const int x0 = std::max(0, static_cast<int>(std::ceil(fx0 - half - 0.5)));
                const int x1 = std::min(g.width - 1,
                                        static_cast<int>(std::floor(fx0 + half - 0.5)));
                if (x1 < x0) continue;
                const std::size_t base = static_cast<std::size_t>(ny) * (g.width + 1);
                f.info_gain += unk[base + x1 + 1] - unk[base + x0];
            }
            out.push_back(std::move(f));
        }
    }
    return out;
}

/// Information gain divided by A* travel cost on explored free cells;
/// unreachable frontiers score zero.
inline double frontier_utility(const Frontier& f, const Pose2& pose,
                               const OccupancyGrid& explored) {
    const GridMask mask = free_mask(explored);
    const auto path = astar_grid(mask, explored.resolution, explored.cell_of(pose.position()),
                                 f.target);
    if (!path) return 0.0;
    const double cost = std::max(path->length, explored.resolution);
    return static_cast<double>(f.info_gain) / cost;
}

}  // namespace fhtmap
