#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fhtmap/geometry.hpp"
#include "fhtmap/graph.hpp"
#include "fhtmap/grid.hpp"

namespace fhtmap {

/// Plaintext render of the map over the explored grid. Legend line first,
/// then one text row per (possibly downsampled) grid row, top row first.
///   '#' occupied, '.' free, ' ' unknown, '*' trajectory, 'M' main node,
///   'o' support node, '+' free-rect corner.
inline std::string render_ascii(const FhtMap& map, const OccupancyGrid& grid,
                                std::span<const Pose2> trajectory = {},
                                int max_width = 160) {
    const int scale = std::max(1, (grid.width + max_width - 1) / max_width);
    const int w = (grid.width + scale - 1) / scale;
    const int h = (grid.height + scale - 1) / scale;
    std::vector<char> canvas(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));

    for (int cy = 0; cy < h; ++cy)
        for (int cx = 0; cx < w; ++cx) {
            int occ = 0, free = 0;
            for (int dy = 0; dy < scale; ++dy)
                for (int dx = 0; dx < scale; ++dx) {
                    const int x = cx * scale + dx, y = cy * scale + dy;
                    if (!grid.in_bounds(x, y)) continue;
                    if (grid.at(x, y) == Cell::Occupied) ++occ;
                    else if (grid.at(x, y) == Cell::Free) ++free;
                }
            canvas[static_cast<std::size_t>(cy) * w + cx] =
                occ > 0 ? '#' : (free > 0 ? '.' : ' ');
        }

    auto plot = [&](Point2 p, char c) {
        const CellIndex cell = grid.cell_of(p);
        if (!grid.in_bounds(cell)) return;
        const int cx = cell.x / scale, cy = cell.y / scale;
        canvas[static_cast<std::size_t>(cy) * w + cx] = c;
    };
    for (const Pose2& p : trajectory) plot(p.position(), '*');
    for (const MapNode& n : map.nodes()) {
        plot({n.free_rect.xmin, n.free_rect.ymin}, '+');
        plot({n.free_rect.xmax, n.free_rect.ymin}, '+');
        plot({n.free_rect.xmin, n.free_rect.ymax}, '+');
        plot({n.free_rect.xmax, n.free_rect.ymax}, '+');
    }
    for (const MapNode& n : map.nodes()) plot(n.position, n.is_main() ? 'M' : 'o');

    std::string out = "nodes: " + std::to_string(map.size()) + " (main " +
                      std::to_string(map.main_count()) + ", support " +
                      std::to_string(map.support_count()) + "), edges: " +
                      std::to_string(map.edges().size()) + "\n";
    for (int cy = h - 1; cy >= 0; --cy) {
        out.append(&canvas[static_cast<std::size_t>(cy) * w], static_cast<std::size_t>(w));
        out += '\n';
    }
    return out;
}

namespace detail {

struct Rgb {
    std::uint8_t r, g, b;
};

inline void draw_line(std::vector<Rgb>& img, int w, int h, CellIndex a, CellIndex b,
                      Rgb c) {
    int x0 = a.x, y0 = a.y;
    const int dx = std::abs(b.x - x0), sx = x0 < b.x ? 1 : -1;
    const int dy = -std::abs(b.y - y0), sy = y0 < b.y ? 1 : -1;
    int err = dx + dy;
    while (true) {
        if (x0 >= 0 && y0 >= 0 && x0 < w && y0 < h)
            img[static_cast<std::size_t>(y0) * w + x0] = c;
        if (x0 == b.x && y0 == b.y) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

}  // namespace detail

/// Color render (P3 portable pixmap): occupied black, free white, unknown
/// gray, edges blue, rects green, trajectory orange, main nodes red,
/// support nodes yellow. The legend rides in a PPM comment.
inline std::string render_ppm(const FhtMap& map, const OccupancyGrid& grid,
                              std::span<const Pose2> trajectory = {}) {
    using detail::Rgb;
    const int w = grid.width, h = grid.height;
    std::vector<Rgb> img(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            Rgb c{128, 128, 128};
            if (grid.at(x, y) == Cell::Free) c = {255, 255, 255};
            else if (grid.at(x, y) == Cell::Occupied) c = {0, 0, 0};
            img[grid.index(x, y)] = c;
        }

    for (const MapNode& n : map.nodes()) {
        const Rect& r = n.free_rect;
        const CellIndex a = grid.cell_of({r.xmin, r.ymin});
        const CellIndex b = grid.cell_of({r.xmax - 1e-9, r.ymax - 1e-9});
        detail::draw_line(img, w, h, a, {b.x, a.y}, {0, 170, 0});
        detail::draw_line(img, w, h, {b.x, a.y}, b, {0, 170, 0});
        detail::draw_line(img, w, h, b, {a.x, b.y}, {0, 170, 0});
        detail::draw_line(img, w, h, {a.x, b.y}, a, {0, 170, 0});
    }
    for (const auto& [i, j] : map.edges())
        detail::draw_line(img, w, h, grid.cell_of(map.node(i).position),
                          grid.cell_of(map.node(j).position), {40, 90, 255});
    for (const Pose2& p : trajectory) {
        const CellIndex c = grid.cell_of(p.position());
        if (grid.in_bounds(c)) img[grid.index(c.x, c.y)] = {255, 150, 0};
    }
    auto blob = [&](Point2 p, Rgb c) {
        const CellIndex cc = grid.cell_of(p);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int x = cc.x + dx, y = cc.y + dy;
                if (x >= 0 && y >= 0 && x < w && y < h)
                    img[static_cast<std::size_t>(y) * w + x] = c;
            }
    };
    for (const MapNode& n : map.nodes())
        blob(n.position, n.is_main() ? Rgb{220, 0, 0} : Rgb{235, 200, 0});

    std::string out = "P3\n# nodes " + std::to_string(map.size()) + " main " +
                      std::to_string(map.main_count()) + " support " +
                      std::to_string(map.support_count()) + " edges " +
                      std::to_string(map.edges().size()) + "\n" + std::to_string(w) +
                      " " + std::to_string(h) + "\n255\n";
    for (int y = h - 1; y >= 0; --y) {
        for (int x = 0; x < w; ++x) {
            const Rgb c = img[static_cast<std::size_t>(y) * w + x];
            out += std::to_string(c.r) + " " + std::to_string(c.g) + " " +
                   std::to_string(c.b) + (x + 1 == w ? "" : " ");
        }
        out += '\n';
    }
    return out;
}

/// Bilevel render (P1 portable bitmap): anything drawn is black.
inline std::string render_pbm(const FhtMap& map, const OccupancyGrid& grid,
                              std::span<const Pose2> trajectory = {}) {
    const int w = grid.width, h = grid.height;
    std::vector<std::uint8_t> img(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (grid.at(x, y) == Cell::Occupied) img[grid.index(x, y)] = 1;
    for (const Pose2& p : trajectory) {
        const CellIndex c = grid.cell_of(p.position());
        if (grid.in_bounds(c)) img[grid.index(c.x, c.y)] = 1;
    }
    for (const MapNode& n : map.nodes()) {
        const CellIndex c = grid.cell_of(n.position);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int x = c.x + dx, y = c.y + dy;
                if (x >= 0 && y >= 0 && x < w && y < h)
                    img[static_cast<std::size_t>(y) * w + x] = 1;
            }
    }
    std::string out = "P1\n# nodes " + std::to_string(map.size()) + " edges " +
                      std::to_string(map.edges().size()) + "\n" + std::to_string(w) +
                      " " + std::to_string(h) + "\n";
    for (int y = h - 1; y >= 0; --y) {
        for (int x = 0; x < w; ++x) {
            out += img[static_cast<std::size_t>(y) * w + x] ? '1' : '0';
            if (x + 1 < w) out += ' ';
        }
        out += '\n';
    }
    return out;
}

}  // namespace fhtmap
