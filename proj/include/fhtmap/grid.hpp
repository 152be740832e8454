#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fhtmap/common.hpp"
#include "fhtmap/geometry.hpp"

namespace fhtmap {

enum class Cell : std::uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

struct CellIndex {
    int x = 0;
    int y = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Dense row-major occupancy grid. Cell (0,0) sits at `origin`; world
/// coordinates grow with x to the right and y upward.
struct OccupancyGrid {
    int width = 0;
    int height = 0;
    double resolution = 0.05;
    Pose2 origin{};
    std::vector<Cell> cells;

    static OccupancyGrid filled(int w, int h, double res, Cell value) {
        OccupancyGrid g;
        g.width = w;
        g.height = h;
        g.resolution = res;
        g.cells.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), value);
        return g;
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }
    bool in_bounds(CellIndex c) const { return in_bounds(c.x, c.y); }

    Cell at(int x, int y) const { return cells[index(x, y)]; }
    Cell at(CellIndex c) const { return at(c.x, c.y); }
    void set(int x, int y, Cell v) { cells[index(x, y)] = v; }
    void set(CellIndex c, Cell v) { set(c.x, c.y, v); }

    CellIndex cell_of(Point2 p) const {
        return {static_cast<int>(std::floor((p.x - origin.x) / resolution)),
                static_cast<int>(std::floor((p.y - origin.y) / resolution))};
    }
    Point2 center_of(CellIndex c) const {
        return {origin.x + (c.x + 0.5) * resolution,
                origin.y + (c.y + 0.5) * resolution};
    }
    bool is_free(CellIndex c) const { return in_bounds(c) && at(c) == Cell::Free; }
    bool point_free(Point2 p) const { return is_free(cell_of(p)); }

    std::size_t count(Cell v) const {
        std::size_t n = 0;
        for (Cell c : cells)
            if (c == v) ++n;
        return n;
    }

    friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;
};

/// Ground-truth environment: an occupancy grid with no Unknown cells plus a
/// per-cell surface texture in [0,1] for occupied cells.
struct World {
    OccupancyGrid truth;
    std::vector<float> texture;  // parallel to truth.cells, 0 for non-occupied
    std::string name;

    float texture_at(CellIndex c) const { return texture[truth.index(c.x, c.y)]; }
};

namespace detail {

inline double parse_double_strict(std::string_view tok, int line, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError("world line " + std::to_string(line) + ": bad " + what +
                         " '" + std::string(tok) + "'");
    return v;
}

}  // namespace detail

/// Parse the ASCII world format:
///   world <width> <height> <resolution_m>
///   <height> rows of <width> chars; first text row is the top of the map.
///   '.' Free, '#' Occupied texture 0.5, '0'-'9' Occupied texture digit/9.
inline World load_world(std::string_view text, std::string name = "") {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size()) lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError("world file is empty");

    // header
    std::string_view header = lines[0];
    std::vector<std::string_view> tok;
    std::size_t i = 0;
    while (i < header.size()) {
        while (i < header.size() && header[i] == ' ') ++i;
        std::size_t j = i;
        while (j < header.size() && header[j] != ' ') ++j;
        if (j > i) tok.push_back(header.substr(i, j - i));
        i = j;
    }
    if (tok.size() != 4 || tok[0] != "world")
        throw ParseError("world line 1: expected header 'world <w> <h> <res>'");
    const int w = static_cast<int>(detail::parse_double_strict(tok[1], 1, "width"));
    const int h = static_cast<int>(detail::parse_double_strict(tok[2], 1, "height"));
    const double res = detail::parse_double_strict(tok[3], 1, "resolution");
    if (w < 1 || h < 1) throw ParseError("world line 1: width/height must be >= 1");
    if (!(res > 0.0)) throw ParseError("world line 1: resolution must be > 0");
    if (static_cast<int>(lines.size()) - 1 != h)
        throw ParseError("world: expected " + std::to_string(h) + " rows, got " +
                         std::to_string(lines.size() - 1));

    World world;
    world.name = std::move(name);
    world.truth = OccupancyGrid::filled(w, h, res, Cell::Free);
    world.texture.assign(world.truth.cells.size(), 0.0f);

    for (int row = 0; row < h; ++row) {
        const std::string_view line = lines[static_cast<std::size_t>(row) + 1];
        const int line_no = row + 2;
        if (static_cast<int>(line.size()) != w)
            throw ParseError("world line " + std::to_string(line_no) + ": row width " +
                             std::to_string(line.size()) + " != " + std::to_string(w));
        const int y = h - 1 - row;  // first text row is the top
        for (int x = 0; x < w; ++x) {
            const char c = line[static_cast<std::size_t>(x)];
            const std::size_t idx = world.truth.index(x, y);
            if (c == '.') {
                world.truth.cells[idx] = Cell::Free;
            } else if (c == '#') {
                world.truth.cells[idx] = Cell::Occupied;
                world.texture[idx] = 0.5f;
            } else if (c >= '0' && c <= '9') {
                world.truth.cells[idx] = Cell::Occupied;
                world.texture[idx] = static_cast<float>(c - '0') / 9.0f;
            } else {
                throw ParseError("world line " + std::to_string(line_no) + " column " +
                                 std::to_string(x + 1) + ": unknown character '" +
                                 std::string(1, c) + "'");
            }
        }
    }
    return world;
}

inline std::string save_world(const World& world) {
    const OccupancyGrid& g = world.truth;
    std::string out = "world " + std::to_string(g.width) + " " + std::to_string(g.height);
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), g.resolution);
    out += " ";
    out.append(buf, p);
    out += "\n";
    for (int row = 0; row < g.height; ++row) {
        const int y = g.height - 1 - row;
        for (int x = 0; x < g.width; ++x) {
            if (g.at(x, y) != Cell::Occupied) {
                out += '.';
                continue;
            }
            const float t = world.texture[g.index(x, y)];
            if (t == 0.5f) {
                out += '#';
            } else {
                out += static_cast<char>('0' + static_cast<int>(std::lround(t * 9.0f)));
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace fhtmap
