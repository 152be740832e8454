#pragma once

// Shared fixtures for the test suites: canned worlds, random world
// generation, and cached builds of the bundled benchmark worlds.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "fhtmap/builder.hpp"
#include "fhtmap/config.hpp"
#include "fhtmap/descriptor.hpp"
#include "fhtmap/experiment.hpp"
#include "fhtmap/explore.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/rng.hpp"

namespace testsupport {

using namespace fhtmap;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string worlds_dir() {
#ifdef FHTMAP_WORLDS_DIR
    return FHTMAP_WORLDS_DIR;
#else
    return "worlds";
#endif
}

/// Empty square room with a '#' border, given interior size in cells.
inline World empty_room(int interior, double res = 0.1, int border = 2) {
    const int n = interior + 2 * border;
    World w;
    w.name = "room";
    w.truth = OccupancyGrid::filled(n, n, res, Cell::Free);
    w.texture.assign(w.truth.cells.size(), 0.0f);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (x < border || y < border || x >= n - border || y >= n - border) {
                w.truth.set(x, y, Cell::Occupied);
                w.texture[w.truth.index(x, y)] = 0.5f;
            }
    return w;
}

inline Point2 room_center(const World& w) {
    return {0.5 * w.truth.width * w.truth.resolution,
            0.5 * w.truth.height * w.truth.resolution};
}

/// Bordered world with a few random rectangular obstacles placed on a
/// coarse lattice so corridors stay wide enough for the navigable mask.
inline World random_world(Rng& rng, int interior = 56, double res = 0.1) {
    World w = empty_room(interior, res);
    const int border = 2;
    const int n_obst = 2 + static_cast<int>(rng.uniform_int(4));
    for (int i = 0; i < n_obst; ++i) {
        // lattice pitch 14 cells, obstacle up to 7x7 -> gaps >= 7 cells
        const int lat = 14;
        const int slots = (interior - 8) / lat;
        if (slots <= 0) break;
        const int sx = border + 5 + lat * static_cast<int>(rng.uniform_int(slots));
        const int sy = border + 5 + lat * static_cast<int>(rng.uniform_int(slots));
        const int bw = 3 + static_cast<int>(rng.uniform_int(5));
        const int bh = 3 + static_cast<int>(rng.uniform_int(5));
        const float tex = static_cast<float>(rng.uniform_int(10)) / 9.0f;
        for (int y = sy; y < std::min(sy + bh, w.truth.height - border); ++y)
            for (int x = sx; x < std::min(sx + bw, w.truth.width - border); ++x) {
                w.truth.set(x, y, Cell::Occupied);
                w.texture[w.truth.index(x, y)] = tex;
            }
    }
    return w;
}

/// Start pose for a generated world: navigable cell nearest the center.
inline Pose2 start_pose(const World& w, double clearance = -1.0) {
    const double c = clearance >= 0.0 ? clearance : w.truth.resolution;
    const int cells = static_cast<int>(std::ceil(c / w.truth.resolution - 1e-9));
    const GridMask nav = navigable_mask(w.truth, cells + 1);
    const Point2 center = room_center(w);
    CellIndex best{-1, -1};
    double best_d = std::numeric_limits<double>::infinity();
    for (int y = 0; y < w.truth.height; ++y)
        for (int x = 0; x < w.truth.width; ++x) {
            if (!nav.at(x, y)) continue;
            const double d = distance(w.truth.center_of({x, y}), center);
            if (d < best_d) {
                best_d = d;
                best = {x, y};
            }
        }
    const Point2 p = w.truth.center_of(best);
    return {p.x, p.y, 0.0};
}

/// Hand-built main node with a dummy payload and a pinned entropy value.
inline MapNode make_main_node(Point2 pos, double entropy_value) {
    MapNode n;
    n.kind = NodeKind::Main;
    n.position = pos;
    Descriptor d;
    d.values.assign(8, 0.35355339059327f);  // unit 8-vector
    n.descriptor = std::move(d);
    LaserScan s;
    s.max_range = 5.0;
    s.angles = uniform_beam_angles(8);
    s.ranges.assign(8, 1.0f);
    n.scan = std::move(s);
    n.entropy = entropy_value;
    return n;
}

/// Descriptor whose component histogram occupies exactly `bins` of the 10
/// entropy bins equally: entropy = ln(bins).
inline Descriptor descriptor_with_bins(int bins, int dim = 20) {
    Descriptor d;
    for (int i = 0; i < dim; ++i) {
        const int b = i % bins;
        d.values.push_back(0.05f + 0.1f * static_cast<float>(b));
    }
    return d;
}

/// Fast test-scale experiment config (small descriptor, coarse scan).
inline ExperimentConfig test_config() {
    ExperimentConfig cfg;
    cfg.descriptor_dim = 32;
    cfg.n_beams = 90;
    cfg.max_range = 4.0;
    cfg.sigma_c = 1.8;
    cfg.gamma1 = 0.6;
    cfg.gamma2 = 0.3;
    cfg.th_s = 2.0;
    cfg.step = 0.2;
    return cfg;
}

struct BundledWorld {
    World world;
    ExperimentConfig config;
};

/// Bundled world + its shipped config, loaded once.
inline const BundledWorld& bundled(const std::string& name) {
    static std::map<std::string, BundledWorld> cache;
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    BundledWorld bw;
    bw.world = load_world(read_file(worlds_dir() + "/" + name + ".world"), name);
    bw.config = ExperimentConfig{};
#ifdef FHTMAP_CONFIGS_DIR
    const std::string cfg_path = std::string(FHTMAP_CONFIGS_DIR) + "/" + name + ".cfg";
#else
    const std::string cfg_path = "configs/" + name + ".cfg";
#endif
    if (std::filesystem::exists(cfg_path))
        apply_config_text(read_file(cfg_path), bw.config);
    return cache.emplace(name, std::move(bw)).first->second;
}

/// Museum world built once with the shipped config; reused across tests.
inline const ExperimentArtifacts& museum_artifacts() {
    static const ExperimentArtifacts art = [] {
        const BundledWorld& bw = bundled("museum");
        return build_map_for(bw.world, bw.config);
    }();
    return art;
}

}  // namespace testsupport
