// Generates the bundled benchmark worlds. Layouts are authored here in
// meters and rasterized to the ASCII world format.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "fhtmap/grid.hpp"

using namespace fhtmap;

namespace {

struct Painter {
    World world;

    Painter(double w_m, double h_m, double res, std::string name) {
        world.name = std::move(name);
        world.truth = OccupancyGrid::filled(static_cast<int>(std::lround(w_m / res)),
                                            static_cast<int>(std::lround(h_m / res)),
                                            res, Cell::Free);
        world.texture.assign(world.truth.cells.size(), 0.0f);
    }

    // paint an occupied rectangle [x0,x1) x [y0,y1) in meters with texture
    // digit (0-9) or -1 for '#'
    void block(double x0, double y0, double x1, double y1, int tex) {
        OccupancyGrid& g = world.truth;
        const int cx0 = std::max(0, static_cast<int>(std::floor(x0 / g.resolution + 1e-9)));
        const int cy0 = std::max(0, static_cast<int>(std::floor(y0 / g.resolution + 1e-9)));
        const int cx1 = std::min(g.width, static_cast<int>(std::ceil(x1 / g.resolution - 1e-9)));
        const int cy1 = std::min(g.height, static_cast<int>(std::ceil(y1 / g.resolution - 1e-9)));
        const float t = tex < 0 ? 0.5f : static_cast<float>(tex) / 9.0f;
        for (int y = cy0; y < cy1; ++y)
            for (int x = cx0; x < cx1; ++x) {
                g.set(x, y, Cell::Occupied);
                world.texture[g.index(x, y)] = t;
            }
    }

    void border(double thick) {
        const double w = world.truth.width * world.truth.resolution;
        const double h = world.truth.height * world.truth.resolution;
        block(0, 0, w, thick, 1);
        block(0, h - thick, w, h, 3);
        block(0, 0, thick, h, 4);
        block(w - thick, 0, w, h, 2);
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path);
        out << save_world(world);
        std::cout << "wrote " << path.string() << " (" << world.truth.width << "x"
                  << world.truth.height << " @ " << world.truth.resolution << ")\n";
    }
};

Painter make_museum() {
    // 16 x 12 m cluttered exhibition floor: two wings split by a central
    // doorway, a separated gallery in each wing, pillars and stands with
    // distinct surface textures.
    Painter p(16.0, 12.0, 0.025, "museum");
    p.border(0.2);

    // central dividing wall with a doorway at y in [4.8, 6.4]
    p.block(5.0, 0.2, 5.2, 4.8, 5);
    p.block(5.0, 6.4, 5.2, 11.8, 6);
    // left wing: gallery wall with door at x in [3.2, 5.0]
    p.block(0.2, 6.8, 3.2, 7.0, 7);
    // right wing: lower gallery, door at x in [8.0, 9.5]
    p.block(9.5, 3.9, 15.8, 4.1, 8);
    // top-right gallery, door at y in [7.0, 8.0]
    p.block(10.8, 8.0, 11.0, 11.8, 9);

    // exhibits
    p.block(2.2, 2.2, 2.8, 2.8, 0);      // pillar, left-lower
    p.block(7.2, 9.2, 7.8, 9.8, 1);      // pillar, central-top
    p.block(12.4, 1.2, 13.6, 1.7, 2);    // stand, right-lower
    p.block(7.4, 1.6, 7.9, 2.8, 3);      // stand near central door
    p.block(13.1, 9.4, 13.9, 10.2, 4);   // pillar, top-right gallery
    p.block(1.5, 9.3, 2.5, 9.7, 5);      // stand, left-upper
    p.block(12.6, 5.7, 13.1, 6.2, 7);    // pillar, right-middle
    p.block(3.6, 4.6, 4.1, 5.1, 9);      // pillar near central door

    // wall alcoves for asymmetry
    p.block(6.5, 11.5, 7.3, 11.8, 0);
    p.block(0.2, 5.2, 0.5, 6.0, 8);
    p.block(15.5, 6.8, 15.8, 7.6, 0);
    p.block(9.0, 0.2, 9.6, 0.6, 6);
    p.block(1.0, 0.2, 1.5, 0.5, 9);
    p.block(14.2, 11.4, 14.8, 11.8, 1);
    return p;
}

Painter make_loop() {
    // 12 x 12 m ring corridor around a split central block; the middle
    // passage is visible from both mouths but never needs traversal during
    // exploration, which makes it the canonical refinement shortcut.
    Painter p(12.0, 12.0, 0.025, "loop");
    p.border(0.2);

    // central block split by a 2 m passage at y in [5.0, 7.0]; two offset
    // baffles keep any straight corridor-to-corridor sightline blocked while
    // both chambers stay scannable from the mouths
    p.block(2.2, 2.2, 9.8, 5.0, 6);
    p.block(2.2, 7.0, 9.8, 9.8, 7);
    p.block(4.2, 5.6, 4.6, 7.0, 8);
    p.block(5.8, 5.0, 6.2, 6.4, 0);

    // asymmetric wall bumps around the ring (ICP anchors)
    p.block(3.0, 0.2, 3.6, 0.7, 9);
    p.block(8.4, 11.3, 9.0, 11.8, 0);
    p.block(0.2, 8.2, 0.7, 8.8, 2);
    p.block(11.3, 3.4, 11.8, 4.0, 5);
    p.block(5.8, 0.2, 6.2, 0.6, 4);
    p.block(11.4, 9.0, 11.8, 9.5, 8);
    // texture patches on the block faces
    p.block(2.2, 4.6, 3.4, 5.0, 1);
    p.block(8.6, 7.0, 9.8, 7.4, 3);
    // more distinct furniture around the ring
    p.block(0.2, 2.0, 0.6, 2.5, 1);
    p.block(1.5, 11.4, 2.0, 11.8, 6);
    p.block(11.4, 6.2, 11.8, 6.7, 0);
    p.block(6.8, 11.3, 7.2, 11.8, 2);
    p.block(4.2, 11.5, 4.8, 11.8, 7);
    p.block(0.2, 5.4, 0.6, 5.9, 4);
    p.block(10.2, 0.2, 10.7, 0.55, 3);
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "worlds";
    std::filesystem::create_directories(dir);
    make_museum().write(dir / "museum.world");
    make_loop().write(dir / "loop.world");
    return 0;
}
