#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "fhtmap/descriptor.hpp"
#include "fhtmap/geometry.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/motion.hpp"
#include "fhtmap/raycast.hpp"
#include "support.hpp"

using namespace fhtmap;
using Catch::Approx;

TEST_CASE("angle wrapping lands in (-pi, pi]", "[world_sim]") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(kPi) == Approx(kPi));
    CHECK(wrap_angle(-kPi) == Approx(kPi));
    CHECK(wrap_angle(3.0 * kPi) == Approx(kPi));
    CHECK(wrap_angle(deg_to_rad(362.0)) == Approx(deg_to_rad(2.0)));
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(-50.0, 50.0);
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        CHECK(std::abs(std::sin(w) - std::sin(a)) < 1e-9);
        CHECK(std::abs(std::cos(w) - std::cos(a)) < 1e-9);
    }
}

TEST_CASE("transform compose/inverse round to identity", "[world_sim]") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Transform2 t = make_transform(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                            rng.uniform(-4, 4));
        const Transform2 id = t * inverse(t);
        CHECK(id.translation.norm() < 1e-9);
        CHECK(std::abs(wrap_angle(id.rotation)) < 1e-9);

        const Transform2 a = make_transform(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                            rng.uniform(-4, 4));
        const Transform2 b = make_transform(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                            rng.uniform(-4, 4));
        const Transform2 left = (t * a) * b;
        const Transform2 right = t * (a * b);
        CHECK((left.translation - right.translation).norm() < 1e-9);
        CHECK(std::abs(wrap_angle(left.rotation - right.rotation)) < 1e-9);
    }
}

TEST_CASE("world files parse and save bijectively", "[world_sim]") {
    SECTION("all free") {
        const World w = load_world("world 3 3 0.1\n...\n...\n...\n");
        CHECK(w.truth.width == 3);
        CHECK(w.truth.count(Cell::Free) == 9);
        CHECK(w.truth.count(Cell::Unknown) == 0);
    }
    SECTION("border ring") {
        const World w = load_world("world 3 3 0.1\n###\n#.#\n###\n");
        CHECK(w.truth.count(Cell::Occupied) == 8);
        CHECK(w.truth.at(1, 1) == Cell::Free);
        CHECK(w.texture_at({0, 0}) == 0.5f);
    }
    SECTION("textures and row order") {
        const World w = load_world("world 2 2 0.1\n9.\n.0\n");
        // first text row is the top (y = 1)
        CHECK(w.truth.at(0, 1) == Cell::Occupied);
        CHECK(w.texture_at({0, 1}) == 1.0f);
        CHECK(w.truth.at(1, 0) == Cell::Occupied);
        CHECK(w.texture_at({1, 0}) == 0.0f);
    }
    SECTION("errors name the line") {
        CHECK_THROWS_AS(load_world(""), ParseError);
        CHECK_THROWS_AS(load_world("hello 2 2 0.1\n..\n..\n"), ParseError);
        CHECK_THROWS_WITH(load_world("world 3 2 0.1\n...\n..\n"),
                          Catch::Matchers::ContainsSubstring("line 3"));
        CHECK_THROWS_WITH(load_world("world 2 2 0.1\n.x\n..\n"),
                          Catch::Matchers::ContainsSubstring("column 2"));
        CHECK_THROWS_AS(load_world("world 2 2 0.1\n..\n"), ParseError);
        CHECK_THROWS_AS(load_world("world 2 2 -1\n..\n..\n"), ParseError);
    }
    SECTION("random round trip") {
        Rng rng(3);
        for (int iter = 0; iter < 25; ++iter) {
            std::string text = "world 8 6 0.25\n";
            const char alphabet[] = ".#0123456789";
            for (int r = 0; r < 6; ++r) {
                for (int c = 0; c < 8; ++c)
                    text += alphabet[rng.uniform_int(sizeof(alphabet) - 1)];
                text += '\n';
            }
            const World w = load_world(text);
            CHECK(save_world(w) == text);
            const World w2 = load_world(save_world(w));
            CHECK(w2.truth == w.truth);
            CHECK(w2.texture == w.texture);
        }
    }
}

TEST_CASE("raycasting hits walls at the right distance", "[world_sim]") {
    // 10m x 10m room, walls 0.2 thick at the border
    const World w = testsupport::empty_room(96, 0.1, 2);
    const Point2 c = testsupport::room_center(w);

    SECTION("open space gives no return") {
        const World big = testsupport::empty_room(196, 0.1, 2);
        const Pose2 mid{testsupport::room_center(big).x, testsupport::room_center(big).y, 0.0};
        const LaserScan scan = raycast_scan(big, mid, 90, 7.0);
        for (std::size_t i = 0; i < scan.size(); ++i) CHECK_FALSE(scan.has_return(i));
    }
    SECTION("beam normal to a flat wall") {
        // wall interior face at x = 9.8; pose 2m away, beam along +x
        const Pose2 pose{7.8, c.y, 0.0};
        const LaserScan scan = raycast_scan(w, pose, 4, 7.0);
        REQUIRE(scan.has_return(0));
        CHECK(scan.ranges[0] == Approx(2.0).margin(w.truth.resolution));
    }
    SECTION("deterministic") {
        const Pose2 pose{c.x + 0.37, c.y - 1.21, 0.83};
        const LaserScan a = raycast_scan(w, pose, 360, 7.0);
        const LaserScan b = raycast_scan(w, pose, 360, 7.0);
        CHECK(a == b);
    }
    SECTION("pose inside obstacle") {
        CHECK_THROWS_WITH(raycast_scan(w, {0.05, 0.05, 0}, 8, 5.0),
                          Catch::Matchers::ContainsSubstring("pose inside obstacle"));
    }
    SECTION("ranges shrink as the wall moves closer") {
        double prev = std::numeric_limits<double>::infinity();
        for (double wall_x = 8.0; wall_x >= 5.0; wall_x -= 0.7) {
            World w2 = w;
            const int cx = static_cast<int>(wall_x / w2.truth.resolution);
            for (int y = 0; y < w2.truth.height; ++y) w2.truth.set(cx, y, Cell::Occupied);
            const float r = cast_single_ray(w2.truth, c, 0.0, 20.0);
            REQUIRE(r > 0.0f);
            CHECK(r <= prev);
            prev = r;
        }
    }
}

TEST_CASE("scan integration carves free space", "[world_sim]") {
    const World w = testsupport::empty_room(96, 0.1, 2);
    const Point2 c = testsupport::room_center(w);
    const Pose2 pose{c.x, c.y, 0.0};

    SECTION("single scan frees a disk") {
        const LaserScan scan = raycast_scan(w, pose, 360, 3.0);
        OccupancyGrid explored = OccupancyGrid::filled(
            w.truth.width, w.truth.height, w.truth.resolution, Cell::Unknown);
        integrate_scan_inplace(explored, pose, scan);
        // all cells well inside the sensing disk are known free
        const std::size_t freed = explored.count(Cell::Free);
        CHECK(freed > 2500);  // pi * 30^2 ~ 2827 cells, minus discretization
        CHECK(explored.at(explored.cell_of(c)) == Cell::Free);
        CHECK(explored.at(explored.cell_of({c.x + 2.5, c.y})) == Cell::Free);
        CHECK(explored.at(explored.cell_of({c.x + 3.5, c.y})) == Cell::Unknown);
    }
    SECTION("idempotent") {
        const LaserScan scan = raycast_scan(w, pose, 180, 7.0);
        OccupancyGrid once = OccupancyGrid::filled(
            w.truth.width, w.truth.height, w.truth.resolution, Cell::Unknown);
        integrate_scan_inplace(once, pose, scan);
        OccupancyGrid twice = once;
        integrate_scan_inplace(twice, pose, scan);
        CHECK(once == twice);
    }
    SECTION("explored free is a subset of truth free over random walks") {
        Rng rng(21);
        for (int iter = 0; iter < 6; ++iter) {
            Rng wrng = rng.fork(iter);
            const World world = testsupport::random_world(wrng);
            OccupancyGrid explored = OccupancyGrid::filled(
                world.truth.width, world.truth.height, world.truth.resolution,
                Cell::Unknown);
            Pose2 p = testsupport::start_pose(world);
            for (int s = 0; s < 40; ++s) {
                const LaserScan scan = raycast_scan(world, p, 120, 5.0);
                integrate_scan_inplace(explored, p, scan);
                // random small move within free space
                for (int attempt = 0; attempt < 20; ++attempt) {
                    const Pose2 next = {p.x + wrng.uniform(-0.3, 0.3),
                                        p.y + wrng.uniform(-0.3, 0.3),
                                        wrng.uniform(-kPi, kPi)};
                    if (world.truth.point_free(next.position())) {
                        p = next;
                        break;
                    }
                }
            }
            for (std::size_t i = 0; i < explored.cells.size(); ++i)
                if (explored.cells[i] == Cell::Free)
                    REQUIRE(world.truth.cells[i] == Cell::Free);
        }
    }
}

namespace {

// exact slab-clip test: does segment ab pass through cell (x, y)?
bool segment_hits_cell(const OccupancyGrid& g, Point2 a, Point2 b, int x, int y) {
    const double lox = g.origin.x + x * g.resolution;
    const double loy = g.origin.y + y * g.resolution;
    const double hix = lox + g.resolution;
    const double hiy = loy + g.resolution;
    const double dx = b.x - a.x, dy = b.y - a.y;
    double t0 = 0.0, t1 = 1.0;
    if (dx == 0.0) {
        if (a.x < lox || a.x >= hix) return false;
    } else {
        double ta = (lox - a.x) / dx, tb = (hix - a.x) / dx;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (dy == 0.0) {
        if (a.y < loy || a.y >= hiy) return false;
    } else {
        double ta = (loy - a.y) / dy, tb = (hiy - a.y) / dy;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    return t0 < t1;
}

// independent full-grid oracle: exact segment/cell clipping + Chebyshev dilation
bool segment_in_free_oracle(const OccupancyGrid& g, Point2 a, Point2 b,
                            double clearance) {
    const int r = clearance <= 0.0
                      ? 0
                      : static_cast<int>(std::ceil(clearance / g.resolution - 1e-9));
    std::set<std::pair<int, int>> covered;
    if (a == b) {
        const CellIndex c = g.cell_of(a);
        covered.insert({c.x, c.y});
    } else {
        for (int y = 0; y < g.height; ++y)
            for (int x = 0; x < g.width; ++x)
                if (segment_hits_cell(g, a, b, x, y)) covered.insert({x, y});
    }
    for (const auto& [x, y] : covered)
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (!g.in_bounds(nx, ny) || g.at(nx, ny) != Cell::Free) return false;
            }
    return true;
}

}  // namespace

TEST_CASE("segment free-space tests", "[world_sim]") {
    const World w = testsupport::empty_room(60, 0.1, 2);

    SECTION("degenerate point in free space") {
        CHECK(segment_in_free(w.truth, {3.0, 3.0}, {3.0, 3.0}, 0.0));
        CHECK_FALSE(segment_in_free(w.truth, {0.05, 0.05}, {0.05, 0.05}, 0.0));
    }
    SECTION("crossing a wall fails") {
        World walled = w;
        for (int y = 2; y < walled.truth.height - 2; ++y)
            walled.truth.set(30, y, Cell::Occupied);
        CHECK_FALSE(segment_in_free(walled.truth, {1.0, 3.0}, {5.0, 3.1}, 0.0));
        CHECK(segment_in_free(w.truth, {1.0, 3.0}, {5.0, 3.1}, 0.0));
    }
    SECTION("agreement with the supersampling oracle") {
        Rng rng(5);
        int checked = 0;
        for (int iter = 0; iter < 40; ++iter) {
            Rng wrng = rng.fork(iter);
            const World world = testsupport::random_world(wrng, 40);
            const double hi = 40 * 0.1;
            for (int q = 0; q < 25; ++q) {
                const Point2 a{wrng.uniform(0.3, hi - 0.3), wrng.uniform(0.3, hi - 0.3)};
                const Point2 b{wrng.uniform(0.3, hi - 0.3), wrng.uniform(0.3, hi - 0.3)};
                const double clearance = wrng.uniform_int(3) * 0.1;
                const bool got = segment_in_free(world.truth, a, b, clearance);
                const bool want = segment_in_free_oracle(world.truth, a, b, clearance);
                REQUIRE(got == want);
                ++checked;
            }
        }
        CHECK(checked == 1000);
    }
    SECTION("symmetric in endpoints") {
        Rng rng(9);
        const World world = testsupport::random_world(rng, 40);
        for (int q = 0; q < 200; ++q) {
            const Point2 a{rng.uniform(0.3, 3.7), rng.uniform(0.3, 3.7)};
            const Point2 b{rng.uniform(0.3, 3.7), rng.uniform(0.3, 3.7)};
            CHECK(segment_in_free(world.truth, a, b, 0.1) ==
                  segment_in_free(world.truth, b, a, 0.1));
        }
    }
}

TEST_CASE("synthetic descriptor properties", "[world_sim]") {
    const World w = testsupport::bundled("museum").world;
    const Point2 pos{8.0, 6.0};

    SECTION("unit norm") {
        Rng rng(13);
        for (int i = 0; i < 10; ++i) {
            Point2 p{rng.uniform(1.0, 15.0), rng.uniform(1.0, 11.0)};
            if (!w.truth.point_free(p)) continue;
            const Descriptor d = sense_descriptor(w, p, 7.0, 64);
            double sq = 0.0;
            for (float v : d.values) sq += static_cast<double>(v) * v;
            CHECK(std::sqrt(sq) == Approx(1.0).margin(1e-6));
        }
    }
    SECTION("heading independence is bitwise") {
        const Descriptor d = sense_descriptor(w, pos, 7.0, 64);
        // a descriptor is a function of position only; sensing again at the
        // same spot gives the identical vector regardless of robot heading
        const Descriptor d2 = sense_descriptor(w, pos, 7.0, 64);
        CHECK(d.values == d2.values);
    }
    SECTION("position in obstacle rejected") {
        CHECK_THROWS_AS(sense_descriptor(w, {0.05, 0.05}, 7.0, 64),
                        std::invalid_argument);
    }
    SECTION("circular wall concentrates the range histogram") {
        // ring of radius 3.25 around the center of a 8m room; with D=32 the
        // 16 range bins are 0.5m wide, so every hit lands in bin 6
        World ring = testsupport::empty_room(116, 0.1, 2);
        const Point2 c = testsupport::room_center(ring);
        for (int y = 0; y < ring.truth.height; ++y)
            for (int x = 0; x < ring.truth.width; ++x) {
                const double d = distance(ring.truth.center_of({x, y}), c);
                if (d >= 3.25 && d <= 3.55) {
                    ring.truth.set(x, y, Cell::Occupied);
                    ring.texture[ring.truth.index(x, y)] = 4.0f / 9.0f;
                }
            }
        const Descriptor d = sense_descriptor(ring, c, 8.0, 32);
        int nonzero_range_bins = 0;
        for (int i = 0; i < 16; ++i)
            if (d.values[static_cast<std::size_t>(i)] > 1e-4) ++nonzero_range_bins;
        CHECK(nonzero_range_bins == 1);
        int nonzero_tex_bins = 0;
        for (int i = 16; i < 32; ++i)
            if (d.values[static_cast<std::size_t>(i)] > 1e-4) ++nonzero_tex_bins;
        CHECK(nonzero_tex_bins == 1);
    }
}

TEST_CASE("polyline motion sampling", "[world_sim]") {
    const World w = testsupport::empty_room(96, 0.1, 2);

    SECTION("single point") {
        const Point2 p{5.0, 5.0};
        const auto poses = move_along(w, std::vector<Point2>{p}, 0.25);
        REQUIRE(poses.size() == 1);
        CHECK(poses[0].x == 5.0);
        CHECK(poses[0].theta == 0.0);
    }
    SECTION("straight meter at quarter step") {
        const std::vector<Point2> path{{3.0, 3.0}, {4.0, 3.0}};
        const auto poses = move_along(w, path, 0.25);
        REQUIRE(poses.size() == 5);
        CHECK(poses.back().x == Approx(4.0));
        for (const Pose2& p : poses) CHECK(p.theta == Approx(0.0));
    }
    SECTION("arc length matches polyline length") {
        Rng rng(31);
        for (int iter = 0; iter < 30; ++iter) {
            std::vector<Point2> path;
            for (int i = 0; i < 4; ++i)
                path.push_back({rng.uniform(1.0, 9.0), rng.uniform(1.0, 9.0)});
            const double step = rng.uniform(0.1, 0.5);
            const auto poses = move_along(w, path, step);
            CHECK(trajectory_length(poses) ==
                  Approx(polyline_length(path)).margin(step));
            CHECK(poses.back().x == Approx(path.back().x));
            CHECK(poses.back().y == Approx(path.back().y));
        }
    }
    SECTION("leaving free space reports the segment") {
        const std::vector<Point2> path{{3.0, 3.0}, {-1.0, 3.0}};
        CHECK_THROWS_WITH(move_along(w, path, 0.25),
                          Catch::Matchers::ContainsSubstring("segment 0"));
    }
}
