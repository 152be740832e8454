#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "fhtmap/explore.hpp"
#include "fhtmap/frontier.hpp"
#include "support.hpp"

using namespace fhtmap;
using Catch::Approx;

namespace {

OccupancyGrid split_grid(int n, double res) {
    // left half free, right half unknown
    OccupancyGrid g = OccupancyGrid::filled(n, n, res, Cell::Unknown);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n / 2; ++x) g.set(x, y, Cell::Free);
    return g;
}

}  // namespace

TEST_CASE("frontier detection", "[exploration]") {
    SECTION("no unknown, no frontiers") {
        OccupancyGrid g = OccupancyGrid::filled(20, 20, 0.1, Cell::Free);
        CHECK(detect_frontiers(g, 1.0).empty());
    }
    SECTION("half split yields one frontier along the boundary") {
        OccupancyGrid g = split_grid(16, 0.1);
        const auto frontiers = detect_frontiers(g, 1.0, 3);
        REQUIRE(frontiers.size() == 1);
        // the boundary column of the free half, one cell per row
        CHECK(frontiers[0].cells.size() == 16);
        for (const CellIndex& c : frontiers[0].cells) CHECK(c.x == 7);
        CHECK(frontiers[0].info_gain > 0);
    }
    SECTION("union of clusters equals the brute-force frontier set") {
        Rng rng(17);
        for (int iter = 0; iter < 20; ++iter) {
            Rng wrng = rng.fork(iter);
            const World w = testsupport::random_world(wrng, 40);
            // random partial exploration: reveal a few random disks
            OccupancyGrid g = OccupancyGrid::filled(w.truth.width, w.truth.height,
                                                    w.truth.resolution, Cell::Unknown);
            for (int d = 0; d < 5; ++d) {
                const int cx = 4 + static_cast<int>(wrng.uniform_int(32));
                const int cy = 4 + static_cast<int>(wrng.uniform_int(32));
                const int r = 3 + static_cast<int>(wrng.uniform_int(6));
                for (int y = cy - r; y <= cy + r; ++y)
                    for (int x = cx - r; x <= cx + r; ++x) {
                        if (!g.in_bounds(x, y)) continue;
                        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) continue;
                        g.set(x, y, w.truth.at(x, y) == Cell::Occupied ? Cell::Occupied
                                                                       : Cell::Free);
                    }
            }
            std::set<std::pair<int, int>> brute;
            for (int y = 0; y < g.height; ++y)
                for (int x = 0; x < g.width; ++x)
                    if (is_frontier_cell(g, x, y)) brute.insert({x, y});
            std::set<std::pair<int, int>> got;
            for (const Frontier& f : detect_frontiers(g, 1.0, 1))
                for (const CellIndex& c : f.cells) got.insert({c.x, c.y});
            REQUIRE(got == brute);
        }
    }
}

TEST_CASE("frontier utility", "[exploration]") {
    SECTION("unreachable frontier scores zero") {
        OccupancyGrid g = split_grid(16, 0.1);
        // wall off the robot pocket
        for (int y = 0; y < 16; ++y) g.set(3, y, Cell::Occupied);
        Frontier f;
        f.target = {7, 8};
        f.info_gain = 10;
        f.centroid = g.center_of(f.target);
        CHECK(frontier_utility(f, {0.15, 0.85, 0.0}, g) == 0.0);
    }
    SECTION("twice the cost halves the utility") {
        OccupancyGrid g = OccupancyGrid::filled(60, 20, 0.1, Cell::Free);
        const Pose2 pose{1.05, 1.05, 0.0};
        Frontier near_f, far_f;
        near_f.info_gain = far_f.info_gain = 7;
        near_f.target = g.cell_of({3.05, 1.05});
        far_f.target = g.cell_of({5.05, 1.05});
        const double u_near = frontier_utility(near_f, pose, g);
        const double u_far = frontier_utility(far_f, pose, g);
        CHECK(u_near == Approx(2.0 * u_far).epsilon(0.01));
    }
    SECTION("argmax over frontiers matches exhaustive evaluation") {
        Rng rng(23);
        const World w = testsupport::random_world(rng, 40);
        OccupancyGrid g = OccupancyGrid::filled(w.truth.width, w.truth.height,
                                                w.truth.resolution, Cell::Unknown);
        const Pose2 start = testsupport::start_pose(w);
        const LaserScan scan = raycast_scan(w, start, 120, 2.0);
        integrate_scan_inplace(g, start, scan);
        const auto frontiers = detect_frontiers(g, 2.0, 3);
        REQUIRE(frontiers.size() >= 1);
        double best_u = -1.0;
        for (const Frontier& f : frontiers)
            best_u = std::max(best_u, frontier_utility(f, start, g));
        CHECK(best_u > 0.0);
        for (const Frontier& f : frontiers)
            CHECK(frontier_utility(f, start, g) <= best_u);
    }
}

TEST_CASE("exploration loop", "[exploration]") {
    SECTION("room smaller than the sensor disk ends after one scan") {
        const World w = testsupport::empty_room(30, 0.1, 2);  // 3m interior, range 7
        const Pose2 start = testsupport::start_pose(w);
        ExploreConfig cfg;
        cfg.n_beams = 180;
        cfg.max_range = 7.0;
        const ExploreResult res = explore(w, start, cfg, nullptr);
        CHECK(res.trajectory.size() == 1);
        CHECK(res.trajectory[0] == start);
        CHECK_FALSE(res.budget_exhausted);
        // everything visible got mapped
        CHECK(static_cast<double>(res.explored.count(Cell::Free)) /
                  static_cast<double>(w.truth.count(Cell::Free)) >
              0.99);
    }
    SECTION("start inside an obstacle is rejected") {
        const World w = testsupport::empty_room(30, 0.1, 2);
        ExploreConfig cfg;
        CHECK_THROWS_AS(explore(w, {0.05, 0.05, 0.0}, cfg, nullptr),
                        std::invalid_argument);
    }
    SECTION("coverage grows monotonically and poses stay in free space") {
        Rng rng(29);
        const World w = testsupport::random_world(rng, 56);
        ExploreConfig cfg;
        cfg.n_beams = 120;
        cfg.max_range = 3.0;
        cfg.step = 0.2;
        std::size_t last_free = 0;
        bool monotone = true;
        bool poses_free = true;
        const ExploreResult res =
            explore(w, testsupport::start_pose(w), cfg,
                    [&](const Pose2& pose, const OccupancyGrid& explored) {
                        const std::size_t f = explored.count(Cell::Free);
                        if (f < last_free) monotone = false;
                        last_free = f;
                        if (!explored.point_free(pose.position())) poses_free = false;
                    });
        CHECK(monotone);
        CHECK(poses_free);
        CHECK_FALSE(res.budget_exhausted);
        // a bordered random world is fully connected: expect near-total coverage
        CHECK(static_cast<double>(res.explored.count(Cell::Free)) /
                  static_cast<double>(w.truth.count(Cell::Free)) >
              0.95);
    }
    SECTION("identical runs are bitwise identical") {
        Rng rng(31);
        const World w = testsupport::random_world(rng, 40);
        ExploreConfig cfg;
        cfg.n_beams = 90;
        cfg.max_range = 3.0;
        const Pose2 start = testsupport::start_pose(w);
        const ExploreResult a = explore(w, start, cfg, nullptr);
        const ExploreResult b = explore(w, start, cfg, nullptr);
        REQUIRE(a.trajectory.size() == b.trajectory.size());
        for (std::size_t i = 0; i < a.trajectory.size(); ++i)
            CHECK(a.trajectory[i] == b.trajectory[i]);
        CHECK(a.explored == b.explored);
    }
}
