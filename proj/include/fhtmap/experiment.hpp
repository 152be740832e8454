#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fhtmap/builder.hpp"
#include "fhtmap/descriptor.hpp"
#include "fhtmap/explore.hpp"
#include "fhtmap/grid.hpp"
#include "fhtmap/metrics.hpp"
#include "fhtmap/planning.hpp"
#include "fhtmap/relocalize.hpp"
#include "fhtmap/rng.hpp"
#include "fhtmap/serialize.hpp"

namespace fhtmap {

inline const char* mode_name(MapMode m) {
    switch (m) {
        case MapMode::Fht: return "fht";
        case MapMode::MainOnly: return "main_only";
        case MapMode::FeatureOnly: return "feature_only";
    }
    return "?";
}

inline MapMode mode_from_name(const std::string& s) {
    if (s == "fht") return MapMode::Fht;
    if (s == "main_only") return MapMode::MainOnly;
    if (s == "feature_only") return MapMode::FeatureOnly;
    throw ConfigError("unknown mode '" + s + "'");
}

/// Every tunable of the pipeline, exposed through the config file.
struct ExperimentConfig {
    std::string world_path;
    std::uint64_t seed = 1;

    // construction
    double sigma_c = 2.65;
    double gamma1 = 0.06;
    double gamma2 = 0.03;
    double th_s = 3.0;
    double rho = 1.5;
    double max_half_extent = 7.0;
    int n_bins = 10;
    int descriptor_dim = 512;

    // sensing / exploration
    int n_beams = 360;
    double max_range = 7.0;
    double step = 0.25;
    int replan_every = 10;
    long budget = 200000;
    double r_info = -1.0;
    int min_frontier_cells = 3;
    double clearance = -1.0;  // -1: one grid cell

    // relocalization
    double th_match = 0.85;
    int n_seeds = 36;
    double rms_accept = 0.2;
    int min_estimations = 3;
    double est_min_travel = 1.0;
    double max_walk = 80.0;
    double min_offset = 2.0;   // hidden-offset translation magnitude bounds
    double max_offset = 8.0;

    // planning
    double k = 1000.0;
    double min_pair_separation = 3.0;

    MapMode mode = MapMode::Fht;
    int reloc_trials = 8;
    int plan_pairs = 6;

    // exploration start; NaN means "navigable cell nearest the world center"
    double start_x = std::numeric_limits<double>::quiet_NaN();
    double start_y = std::numeric_limits<double>::quiet_NaN();

    void validate() const {
        if (!(gamma2 < gamma1)) throw ConfigError("config: gamma2 must be < gamma1");
        if (!(sigma_c > 0.0)) throw ConfigError("config: sigma_c must be > 0");
        if (reloc_trials < 0 || plan_pairs < 0)
            throw ConfigError("config: trial counts must be >= 0");
    }

    double effective_clearance(double resolution) const {
        return clearance >= 0.0 ? clearance : resolution;
    }
};

struct RelocTrialRow {
    int trial = 0;
    bool converged = false;
    bool success = false;
    double eps_t = 0.0;          // ratio
    double eps_theta_deg = 0.0;
    double l_reloca = 0.0;       // walk length to first success (censored at walk end)
    bool l_reloca_censored = false;
    double trail_length = 0.0;   // walked distance at convergence
    bool failed = false;         // trial aborted by an error
    std::string error;
};

struct PlanTrialRow {
    int trial = 0;
    double s_topo = 0.0;
    double s_grid = 0.0;
    double c_path = 0.0;
    bool discarded = false;
    std::string error;
};

struct MetricsReport {
    std::string world;
    std::string mode;
    std::uint64_t seed = 0;
    std::size_t storage_map_bytes = 0;
    std::size_t storage_grid_bytes = 0;
    int nodes_main = 0;
    int nodes_support = 0;
    int edges = 0;
    double explored_free_coverage = 0.0;

    double success_rate = 0.0;
    double eps_t_mean = 0.0, eps_t_std = 0.0;
    double eps_theta_mean = 0.0, eps_theta_std = 0.0;  // degrees
    double l_reloca_mean = 0.0, l_reloca_std = 0.0;
    double c_path_mean = 0.0, c_path_max = 0.0;
    std::vector<RelocTrialRow> reloc_rows;
    std::vector<PlanTrialRow> plan_rows;
    bool any_failed = false;
};

struct ExperimentArtifacts {
    FhtMap map;
    OccupancyGrid explored;
    std::vector<Pose2> trajectory;
    MetricsReport report;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

inline CellIndex default_start_cell(const OccupancyGrid& truth, const GridMask& nav) {
    // navigable cell nearest the world center, ties row-major
    const Point2 center{truth.origin.x + 0.5 * truth.width * truth.resolution,
                        truth.origin.y + 0.5 * truth.height * truth.resolution};
    CellIndex best{-1, -1};
    double best_d = std::numeric_limits<double>::infinity();
    for (int y = 0; y < truth.height; ++y)
        for (int x = 0; x < truth.width; ++x) {
            if (!nav.at(x, y)) continue;
            const double d = distance(truth.center_of({x, y}), center);
            if (d < best_d - 1e-12) {
                best_d = d;
                best = {x, y};
            }
        }
    if (best.x < 0) throw std::runtime_error("world has no navigable free space");
    return best;
}

}  // namespace detail

/// Explore the world once and build the map in the configured mode.
inline ExperimentArtifacts build_map_for(const World& world, const ExperimentConfig& cfg) {
    ExperimentArtifacts art;
    const double clearance = cfg.effective_clearance(world.truth.resolution);
    const int clear_cells = static_cast<int>(
        std::ceil(clearance / world.truth.resolution - 1e-9));
    const GridMask nav = navigable_mask(world.truth, clear_cells + 1);
    CellIndex start_cell;
    if (std::isnan(cfg.start_x) || std::isnan(cfg.start_y)) {
        start_cell = detail::default_start_cell(world.truth, nav);
    } else {
        const auto snapped =
            nearest_passable(nav, world.truth.cell_of({cfg.start_x, cfg.start_y}), 64);
        if (!snapped) throw ConfigError("config: start position is not navigable");
        start_cell = *snapped;
    }
    const Point2 start_pt = world.truth.center_of(start_cell);

    BuilderConfig bc;
    bc.sigma_c = cfg.sigma_c;
    bc.gamma1 = cfg.gamma1;
    bc.gamma2 = cfg.gamma2;
    bc.th_s = cfg.th_s;
    bc.clearance = clearance;
    bc.rho = cfg.rho;
    bc.max_half_extent = cfg.max_half_extent;
    bc.n_bins = cfg.n_bins;
    bc.mode = cfg.mode;
    Builder builder(bc, cfg.descriptor_dim, world.truth.resolution);
    builder.set_sensor_hook([&](Point2 p) {
        Descriptor d = sense_descriptor(world, p, cfg.max_range, cfg.descriptor_dim);
        LaserScan s = raycast_scan(world, {p.x, p.y, 0.0}, cfg.n_beams, cfg.max_range);
        quantize_ranges_mm(s);
        return std::make_pair(std::move(d), std::move(s));
    });

    ExploreConfig ec;
    ec.n_beams = cfg.n_beams;
    ec.max_range = cfg.max_range;
    ec.step = cfg.step;
    ec.replan_every = cfg.replan_every;
    ec.budget = cfg.budget;
    ec.r_info = cfg.r_info;
    ec.min_frontier_cells = cfg.min_frontier_cells;
    ec.clearance = clearance;
    ec.seed = cfg.seed;

    ExploreResult er = explore(world, {start_pt.x, start_pt.y, 0.0}, ec,
                               [&](const Pose2& pose, const OccupancyGrid& explored) {
                                   const Descriptor d = sense_descriptor(
                                       world, pose.position(), cfg.max_range,
                                       cfg.descriptor_dim);
                                   LaserScan scan_h0 =
                                       raycast_scan(world, {pose.x, pose.y, 0.0},
                                                    cfg.n_beams, cfg.max_range);
                                   quantize_ranges_mm(scan_h0);
                                   builder.build_step(pose, d, scan_h0, explored);
                               });
    builder.finish(er.explored);

    art.map = builder.map();
    art.explored = std::move(er.explored);
    art.trajectory = std::move(er.trajectory);
    return art;
}

/// Relocalization trials with hidden random offsets and seeded walks.
inline void run_reloc_trials(const World& world, const ExperimentConfig& cfg,
                             ExperimentArtifacts& art) {
    const double clearance = cfg.effective_clearance(world.truth.resolution);
    MetricsReport& rep = art.report;
    std::vector<double> eps_t, eps_th, l_rel;
    int successes = 0;

    for (int trial = 0; trial < cfg.reloc_trials; ++trial) {
        RelocTrialRow row;
        row.trial = trial;
        try {
            Rng rng = Rng(cfg.seed).fork(1000 + static_cast<std::uint64_t>(trial));
            const double mag = rng.uniform(cfg.min_offset, cfg.max_offset);
            const double dir = rng.uniform(-kPi, kPi);
            const double rot = rng.uniform(-kPi, kPi);
            const Transform2 offset =
                make_transform(mag * std::cos(dir), mag * std::sin(dir), rot);

            const std::vector<Pose2> walk =
                random_walk(world, rng, cfg.max_walk, cfg.step, clearance);

            RelocConfig rc;
            rc.th_match = cfg.th_match;
            rc.n_seeds = cfg.n_seeds;
            rc.min_estimations = cfg.min_estimations;
            rc.est_min_travel = cfg.est_min_travel;
            rc.feature_only = cfg.mode == MapMode::FeatureOnly;
            rc.n_beams = cfg.n_beams;
            rc.max_range = cfg.max_range;
            rc.icp.rms_accept = cfg.rms_accept;

            RelocTrace trace;
            const RelocResult res = relocalize(art.map, world, offset, walk, rc, &trace);
            row.converged = res.converged;
            row.trail_length = res.trail_length;
            const double total_walk = trajectory_length(walk);

            if (res.converged) {
                const RelocErrors err = metric_reloc_errors(res.t_final, offset);
                row.eps_t = err.eps_t;
                row.eps_theta_deg = err.eps_theta_deg;
                row.success = metric_success(res.t_final, offset);
            }
            // first moment the running estimate satisfied the success bound
            row.l_reloca = total_walk;
            row.l_reloca_censored = true;
            for (const RelocSnapshot& snap : trace.snapshots) {
                if (metric_success(snap.t, offset)) {
                    row.l_reloca = snap.trail;
                    row.l_reloca_censored = false;
                    break;
                }
            }
            if (row.success) ++successes;
            if (row.converged) {
                eps_t.push_back(row.eps_t);
                eps_th.push_back(row.eps_theta_deg);
            }
            l_rel.push_back(row.l_reloca);
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            rep.any_failed = true;
        }
        rep.reloc_rows.push_back(std::move(row));
    }

    if (cfg.reloc_trials > 0)
        rep.success_rate = static_cast<double>(successes) / cfg.reloc_trials;
    std::tie(rep.eps_t_mean, rep.eps_t_std) = detail::mean_std(eps_t);
    std::tie(rep.eps_theta_mean, rep.eps_theta_std) = detail::mean_std(eps_th);
    std::tie(rep.l_reloca_mean, rep.l_reloca_std) = detail::mean_std(l_rel);
}

/// Seeded start/goal pairs executed on the topological map against the
/// grid-optimal baseline.
inline void run_plan_trials(const World& world, const ExperimentConfig& cfg,
                            ExperimentArtifacts& art) {
    MetricsReport& rep = art.report;
    const double clearance = cfg.effective_clearance(world.truth.resolution);
    const int clear_cells = static_cast<int>(
        std::ceil(clearance / world.truth.resolution - 1e-9));
    const GridMask nav = navigable_mask(art.explored, clear_cells + 1);
    std::vector<CellIndex> nav_cells;
    for (int y = 0; y < art.explored.height; ++y)
        for (int x = 0; x < art.explored.width; ++x)
            if (nav.at(x, y)) nav_cells.push_back({x, y});

    std::vector<double> cpaths;
    for (int trial = 0; trial < cfg.plan_pairs; ++trial) {
        PlanTrialRow row;
        row.trial = trial;
        try {
            Rng rng = Rng(cfg.seed).fork(2000 + static_cast<std::uint64_t>(trial));
            if (nav_cells.size() < 2) throw std::runtime_error("no navigable cells");
            Point2 a{}, b{};
            for (int attempt = 0;; ++attempt) {
                a = art.explored.center_of(nav_cells[rng.uniform_int(nav_cells.size())]);
                b = art.explored.center_of(nav_cells[rng.uniform_int(nav_cells.size())]);
                if (distance(a, b) >= cfg.min_pair_separation) break;
                if (attempt > 256) break;
            }
            const auto s_grid = grid_baseline_length(art.explored, a, b);
            if (!s_grid) {
                row.discarded = true;
                row.error = "goal unreachable on grid";
                rep.plan_rows.push_back(std::move(row));
                continue;
            }
            const PlanResult pr =
                plan(art.map, Transform2::identity(), a, b, cfg.k);
            const ExecResult ex = execute_with_skip(world, pr, art.explored, clearance);
            row.s_topo = ex.traveled;
            row.s_grid = *s_grid;
            row.c_path = metric_c_path(ex.traveled, *s_grid);
            cpaths.push_back(row.c_path);
        } catch (const std::exception& e) {
            row.discarded = true;
            row.error = e.what();
            rep.any_failed = true;
        }
        rep.plan_rows.push_back(std::move(row));
    }
    if (!cpaths.empty()) {
        auto [m, s] = detail::mean_std(cpaths);
        rep.c_path_mean = m;
        rep.c_path_max = *std::max_element(cpaths.begin(), cpaths.end());
    }
}

/// Full experiment for one mode: explore + build, storage accounting,
/// relocalization trials, planning pairs.
inline ExperimentArtifacts run_experiment(const World& world,
                                          const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentArtifacts art = build_map_for(world, cfg);
    MetricsReport& rep = art.report;
    rep.world = world.name;
    rep.mode = mode_name(cfg.mode);
    rep.seed = cfg.seed;
    rep.storage_map_bytes = storage_bytes(art.map);
    rep.storage_grid_bytes = grid_storage_bytes(art.explored);
    rep.nodes_main = art.map.main_count();
    rep.nodes_support = art.map.support_count();
    rep.edges = static_cast<int>(art.map.edges().size());
    const double truth_free = static_cast<double>(world.truth.count(Cell::Free));
    rep.explored_free_coverage =
        truth_free > 0.0
            ? static_cast<double>(art.explored.count(Cell::Free)) / truth_free
            : 0.0;

    if (cfg.reloc_trials > 0) run_reloc_trials(world, cfg, art);
    if (cfg.plan_pairs > 0 && cfg.mode != MapMode::FeatureOnly)
        run_plan_trials(world, cfg, art);
    return art;
}

inline nlohmann::ordered_json report_to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["world"] = r.world;
    j["mode"] = r.mode;
    j["seed"] = r.seed;
    j["storage"] = {{"map_bytes", r.storage_map_bytes},
                    {"grid_rle_bytes", r.storage_grid_bytes}};
    j["map"] = {{"main_nodes", r.nodes_main},
                {"support_nodes", r.nodes_support},
                {"edges", r.edges},
                {"free_coverage", r.explored_free_coverage}};
    nlohmann::ordered_json reloc;
    reloc["success_rate"] = r.success_rate;
    reloc["eps_t_pct"] = {{"mean", 100.0 * r.eps_t_mean}, {"std", 100.0 * r.eps_t_std}};
    reloc["eps_theta_deg"] = {{"mean", r.eps_theta_mean}, {"std", r.eps_theta_std}};
    reloc["l_reloca_m"] = {{"mean", r.l_reloca_mean}, {"std", r.l_reloca_std}};
    reloc["trials"] = nlohmann::ordered_json::array();
    for (const RelocTrialRow& row : r.reloc_rows) {
        nlohmann::ordered_json t;
        t["trial"] = row.trial;
        t["converged"] = row.converged;
        t["success"] = row.success;
        t["eps_t_pct"] = 100.0 * row.eps_t;
        t["eps_theta_deg"] = row.eps_theta_deg;
        t["l_reloca_m"] = row.l_reloca;
        t["l_reloca_censored"] = row.l_reloca_censored;
        t["trail_length_m"] = row.trail_length;
        if (row.failed) t["error"] = row.error;
        reloc["trials"].push_back(std::move(t));
    }
    j["relocalization"] = std::move(reloc);
    nlohmann::ordered_json planning;
    planning["c_path"] = {{"mean", r.c_path_mean}, {"max", r.c_path_max}};
    planning["pairs"] = nlohmann::ordered_json::array();
    for (const PlanTrialRow& row : r.plan_rows) {
        nlohmann::ordered_json t;
        t["trial"] = row.trial;
        t["s_topo_m"] = row.s_topo;
        t["s_grid_m"] = row.s_grid;
        t["c_path"] = row.c_path;
        if (row.discarded) t["discarded"] = row.error;
        planning["pairs"].push_back(std::move(t));
    }
    j["planning"] = std::move(planning);
    j["any_failed"] = r.any_failed;
    return j;
}

}  // namespace fhtmap
