// Command-line front end: map construction, relocalization trials, path
// planning trials, full evaluation runs, and renders.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fhtmap/config.hpp"
#include "fhtmap/experiment.hpp"
#include "fhtmap/render.hpp"

using namespace fhtmap;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

World load_world_file(const std::string& path) {
    World w = load_world(read_file(path), std::filesystem::path(path).stem().string());
    return w;
}

ExperimentConfig load_config(const std::string& world_path,
                             const std::string& config_path, std::uint64_t* seed,
                             MapMode* mode) {
    ExperimentConfig cfg;
    cfg.world_path = world_path;
    if (!config_path.empty()) apply_config_text(read_file(config_path), cfg);
    if (seed) cfg.seed = *seed;
    if (mode) cfg.mode = *mode;
    cfg.validate();
    return cfg;
}

void write_render(const std::string& path, const FhtMap& map, const OccupancyGrid& grid,
                  const std::vector<Pose2>& trajectory) {
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".ppm")
        write_file(path, render_ppm(map, grid, trajectory));
    else if (ext == ".pbm")
        write_file(path, render_pbm(map, grid, trajectory));
    else
        write_file(path, render_ascii(map, grid, trajectory));
}

OccupancyGrid blank_grid_for(const FhtMap& map) {
    double xmin = 0.0, ymin = 0.0, xmax = 1.0, ymax = 1.0;
    bool first = true;
    for (const MapNode& n : map.nodes()) {
        const Rect& r = n.free_rect;
        if (first) {
            xmin = r.xmin;
            ymin = r.ymin;
            xmax = r.xmax;
            ymax = r.ymax;
            first = false;
        } else {
            xmin = std::min(xmin, r.xmin);
            ymin = std::min(ymin, r.ymin);
            xmax = std::max(xmax, r.xmax);
            ymax = std::max(ymax, r.ymax);
        }
    }
    const double res = map.meta.resolution;
    OccupancyGrid g = OccupancyGrid::filled(
        static_cast<int>((xmax - xmin) / res) + 2,
        static_cast<int>((ymax - ymin) / res) + 2, res, Cell::Unknown);
    g.origin = {xmin - res, ymin - res, 0.0};
    return g;
}

int run(int argc, char** argv) {
    CLI::App app{"feature-based hierarchical topological mapping toolkit"};
    app.require_subcommand(1);

    // explore
    std::string world_path, config_path, out_path, render_path, traj_path;
    std::uint64_t seed = 1;
    bool seed_set = false;
    auto* cmd_explore = app.add_subcommand("explore", "build a map by exploring a world");
    cmd_explore->add_option("world", world_path, "world file")->required();
    cmd_explore->add_option("--config", config_path, "config file");
    cmd_explore->add_option("--out", out_path, "output map json")->required();
    cmd_explore->add_option("--render", render_path, "optional render (.txt/.ppm/.pbm)");
    cmd_explore->add_option("--trajectory", traj_path, "optional trajectory json");
    cmd_explore->add_option("--seed", seed, "seed override")->each([&](auto) { seed_set = true; });

    // relocalize
    std::string map_path;
    int trials = 8;
    auto* cmd_reloc = app.add_subcommand("relocalize", "run relocalization trials");
    cmd_reloc->add_option("map", map_path, "map json")->required();
    cmd_reloc->add_option("world", world_path, "world file")->required();
    cmd_reloc->add_option("--config", config_path, "config file");
    cmd_reloc->add_option("--trials", trials, "number of trials");
    cmd_reloc->add_option("--seed", seed, "seed")->each([&](auto) { seed_set = true; });
    cmd_reloc->add_option("--out", out_path, "output report json");

    // plan
    int pairs = 6;
    auto* cmd_plan = app.add_subcommand("plan", "run path-planning trials");
    cmd_plan->add_option("map", map_path, "map json")->required();
    cmd_plan->add_option("world", world_path, "world file")->required();
    cmd_plan->add_option("--config", config_path, "config file");
    cmd_plan->add_option("--pairs", pairs, "number of start/goal pairs");
    cmd_plan->add_option("--seed", seed, "seed")->each([&](auto) { seed_set = true; });
    cmd_plan->add_option("--out", out_path, "output report json");

    // eval
    std::string modes_csv = "fht";
    auto* cmd_eval = app.add_subcommand("eval", "full evaluation across modes");
    cmd_eval->add_option("world", world_path, "world file")->required();
    cmd_eval->add_option("--config", config_path, "config file");
    cmd_eval->add_option("--modes", modes_csv, "comma-separated: fht,main_only,feature_only");
    cmd_eval->add_option("--seed", seed, "seed override")->each([&](auto) { seed_set = true; });
    cmd_eval->add_option("--out", out_path, "output report json");

    // render
    auto* cmd_render = app.add_subcommand("render", "render a map file");
    cmd_render->add_option("map", map_path, "map json")->required();
    cmd_render->add_option("--world", world_path, "world file for the backdrop");
    cmd_render->add_option("--out", out_path, "output (.txt/.ppm/.pbm)")->required();

    CLI11_PARSE(app, argc, argv);

    if (cmd_explore->parsed()) {
        const World world = load_world_file(world_path);
        ExperimentConfig cfg = load_config(world_path, config_path,
                                           seed_set ? &seed : nullptr, nullptr);
        const ExperimentArtifacts art = build_map_for(world, cfg);
        write_file(out_path, serialize(art.map));
        std::cout << "map: " << art.map.main_count() << " main + "
                  << art.map.support_count() << " support nodes, "
                  << art.map.edges().size() << " edges, "
                  << storage_bytes(art.map) << " bytes -> " << out_path << "\n";
        if (!render_path.empty())
            write_render(render_path, art.map, art.explored, art.trajectory);
        if (!traj_path.empty()) {
            nlohmann::json jt = nlohmann::json::array();
            for (const Pose2& p : art.trajectory)
                jt.push_back({p.x, p.y, p.theta});
            write_file(traj_path, jt.dump());
        }
        return 0;
    }

    if (cmd_reloc->parsed()) {
        const World world = load_world_file(world_path);
        ExperimentConfig cfg = load_config(world_path, config_path,
                                           seed_set ? &seed : nullptr, nullptr);
        cfg.reloc_trials = trials;
        ExperimentArtifacts art;
        art.map = deserialize(read_file(map_path));
        art.report.world = world.name;
        art.report.mode = mode_name(cfg.mode);
        art.report.seed = cfg.seed;
        run_reloc_trials(world, cfg, art);
        const auto j = report_to_json(art.report);
        if (!out_path.empty()) write_file(out_path, j.dump(2));
        std::cout << j["relocalization"].dump(2) << "\n";
        return art.report.any_failed ? 1 : 0;
    }

    if (cmd_plan->parsed()) {
        const World world = load_world_file(world_path);
        ExperimentConfig cfg = load_config(world_path, config_path,
                                           seed_set ? &seed : nullptr, nullptr);
        cfg.plan_pairs = pairs;
        ExperimentArtifacts art;
        art.map = deserialize(read_file(map_path));
        art.explored = world.truth;  // standalone planning runs on the full grid
        art.report.world = world.name;
        art.report.mode = mode_name(cfg.mode);
        run_plan_trials(world, cfg, art);
        const auto j = report_to_json(art.report);
        if (!out_path.empty()) write_file(out_path, j.dump(2));
        std::cout << j["planning"].dump(2) << "\n";
        return art.report.any_failed ? 1 : 0;
    }

    if (cmd_eval->parsed()) {
        const World world = load_world_file(world_path);
        nlohmann::ordered_json out;
        out["world"] = world.name;
        bool any_failed = false;
        std::stringstream modes(modes_csv);
        std::string mode_str;
        while (std::getline(modes, mode_str, ',')) {
            ExperimentConfig cfg = load_config(world_path, config_path,
                                               seed_set ? &seed : nullptr, nullptr);
            cfg.mode = mode_from_name(mode_str);
            const ExperimentArtifacts art = run_experiment(world, cfg);
            out["modes"][mode_str] = report_to_json(art.report);
            any_failed = any_failed || art.report.any_failed;
            std::cout << mode_str << ": storage " << art.report.storage_map_bytes
                      << " B, success " << art.report.success_rate << ", eps_t "
                      << 100.0 * art.report.eps_t_mean << "%, c_path "
                      << art.report.c_path_mean << "\n";
        }
        if (!out_path.empty()) write_file(out_path, out.dump(2));
        return any_failed ? 1 : 0;
    }

    if (cmd_render->parsed()) {
        const FhtMap map = deserialize(read_file(map_path));
        OccupancyGrid grid;
        if (!world_path.empty())
            grid = load_world_file(world_path).truth;
        else
            grid = blank_grid_for(map);
        write_render(out_path, map, grid, {});
        std::cout << "wrote " << out_path << "\n";
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
