#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "fhtmap/common.hpp"
#include "fhtmap/experiment.hpp"

namespace fhtmap {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline double to_double(std::string_view v, std::string_view key) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config: bad numeric value for '" + std::string(key) + "'");
    return out;
}

inline long to_long(std::string_view v, std::string_view key) {
    long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config: bad integer value for '" + std::string(key) + "'");
    return out;
}

}  // namespace detail

/// Flat key = value config file. '#' and ';' start comments, blank lines
/// are skipped, quotes around string values are optional.
inline void apply_config_text(std::string_view text, ExperimentConfig& cfg) {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = nl == std::string_view::npos
                                    ? text.substr(pos)
                                    : text.substr(pos, nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string_view::npos) line = line.substr(0, comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string_view key = detail::trim(line.substr(0, eq));
        std::string_view val = detail::trim(line.substr(eq + 1));
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            val = val.substr(1, val.size() - 2);

        if (key == "world") cfg.world_path = std::string(val);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::to_long(val, key));
        else if (key == "sigma_c") cfg.sigma_c = detail::to_double(val, key);
        else if (key == "gamma1") cfg.gamma1 = detail::to_double(val, key);
        else if (key == "gamma2") cfg.gamma2 = detail::to_double(val, key);
        else if (key == "th_s") cfg.th_s = detail::to_double(val, key);
        else if (key == "rho") cfg.rho = detail::to_double(val, key);
        else if (key == "max_half_extent") cfg.max_half_extent = detail::to_double(val, key);
        else if (key == "n_bins") cfg.n_bins = static_cast<int>(detail::to_long(val, key));
        else if (key == "descriptor_dim" || key == "D")
            cfg.descriptor_dim = static_cast<int>(detail::to_long(val, key));
        else if (key == "n_beams") cfg.n_beams = static_cast<int>(detail::to_long(val, key));
        else if (key == "max_range") cfg.max_range = detail::to_double(val, key);
        else if (key == "step") cfg.step = detail::to_double(val, key);
        else if (key == "replan_every")
            cfg.replan_every = static_cast<int>(detail::to_long(val, key));
        else if (key == "budget") cfg.budget = detail::to_long(val, key);
        else if (key == "r_info") cfg.r_info = detail::to_double(val, key);
        else if (key == "min_frontier_cells")
            cfg.min_frontier_cells = static_cast<int>(detail::to_long(val, key));
        else if (key == "clearance") cfg.clearance = detail::to_double(val, key);
        else if (key == "th_match") cfg.th_match = detail::to_double(val, key);
        else if (key == "n_seeds") cfg.n_seeds = static_cast<int>(detail::to_long(val, key));
        else if (key == "rms_accept") cfg.rms_accept = detail::to_double(val, key);
        else if (key == "min_estimations")
            cfg.min_estimations = static_cast<int>(detail::to_long(val, key));
        else if (key == "est_min_travel") cfg.est_min_travel = detail::to_double(val, key);
        else if (key == "max_walk") cfg.max_walk = detail::to_double(val, key);
        else if (key == "min_offset") cfg.min_offset = detail::to_double(val, key);
        else if (key == "max_offset") cfg.max_offset = detail::to_double(val, key);
        else if (key == "k") cfg.k = detail::to_double(val, key);
        else if (key == "min_pair_separation")
            cfg.min_pair_separation = detail::to_double(val, key);
        else if (key == "start_x") cfg.start_x = detail::to_double(val, key);
        else if (key == "start_y") cfg.start_y = detail::to_double(val, key);
        else if (key == "mode") cfg.mode = mode_from_name(std::string(val));
        else if (key == "reloc_trials")
            cfg.reloc_trials = static_cast<int>(detail::to_long(val, key));
        else if (key == "plan_pairs")
            cfg.plan_pairs = static_cast<int>(detail::to_long(val, key));
        else
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": unknown key '" + std::string(key) + "'");
    }
    cfg.validate();
}

}  // namespace fhtmap
