#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fhtmap/common.hpp"
#include "fhtmap/graph.hpp"
#include "fhtmap/grid.hpp"

namespace fhtmap {

inline constexpr int kMapFormatVersion = 1;

namespace detail {

inline void append_number(std::string& out, double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, p);
}

// binary32 fields are written with float precision so the compact text is
// what the storage accounting measures
inline void append_number(std::string& out, float v) {
    char buf[24];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, p);
}

}  // namespace detail

/// Compact (no whitespace) versioned JSON encoding of the map. Descriptor
/// components and scan ranges are binary32; everything else is binary64.
inline std::string serialize(const FhtMap& map) {
    std::string out;
    out.reserve(1024 + static_cast<std::size_t>(map.size()) * 256);
    out += "{\"version\":";
    out += std::to_string(kMapFormatVersion);
    out += ",\"meta\":{\"descriptor_dim\":";
    out += std::to_string(map.meta.descriptor_dim);
    out += ",\"resolution\":";
    detail::append_number(out, map.meta.resolution);
    out += ",\"frame\":\"";
    out += map.meta.frame;
    out += "\"},\"nodes\":[";
    bool first_node = true;
    for (const MapNode& n : map.nodes()) {
        if (!first_node) out += ',';
        first_node = false;
        out += "{\"id\":";
        out += std::to_string(n.id);
        out += ",\"kind\":\"";
        out += n.is_main() ? "main" : "support";
        out += "\",\"position\":[";
        detail::append_number(out, n.position.x);
        out += ',';
        detail::append_number(out, n.position.y);
        out += "],\"rect\":[";
        detail::append_number(out, n.free_rect.xmin);
        out += ',';
        detail::append_number(out, n.free_rect.ymin);
        out += ',';
        detail::append_number(out, n.free_rect.xmax);
        out += ',';
        detail::append_number(out, n.free_rect.ymax);
        out += ']';
        if (n.is_main()) {
            out += ",\"entropy\":";
            detail::append_number(out, *n.entropy);
            out += ",\"descriptor\":[";
            for (std::size_t i = 0; i < n.descriptor->values.size(); ++i) {
                if (i) out += ',';
                detail::append_number(out, n.descriptor->values[i]);
            }
            out += "],\"scan\":{\"max_range\":";
            detail::append_number(out, n.scan->max_range);
            out += ",\"ranges\":[";
            for (std::size_t i = 0; i < n.scan->ranges.size(); ++i) {
                if (i) out += ',';
                detail::append_number(out, n.scan->ranges[i]);
            }
            out += "]}";
        }
        out += '}';
    }
    out += "],\"edges\":[";
    bool first_edge = true;
    for (const auto& [a, b] : map.edges()) {
        if (!first_edge) out += ',';
        first_edge = false;
        out += '[';
        out += std::to_string(a);
        out += ',';
        out += std::to_string(b);
        out += ']';
    }
    out += "]}";
    return out;
}

inline FhtMap deserialize(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("map: invalid or truncated json: ") + e.what());
    }
    try {
        const int version = j.at("version").get<int>();
        if (version != kMapFormatVersion)
            throw ParseError("map: unsupported format version " + std::to_string(version));
        FhtMap map;
        const auto& meta = j.at("meta");
        map.meta.descriptor_dim = meta.at("descriptor_dim").get<int>();
        map.meta.resolution = meta.at("resolution").get<double>();
        map.meta.frame = meta.at("frame").get<std::string>();

        for (const auto& jn : j.at("nodes")) {
            MapNode n;
            const std::string kind = jn.at("kind").get<std::string>();
            if (kind == "main")
                n.kind = NodeKind::Main;
            else if (kind == "support")
                n.kind = NodeKind::Support;
            else
                throw ParseError("map: unknown node kind '" + kind + "'");
            n.position = {jn.at("position").at(0).get<double>(),
                          jn.at("position").at(1).get<double>()};
            const auto& r = jn.at("rect");
            n.free_rect = {r.at(0).get<double>(), r.at(1).get<double>(),
                           r.at(2).get<double>(), r.at(3).get<double>()};
            if (n.kind == NodeKind::Main) {
                n.entropy = jn.at("entropy").get<double>();
                Descriptor d;
                for (const auto& v : jn.at("descriptor"))
                    d.values.push_back(v.get<float>());
                n.descriptor = std::move(d);
                LaserScan scan;
                scan.max_range = jn.at("scan").at("max_range").get<double>();
                for (const auto& v : jn.at("scan").at("ranges"))
                    scan.ranges.push_back(v.get<float>());
                scan.angles = uniform_beam_angles(static_cast<int>(scan.ranges.size()));
                n.scan = std::move(scan);
            } else if (jn.contains("descriptor") || jn.contains("scan") ||
                       jn.contains("entropy")) {
                throw ParseError("map: support node carries main-node payload");
            }
            const int given_id = jn.at("id").get<int>();
            const int id = map.add_node(std::move(n));
            if (id != given_id)
                throw ParseError("map: node ids must be dense and in order");
        }
        for (const auto& je : j.at("edges"))
            map.add_edge(je.at(0).get<int>(), je.at(1).get<int>());
        return map;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("map: malformed document: ") + e.what());
    }
}

/// Storage footprint of the map: byte length of the compact encoding.
inline std::size_t storage_bytes(const FhtMap& map) { return serialize(map).size(); }

/// Grid-map storage baseline: the explored grid as run-length encoded cell
/// states in the same compact JSON medium, runs as [count, state] pairs
/// over the row-major cell stream.
inline std::string serialize_grid_rle(const OccupancyGrid& g) {
    std::string out = "{\"width\":" + std::to_string(g.width) +
                      ",\"height\":" + std::to_string(g.height) + ",\"resolution\":";
    detail::append_number(out, g.resolution);
    out += ",\"runs\":[";
    bool first = true;
    std::size_t i = 0;
    while (i < g.cells.size()) {
        std::size_t j = i;
        while (j < g.cells.size() && g.cells[j] == g.cells[i]) ++j;
        if (!first) out += ',';
        first = false;
        out += '[';
        out += std::to_string(j - i);
        out += ',';
        out += std::to_string(static_cast<int>(g.cells[i]));
        out += ']';
        i = j;
    }
    out += "]}";
    return out;
}

inline std::size_t grid_storage_bytes(const OccupancyGrid& g) {
    return serialize_grid_rle(g).size();
}

}  // namespace fhtmap
