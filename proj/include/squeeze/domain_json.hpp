#pragma once

// Domain <-> JSON.
//
//   {"label": "...", "components": [
//      {"kind": "rect", "a": 0, "b": 1, "c": 0, "d": 1},
//      {"kind": "disk", "cx": 0, "cy": 0, "r": 1},
//      {"kind": "poly", "pts": [[0, 0], [1, 0], [0, 1]]},
//      {"kind": "outer", "cx": 0, "cy": 0, "r": 1},   // |z - c| >= r plus infinity
//      {"kind": "point", "x": 0, "y": 0}]}

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "squeeze/error.hpp"
#include "squeeze/geometry.hpp"

namespace squeeze {

using json = nlohmann::ordered_json;

namespace detail {

inline void require_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) throw Error(ErrorCode::config_error, path + ": expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw Error(ErrorCode::config_error, path + "." + k + ": unknown key");
    }
    for (const char* k : keys) {
        if (!j.contains(k)) throw Error(ErrorCode::config_error, path + "." + k + ": missing");
    }
}

inline double number_at(const json& j, const std::string& path, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(ErrorCode::config_error, path + "." + key + ": expected a number");
    return v.get<double>();
}

} // namespace detail

inline json to_json(const Component& k)
{
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            json j;
            if constexpr (std::is_same_v<T, Rect>) {
                j = {{"kind", "rect"}, {"a", s.a}, {"b", s.b}, {"c", s.c}, {"d", s.d}};
            } else if constexpr (std::is_same_v<T, Disk>) {
                j = {{"kind", "disk"}, {"cx", s.center.real()}, {"cy", s.center.imag()}, {"r", s.radius}};
            } else if constexpr (std::is_same_v<T, OuterDisk>) {
                j = {{"kind", "outer"}, {"cx", s.center.real()}, {"cy", s.center.imag()}, {"r", s.radius}};
            } else if constexpr (std::is_same_v<T, PointComponent>) {
                j = {{"kind", "point"}, {"x", s.at.real()}, {"y", s.at.imag()}};
            } else {
                json pts = json::array();
                for (cplx p : s.pts) pts.push_back({p.real(), p.imag()});
                j = {{"kind", "poly"}, {"pts", pts}};
            }
            return j;
        },
        k);
}

inline json to_json(const Domain& d)
{
    json comps = json::array();
    for (const auto& k : d.components) comps.push_back(to_json(k));
    return {{"label", d.label}, {"components", comps}};
}

inline Component component_from_json(const json& j, const std::string& path)
{
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw Error(ErrorCode::config_error, path + ".kind: missing or not a string");
    }
    const std::string kind = j["kind"];
    if (kind == "rect") {
        detail::require_keys(j, path, {"kind", "a", "b", "c", "d"});
        return Rect{detail::number_at(j, path, "a"), detail::number_at(j, path, "b"), detail::number_at(j, path, "c"),
                    detail::number_at(j, path, "d")};
    }
    if (kind == "disk" || kind == "outer") {
        detail::require_keys(j, path, {"kind", "cx", "cy", "r"});
        const cplx c(detail::number_at(j, path, "cx"), detail::number_at(j, path, "cy"));
        const double r = detail::number_at(j, path, "r");
        if (kind == "disk") return Disk{c, r};
        return OuterDisk{c, r};
    }
    if (kind == "point") {
        detail::require_keys(j, path, {"kind", "x", "y"});
        return PointComponent{cplx(detail::number_at(j, path, "x"), detail::number_at(j, path, "y"))};
    }
    if (kind == "poly") {
        detail::require_keys(j, path, {"kind", "pts"});
        const auto& pts = j["pts"];
        if (!pts.is_array()) throw Error(ErrorCode::config_error, path + ".pts: expected an array");
        Polyline p;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& q = pts[i];
            if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number()) {
                throw Error(ErrorCode::config_error, path + ".pts[" + std::to_string(i) + "]: expected [x, y]");
            }
            p.pts.emplace_back(q[0].get<double>(), q[1].get<double>());
        }
        return p;
    }
    throw Error(ErrorCode::config_error, path + ".kind: unknown component kind '" + kind + "'");
}

/// Parses and validates a domain. Schema problems are config errors;
/// geometric problems keep their own codes (overlap, invalid-argument).
inline Domain domain_from_json(const json& j, const std::string& path = "domain")
{
    detail::require_keys(j, path, {"label", "components"});
    if (!j["label"].is_string()) throw Error(ErrorCode::config_error, path + ".label: expected a string");
    if (!j["components"].is_array()) throw Error(ErrorCode::config_error, path + ".components: expected an array");
    Domain d;
    d.label = j["label"];
    for (std::size_t i = 0; i < j["components"].size(); ++i) {
        d.components.push_back(component_from_json(j["components"][i], path + ".components[" + std::to_string(i) + "]"));
    }
    d.validate();
    return d;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::config_error, path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path);
}

inline Domain load_domain(const std::string& path) { return domain_from_json(read_json_file(path), path); }

} // namespace squeeze
