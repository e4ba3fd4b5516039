#pragma once

// Run configuration shared by every subcommand.
//
//   {"version": 1, "command": "thm1",
//    "solver": {"M": 24, "N": 256, "tol": 1e-7, ...},
//    "params": {...command specific...},
//    "outputs": {"out": "...", ...}}
//
// parse_config fills every default, so the normalized config doubles as the
// run manifest and parses back to itself.

#include <map>
#include <string>
#include <vector>

#include "squeeze/domain_json.hpp"
#include "squeeze/error.hpp"
#include "squeeze/slit_solver.hpp"

namespace squeeze {

inline constexpr int config_version = 1;

struct RunConfig {
    int version = config_version;
    std::string command;
    SlitParams solver;
    json params = json::object();
    json outputs = json::object();

    friend bool operator==(const RunConfig& a, const RunConfig& b)
    {
        return a.version == b.version && a.command == b.command && a.solver == b.solver && a.params == b.params &&
               a.outputs == b.outputs;
    }
};

inline const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"slit", "rmap",   "loopbound", "sublemma",    "thm1",
                                                "thm2", "julia",  "julia-rdecay", "verify"};
    return names;
}

/// Parameter defaults per command. A null default marks an optional value
/// without a default; "required" strings must be supplied.
inline json command_defaults(const std::string& command)
{
    const json required = "required";
    if (command == "slit") return {{"domain", required}, {"x", required}, {"base", 0}};
    if (command == "rmap") {
        return {{"domain", required}, {"grid", {{"xmin", -1.0}, {"xmax", 1.0}, {"ymin", -1.0}, {"ymax", 1.0}, {"nx", 3}, {"ny", 3}}}};
    }
    if (command == "loopbound") return {{"domain", required}, {"loop", required}, {"verify_samples", 512}};
    if (command == "sublemma") return {{"delta", 1e-6}};
    if (command == "thm1") {
        return {{"eps", 0.25},       {"depth", 3},         {"schedule", nullptr}, {"resume", nullptr},
                {"delta", 0.01},     {"samples", 16},      {"threshold", nullptr}, {"certify", true}};
    }
    if (command == "thm2") {
        return {{"stages", 1},           {"resume", nullptr},       {"loop_vertices", 128}, {"loop_samples", 8},
                {"slack", 0.0},          {"max_halvings", 10},      {"small_side", 0.125},  {"split_gap", 0.25},
                {"failure_budget", 0.1}, {"local_components", 8},   {"circle_vertices", 256},
                {"removed_samples", 64}};
    }
    if (command == "julia") {
        return {{"c", json::array({1.0, 0.0})}, {"levels", "auto"}, {"bands", 4}, {"resolution", 256},
                {"check_doubling", true},       {"box", nullptr}};
    }
    if (command == "julia-rdecay") {
        return {{"c", json::array({1.0, 0.0})}, {"bands", 4}, {"x", json::array({-3.0, 0.0})}, {"resolution", 256},
                {"check_doubling", true},       {"vertices", 512}};
    }
    if (command == "verify") {
        return {{"state", required}, {"delta", 0.01}, {"samples", 16}, {"threshold", nullptr}, {"local_components", 8},
                {"circle_vertices", 256}, {"removed_samples", 64}, {"loop_vertices", 128}, {"loop_samples", 8}};
    }
    throw Error(ErrorCode::config_error, "command: unknown command '" + command + "'");
}

/// Output slots per command; every slot defaults to null (not written)
/// except the manifest.
inline std::vector<std::string> command_outputs(const std::string& command)
{
    if (command == "slit" || command == "loopbound" || command == "sublemma") return {"out", "manifest"};
    if (command == "rmap") return {"csv", "svg", "manifest"};
    if (command == "thm1" || command == "thm2") return {"out", "report", "svg", "manifest"};
    if (command == "julia") return {"out", "csv", "manifest"};
    if (command == "julia-rdecay") return {"report", "manifest"};
    if (command == "verify") return {"report", "manifest"};
    throw Error(ErrorCode::config_error, "command: unknown command '" + command + "'");
}

/// Solver defaults. The Julia domains are polygons with hundreds of short
/// edges, whose vertex singularities hold the boundary residual near 1e-5
/// at the default sampling, so their accepted residual is looser.
inline SlitParams solver_defaults(const std::string& command)
{
    SlitParams p;
    if (command == "julia-rdecay") p.tol = 1e-4;
    return p;
}

inline json to_json(const SlitParams& p)
{
    return {{"M", p.series_order},
            {"N", p.collocation},
            {"tol", p.tol},
            {"corner_terms", p.corner_terms},
            {"corner_poles", p.corner_poles},
            {"corner_sigma", p.corner_sigma},
            {"interior_poles", p.interior_poles},
            {"max_refinements", p.max_refinements},
            {"clearance", p.clearance},
            {"image_reach", p.image_reach},
            {"wedge_zone", p.wedge_zone},
            {"min_gap", p.min_gap}};
}

namespace detail {

inline bool same_kind(const json& value, const json& def)
{
    if (def.is_null() || def.is_string()) return true; // checked by the consumer
    if (def.is_number_integer()) return value.is_number_integer();
    if (def.is_number()) return value.is_number();
    if (def.is_boolean()) return value.is_boolean();
    if (def.is_object()) return value.is_object();
    if (def.is_array()) return value.is_array();
    return true;
}

/// Overlays `given` on `defaults`, rejecting unknown keys and wrong types.
inline json merge_checked(const json& defaults, const json& given, const std::string& path)
{
    if (!given.is_object()) throw Error(ErrorCode::config_error, path + ": expected an object");
    json out = defaults;
    for (const auto& [k, v] : given.items()) {
        if (!defaults.contains(k)) throw Error(ErrorCode::config_error, path + "." + k + ": unknown key");
        const json& def = defaults[k];
        if (def.is_object() && v.is_object()) {
            out[k] = merge_checked(def, v, path + "." + k);
            continue;
        }
        if (!v.is_null() && !same_kind(v, def)) {
            throw Error(ErrorCode::config_error, path + "." + k + ": expected " + std::string(def.type_name()));
        }
        if (v.is_null() && !def.is_null()) {
            throw Error(ErrorCode::config_error, path + "." + k + ": null is not allowed here");
        }
        out[k] = v;
    }
    return out;
}

} // namespace detail

inline SlitParams solver_from_json(const json& j, const std::string& command, const std::string& path = "solver")
{
    SlitParams p = solver_defaults(command);
    const json merged = detail::merge_checked(to_json(p), j, path);
    p.series_order = merged["M"].get<int>();
    p.collocation = merged["N"].get<int>();
    p.tol = merged["tol"].get<double>();
    p.corner_terms = merged["corner_terms"].get<int>();
    p.corner_poles = merged["corner_poles"].get<int>();
    p.corner_sigma = merged["corner_sigma"].get<double>();
    p.interior_poles = merged["interior_poles"].get<int>();
    p.max_refinements = merged["max_refinements"].get<int>();
    p.clearance = merged["clearance"].get<double>();
    p.image_reach = merged["image_reach"].get<double>();
    p.wedge_zone = merged["wedge_zone"].get<double>();
    p.min_gap = merged["min_gap"].get<double>();
    if (p.series_order < 1) throw Error(ErrorCode::config_error, path + ".M: must be at least 1");
    if (p.collocation < 8) throw Error(ErrorCode::config_error, path + ".N: must be at least 8");
    if (!(p.tol > 0)) throw Error(ErrorCode::config_error, path + ".tol: must be positive");
    if (p.max_refinements < 0) throw Error(ErrorCode::config_error, path + ".max_refinements: must be nonnegative");
    return p;
}

inline json to_json(const RunConfig& c)
{
    return {{"version", c.version}, {"command", c.command}, {"solver", to_json(c.solver)}, {"params", c.params},
            {"outputs", c.outputs}};
}

/// Normalizes a config: known keys only, defaults filled, required values
/// present.
inline RunConfig parse_config(const json& j)
{
    if (!j.is_object()) throw Error(ErrorCode::config_error, "config: expected an object");
    for (const auto& [k, v] : j.items()) {
        if (k != "version" && k != "command" && k != "solver" && k != "params" && k != "outputs") {
            throw Error(ErrorCode::config_error, "config." + k + ": unknown key");
        }
    }
    RunConfig c;
    if (j.contains("version")) {
        if (!j["version"].is_number_integer() || j["version"].get<int>() != config_version) {
            throw Error(ErrorCode::config_error, "config.version: expected " + std::to_string(config_version));
        }
    }
    if (!j.contains("command") || !j["command"].is_string()) {
        throw Error(ErrorCode::config_error, "config.command: missing or not a string");
    }
    c.command = j["command"];
    const json defaults = command_defaults(c.command);
    c.solver = solver_from_json(j.value("solver", json::object()), c.command);
    c.params = detail::merge_checked(defaults, j.value("params", json::object()), "params");
    for (const auto& [k, v] : c.params.items()) {
        if (defaults[k] == "required" && v == "required") {
            throw Error(ErrorCode::config_error, "params." + k + ": required");
        }
    }
    json out_defaults = json::object();
    for (const auto& slot : command_outputs(c.command)) out_defaults[slot] = nullptr;
    out_defaults["manifest"] = c.command + ".manifest.json";
    c.outputs = detail::merge_checked(out_defaults, j.value("outputs", json::object()), "outputs");
    for (const auto& [k, v] : c.outputs.items()) {
        if (!v.is_null() && !v.is_string()) throw Error(ErrorCode::config_error, "outputs." + k + ": expected a path");
    }
    return c;
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

inline std::string manifest_text(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

// Typed accessors with the path in every diagnostic.

inline double param_number(const RunConfig& c, const std::string& key)
{
    const auto& v = c.params.at(key);
    if (!v.is_number()) throw Error(ErrorCode::config_error, "params." + key + ": expected a number");
    return v.get<double>();
}

inline int param_int(const RunConfig& c, const std::string& key)
{
    const auto& v = c.params.at(key);
    if (!v.is_number_integer()) throw Error(ErrorCode::config_error, "params." + key + ": expected an integer");
    return v.get<int>();
}

inline std::string param_string(const RunConfig& c, const std::string& key)
{
    const auto& v = c.params.at(key);
    if (!v.is_string()) throw Error(ErrorCode::config_error, "params." + key + ": expected a string");
    return v.get<std::string>();
}

inline cplx param_complex(const RunConfig& c, const std::string& key)
{
    const auto& v = c.params.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw Error(ErrorCode::config_error, "params." + key + ": expected [re, im]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

inline std::optional<std::string> output_path(const RunConfig& c, const std::string& slot)
{
    const auto& v = c.outputs.at(slot);
    if (v.is_null()) return std::nullopt;
    return v.get<std::string>();
}

/// "1.5,-2" -> 1.5 - 2i, the flag syntax for points and parameters.
inline cplx parse_complex_flag(const std::string& text, const std::string& what)
{
    const auto comma = text.find(',');
    try {
        std::size_t used = 0;
        if (comma == std::string::npos) {
            const double re = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return {re, 0};
        }
        const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
        const double re = std::stod(a, &used);
        if (used != a.size()) throw std::invalid_argument(a);
        const double im = std::stod(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        return {re, im};
    } catch (const std::exception&) {
        throw Error(ErrorCode::config_error, what + ": cannot parse '" + text + "' as re,im");
    }
}

} // namespace squeeze
