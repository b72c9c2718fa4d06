#pragma once

// Scenario files (JSON).
//
//   {
//     "layers":     [{"a": 0.6302, "d": 1.178, "p": 0.8444}, ...],
//     "pointing":   {"rho2": 1, "a0": 0.0032}   or   {"r": ..., "w_z": ..., "sigma_s": ...},
//     "budget":     {"pt_dbm": 30, "pt_dbm_range": [-10, 55], "sigma_w2": 1e-14,
//                    "alpha": 0.056, "length_m": 50},
//     "modulation": "ook"   or   {"delta": 1, "phi": 0.5, "q": [0.5]},
//     "detection":  "imdd" | "hd"
//   }
//
// Either pt_dbm or pt_dbm_range (or both) must be present; with only a
// range the scenario's transmit power is the start of the range.

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "uwoc/channel.hpp"
#include "uwoc/error.hpp"

namespace uwoc {

struct PointingGeometry {
    double r;
    double w_z;
    double sigma_s;
};

/// A parsed scenario file. Keeps the original spelling of optional sections
/// so that serializing reproduces the same document.
struct ScenarioConfig {
    LinkScenario scenario;
    bool has_pt_dbm = true;
    std::optional<std::array<double, 2>> pt_dbm_range;
    std::optional<PointingGeometry> geometry;
    bool ook_preset = false;
};

namespace detail {

using json = nlohmann::json;

inline const json& require_key(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path + "." + key, "missing required field");
    return *it;
}

inline double number_at(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

inline double number_field(const json& obj, const std::string& key, const std::string& path) {
    return number_at(require_key(obj, key, path), path + "." + key);
}

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

inline std::string line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
        if (text[i] == '\n') ++line;
    return "line " + std::to_string(line);
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(detail::line_of(text, e.byte), e.what());
    }
    if (!doc.is_object()) throw ConfigError("line 1", "scenario must be a JSON object");
    detail::reject_unknown(doc, {"layers", "pointing", "budget", "modulation", "detection"}, "");

    ScenarioConfig cfg;
    LinkScenario& s = cfg.scenario;

    const json& layers = detail::require_key(doc, "layers", "scenario");
    if (!layers.is_array()) throw ConfigError("layers", "expected an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string path = "layers[" + std::to_string(i) + "]";
        const json& l = layers[i];
        if (!l.is_object()) throw ConfigError(path, "expected an object with a, d, p");
        detail::reject_unknown(l, {"a", "d", "p"}, path);
        s.layers.push_back({detail::number_field(l, "a", path), detail::number_field(l, "d", path),
                            detail::number_field(l, "p", path)});
    }

    const json& pe = detail::require_key(doc, "pointing", "scenario");
    if (!pe.is_object()) throw ConfigError("pointing", "expected an object");
    if (pe.contains("r") || pe.contains("w_z") || pe.contains("sigma_s")) {
        detail::reject_unknown(pe, {"r", "w_z", "sigma_s"}, "pointing");
        PointingGeometry g{detail::number_field(pe, "r", "pointing"), detail::number_field(pe, "w_z", "pointing"),
                           detail::number_field(pe, "sigma_s", "pointing")};
        try {
            s.pointing = pointing_from_geometry(g.r, g.w_z, g.sigma_s);
        } catch (const DomainError& e) {
            throw ConfigError("pointing", e.what());
        }
        cfg.geometry = g;
    } else {
        detail::reject_unknown(pe, {"rho2", "a0"}, "pointing");
        s.pointing = {detail::number_field(pe, "rho2", "pointing"), detail::number_field(pe, "a0", "pointing")};
    }

    const json& b = detail::require_key(doc, "budget", "scenario");
    if (!b.is_object()) throw ConfigError("budget", "expected an object");
    detail::reject_unknown(b, {"pt_dbm", "pt_dbm_range", "sigma_w2", "alpha", "length_m"}, "budget");
    cfg.has_pt_dbm = b.contains("pt_dbm");
    if (b.contains("pt_dbm_range")) {
        const json& r = b["pt_dbm_range"];
        if (!r.is_array() || r.size() != 2) throw ConfigError("budget.pt_dbm_range", "expected [start, stop]");
        cfg.pt_dbm_range = std::array<double, 2>{detail::number_at(r[0], "budget.pt_dbm_range[0]"),
                                                 detail::number_at(r[1], "budget.pt_dbm_range[1]")};
    }
    if (!cfg.has_pt_dbm && !cfg.pt_dbm_range) throw ConfigError("budget.pt_dbm", "need pt_dbm or pt_dbm_range");
    s.budget.pt_dbm = cfg.has_pt_dbm ? detail::number_field(b, "pt_dbm", "budget") : (*cfg.pt_dbm_range)[0];
    s.budget.sigma_w2 = detail::number_field(b, "sigma_w2", "budget");
    s.budget.alpha = detail::number_field(b, "alpha", "budget");
    s.budget.length_m = detail::number_field(b, "length_m", "budget");

    const json& m = detail::require_key(doc, "modulation", "scenario");
    if (m.is_string()) {
        if (m.get<std::string>() != "ook") throw ConfigError("modulation", "unknown preset '" + m.get<std::string>() + "'");
        s.modulation = ModulationScheme::ook();
        cfg.ook_preset = true;
    } else if (m.is_object()) {
        detail::reject_unknown(m, {"delta", "phi", "q"}, "modulation");
        s.modulation.delta = detail::number_field(m, "delta", "modulation");
        s.modulation.phi = detail::number_field(m, "phi", "modulation");
        const json& q = detail::require_key(m, "q", "modulation");
        if (!q.is_array()) throw ConfigError("modulation.q", "expected an array");
        for (std::size_t i = 0; i < q.size(); ++i)
            s.modulation.q.push_back(detail::number_at(q[i], "modulation.q[" + std::to_string(i) + "]"));
    } else {
        throw ConfigError("modulation", "expected \"ook\" or an object");
    }

    if (doc.contains("detection")) {
        const json& d = doc["detection"];
        if (d == "imdd") s.detection = Detection::imdd;
        else if (d == "hd") s.detection = Detection::hd;
        else throw ConfigError("detection", "expected \"imdd\" or \"hd\"");
    }
    return cfg;
}

inline std::string serialize_scenario(const ScenarioConfig& cfg) {
    using detail::json;
    const LinkScenario& s = cfg.scenario;
    json doc = json::object();
    json layers = json::array();
    for (const auto& l : s.layers) layers.push_back({{"a", l.a}, {"d", l.d}, {"p", l.p}});
    doc["layers"] = layers;
    if (cfg.geometry) doc["pointing"] = {{"r", cfg.geometry->r}, {"w_z", cfg.geometry->w_z}, {"sigma_s", cfg.geometry->sigma_s}};
    else doc["pointing"] = {{"rho2", s.pointing.rho2}, {"a0", s.pointing.a0}};
    json b = json::object();
    if (cfg.has_pt_dbm) b["pt_dbm"] = s.budget.pt_dbm;
    if (cfg.pt_dbm_range) b["pt_dbm_range"] = {(*cfg.pt_dbm_range)[0], (*cfg.pt_dbm_range)[1]};
    b["sigma_w2"] = s.budget.sigma_w2;
    b["alpha"] = s.budget.alpha;
    b["length_m"] = s.budget.length_m;
    doc["budget"] = b;
    if (cfg.ook_preset) doc["modulation"] = "ook";
    else doc["modulation"] = {{"delta", s.modulation.delta}, {"phi", s.modulation.phi}, {"q", s.modulation.q}};
    doc["detection"] = to_string(s.detection);
    return doc.dump(2) + "\n";
}

/// Resolve a scenario path: as given, then under $UWOC_SCENARIO_DIR, then
/// under the bundled scenario directory.
inline std::filesystem::path resolve_scenario_path(const std::string& name) {
    namespace fs = std::filesystem;
    const fs::path given(name);
    if (fs::exists(given) || given.is_absolute()) return given;
    if (const char* env = std::getenv("UWOC_SCENARIO_DIR"); env && *env) {
        const fs::path p = fs::path(env) / given;
        if (fs::exists(p)) return p;
    }
#ifdef UWOC_BUNDLED_SCENARIO_DIR
    const fs::path bundled = fs::path(UWOC_BUNDLED_SCENARIO_DIR) / given;
    if (fs::exists(bundled)) return bundled;
#endif
    return given;
}

inline ScenarioConfig load_scenario_file(const std::string& name) {
    const auto path = resolve_scenario_path(name);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace uwoc
