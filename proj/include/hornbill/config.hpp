#pragma once

#include <hornbill/errors.hpp>
#include <hornbill/quadrature.hpp>
#include <hornbill/table.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hornbill::config {

struct OppositePair {
    std::size_t horn = 0;
    std::size_t obstacle = 0;
};

struct RunConfig {
    table::TableConfig table;
    std::uint64_t seed = 0;
    QuadratureSettings quadrature;
    std::vector<OppositePair> opposite;
    /// 16 hex digits identifying the canonicalized document.
    std::string hash;
};

/// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] inline std::string hex16(std::uint64_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg)
{
    throw ConfigError("config: " + path + ": " + msg);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path)
{
    const auto it = obj.find(key);
    if (it == obj.end()) {
        fail(path.empty() ? key : path + "." + key, "missing required field");
    }
    return *it;
}

inline double number(const json& v, const std::string& path)
{
    if (!v.is_number()) {
        fail(path, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        fail(path, "must be finite");
    }
    return x;
}

inline double positive(const json& v, const std::string& path)
{
    const double x = number(v, path);
    if (!(x > 0.0)) {
        fail(path, "must be positive");
    }
    return x;
}

inline std::size_t index(const json& v, const std::string& path)
{
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        fail(path, "expected a nonnegative integer");
    }
    return v.get<std::size_t>();
}

inline void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& path)
{
    for (const auto& [k, _] : obj.items()) {
        bool known = false;
        for (const char* allowed : keys) {
            known = known || k == allowed;
        }
        if (!known) {
            fail(path.empty() ? k : path + "." + k, "unknown field");
        }
    }
}

inline table::Obstacle obstacle(const json& o, const std::string& path)
{
    if (!o.is_object()) {
        fail(path, "expected an object");
    }
    only_keys(o, {"center", "radius", "kind", "beta"}, path);
    table::Obstacle obs;
    const auto& c = require(o, "center", path);
    if (!c.is_array() || c.size() != 2) {
        fail(path + ".center", "expected [x, y]");
    }
    obs.center = {number(c[0], path + ".center[0]"), number(c[1], path + ".center[1]")};
    obs.radius = positive(require(o, "radius", path), path + ".radius");
    const auto& kind = require(o, "kind", path);
    if (kind == "scatterer") {
        if (o.contains("beta")) {
            fail(path + ".beta", "only horns take beta");
        }
        obs.kind = table::HardScatterer{};
    } else if (kind == "horn") {
        obs.kind = table::TorricelliHorn{positive(require(o, "beta", path), path + ".beta")};
    } else {
        fail(path + ".kind", "expected \"scatterer\" or \"horn\"");
    }
    return obs;
}

} // namespace detail

/**
 * @brief Builds a RunConfig from a parsed document. Geometry overlaps are
 * left to table::validate_table.
 */
[[nodiscard]] inline RunConfig from_json(const nlohmann::json& doc)
{
    using detail::fail;
    if (!doc.is_object()) {
        fail("(root)", "expected an object");
    }
    detail::only_keys(doc, {"table", "obstacles", "seed", "quadrature", "opposite"}, "");
    RunConfig rc;
    const auto& t = detail::require(doc, "table", "");
    if (!t.is_object()) {
        fail("table", "expected an object");
    }
    detail::only_keys(t, {"kind", "width", "height", "length_cap"}, "table");
    const auto& kind = detail::require(t, "kind", "table");
    if (kind == "torus") {
        rc.table.domain.kind = table::DomainKind::torus;
    } else if (kind == "rectangle") {
        rc.table.domain.kind = table::DomainKind::rectangle;
    } else {
        fail("table.kind", "expected \"torus\" or \"rectangle\"");
    }
    rc.table.domain.width = detail::positive(detail::require(t, "width", "table"), "table.width");
    rc.table.domain.height = detail::positive(detail::require(t, "height", "table"), "table.height");
    if (t.contains("length_cap")) {
        rc.table.length_cap = detail::positive(t["length_cap"], "table.length_cap");
    }
    const auto& obs = detail::require(doc, "obstacles", "");
    if (!obs.is_array() || obs.empty()) {
        fail("obstacles", "expected a nonempty array");
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
        rc.table.obstacles.push_back(detail::obstacle(obs[i], "obstacles[" + std::to_string(i) + "]"));
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) {
            fail("seed", "expected a nonnegative integer");
        }
        rc.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("quadrature")) {
        const auto& q = doc["quadrature"];
        if (!q.is_object()) {
            fail("quadrature", "expected an object");
        }
        detail::only_keys(q, {"rel_tol", "max_subdiv"}, "quadrature");
        if (q.contains("rel_tol")) {
            rc.quadrature.rel_tol = detail::number(q["rel_tol"], "quadrature.rel_tol");
        }
        if (q.contains("max_subdiv")) {
            rc.quadrature.max_subdiv = static_cast<int>(detail::index(q["max_subdiv"], "quadrature.max_subdiv"));
        }
        try {
            rc.quadrature.validate();
        } catch (const Error& e) {
            fail("quadrature", e.what());
        }
    }
    if (doc.contains("opposite")) {
        const auto& op = doc["opposite"];
        if (!op.is_array()) {
            fail("opposite", "expected an array");
        }
        for (std::size_t i = 0; i < op.size(); ++i) {
            const std::string path = "opposite[" + std::to_string(i) + "]";
            if (!op[i].is_object()) {
                fail(path, "expected an object");
            }
            detail::only_keys(op[i], {"horn", "obstacle"}, path);
            OppositePair p{detail::index(detail::require(op[i], "horn", path), path + ".horn"),
                           detail::index(detail::require(op[i], "obstacle", path), path + ".obstacle")};
            const auto n = rc.table.obstacles.size();
            if (p.horn >= n) {
                fail(path + ".horn", "obstacle index out of range");
            }
            if (p.obstacle >= n) {
                fail(path + ".obstacle", "obstacle index out of range");
            }
            if (!rc.table.obstacles[p.horn].is_horn()) {
                fail(path + ".horn", "obstacle " + std::to_string(p.horn) + " is not a horn");
            }
            if (p.horn == p.obstacle) {
                fail(path, "horn and obstacle must differ");
            }
            rc.opposite.push_back(p);
        }
    }
    rc.hash = hex16(fnv1a(doc.dump()));
    return rc;
}

/// Parses JSON text; syntax errors report line and column.
[[nodiscard]] inline RunConfig parse_config_text(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config: syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    return from_json(doc);
}

[[nodiscard]] inline RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("config: cannot read " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical JSON form of a config; parsing it back yields the same hash.
[[nodiscard]] inline nlohmann::json to_json(const RunConfig& rc)
{
    nlohmann::json doc;
    doc["table"] = {{"kind", rc.table.domain.kind == table::DomainKind::torus ? "torus" : "rectangle"},
                    {"width", rc.table.domain.width},
                    {"height", rc.table.domain.height}};
    if (rc.table.length_cap > 0.0) {
        doc["table"]["length_cap"] = rc.table.length_cap;
    }
    doc["obstacles"] = nlohmann::json::array();
    for (const auto& o : rc.table.obstacles) {
        nlohmann::json j = {{"center", {o.center.x, o.center.y}}, {"radius", o.radius}};
        if (o.is_horn()) {
            j["kind"] = "horn";
            j["beta"] = std::get<table::TorricelliHorn>(o.kind).beta;
        } else {
            j["kind"] = "scatterer";
        }
        doc["obstacles"].push_back(j);
    }
    doc["seed"] = rc.seed;
    doc["quadrature"] = {{"rel_tol", rc.quadrature.rel_tol}, {"max_subdiv", rc.quadrature.max_subdiv}};
    if (!rc.opposite.empty()) {
        doc["opposite"] = nlohmann::json::array();
        for (const auto& p : rc.opposite) {
            doc["opposite"].push_back({{"horn", p.horn}, {"obstacle", p.obstacle}});
        }
    }
    return doc;
}

/**
 * @brief Torus 2.2 x 2.2*sqrt(3) holding a unit horn (index 0) and a unit
 * scatterer (index 1) on the diagonal. Finite horizon, tau_min = 0.2.
 */
[[nodiscard]] inline RunConfig reference_config(double beta, std::uint64_t seed = 0)
{
    const double s3 = std::sqrt(3.0);
    RunConfig rc;
    rc.table.domain = {table::DomainKind::torus, 2.2, 2.2 * s3};
    rc.table.obstacles = {
        {{0.55, 0.55 * s3}, 1.0, table::TorricelliHorn{beta}},
        {{1.65, 1.65 * s3}, 1.0, table::HardScatterer{}},
    };
    rc.seed = seed;
    rc.opposite = {{0, 1}};
    rc.hash = hex16(fnv1a(to_json(rc).dump()));
    return rc;
}

} // namespace hornbill::config
