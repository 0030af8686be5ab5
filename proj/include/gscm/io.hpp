// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gscm/core.hpp"
#include "gscm/geometry.hpp"
#include "gscm/path_gain.hpp"
#include "gscm/scatterer_field.hpp"
#include "gscm/synthesis.hpp"
#include "gscm/version.hpp"

namespace gscm {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string &path, const std::string &data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write file: " + path);
    out.write(data.data(), std::streamsize(data.size()));
    if (!out)
        throw DataError("write failed: " + path);
}

// FNV-1a content hash, hex-encoded; embedded in outputs for replayability.
inline std::string content_hash(const std::string &bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string file_hash(const std::string &path) { return content_hash(read_file(path)); }

namespace detail {

inline json parse_json(const std::string &text, const std::string &what)
{
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw DataError("malformed JSON in " + what);
    return j;
}

inline Vec2 vec2_from(const json &j, const std::string &what)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw DataError(what + ": expected [x, y]");
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

inline json vec2_to(const Vec2 &v) { return json::array({v.x(), v.y()}); }

inline Polygon polygon_from(const json &j, const std::string &what)
{
    Polygon p;
    if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array())
        throw DataError(what + ": expected {\"vertices\": [[x,y], ...]}");
    for (const auto &v : j["vertices"])
        p.vertices.push_back(vec2_from(v, what + ".vertices"));
    if (p.vertices.size() < 3)
        throw DataError(what + ": polygon needs at least 3 vertices");
    return p;
}

inline json polygon_to(const Polygon &p)
{
    json verts = json::array();
    for (const auto &v : p.vertices)
        verts.push_back(vec2_to(v));
    return json{{"vertices", verts}};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Map file: JSON with walls / buildings / scattering_areas / foliage_areas.

inline IntersectionMap map_from_json(const json &j)
{
    if (!j.is_object())
        throw DataError("map: expected a JSON object");
    IntersectionMap map;
    if (j.contains("walls")) {
        std::size_t i = 0;
        for (const auto &w : j["walls"]) {
            const std::string what = "map.walls[" + std::to_string(i++) + "]";
            if (!w.contains("p0") || !w.contains("p1") || !w.contains("normal"))
                throw DataError(what + ": needs p0, p1, normal");
            try {
                map.walls.emplace_back(detail::vec2_from(w["p0"], what + ".p0"),
                                       detail::vec2_from(w["p1"], what + ".p1"),
                                       detail::vec2_from(w["normal"], what + ".normal"));
            } catch (const UsageError &e) {
                throw DataError(what + ": " + e.what());
            }
        }
    }
    if (j.contains("buildings")) {
        std::size_t i = 0;
        for (const auto &b : j["buildings"])
            map.buildings.push_back(
                detail::polygon_from(b, "map.buildings[" + std::to_string(i++) + "]"));
    }
    auto load_areas = [&](const char *key, AreaKind kind, std::vector<AreaPolygon> &dst) {
        if (!j.contains(key))
            return;
        std::size_t i = 0;
        for (const auto &a : j[key]) {
            AreaPolygon ap;
            ap.kind = kind;
            ap.poly = detail::polygon_from(a, std::string("map.") + key + "[" +
                                                  std::to_string(i++) + "]");
            dst.push_back(ap);
        }
    };
    load_areas("scattering_areas", AreaKind::scattering, map.scattering_areas);
    load_areas("foliage_areas", AreaKind::foliage, map.foliage_areas);
    map.validate();
    return map;
}

inline json map_to_json(const IntersectionMap &map)
{
    json j = json::object();
    j["walls"] = json::array();
    for (const auto &w : map.walls)
        j["walls"].push_back({{"p0", detail::vec2_to(w.p0)},
                              {"p1", detail::vec2_to(w.p1)},
                              {"normal", detail::vec2_to(w.normal)}});
    j["buildings"] = json::array();
    for (const auto &b : map.buildings)
        j["buildings"].push_back(detail::polygon_to(b));
    j["scattering_areas"] = json::array();
    for (const auto &a : map.scattering_areas)
        j["scattering_areas"].push_back(detail::polygon_to(a.poly));
    j["foliage_areas"] = json::array();
    for (const auto &a : map.foliage_areas)
        j["foliage_areas"].push_back(detail::polygon_to(a.poly));
    return j;
}

inline IntersectionMap load_map(const std::string &path)
{
    return map_from_json(detail::parse_json(read_file(path), path));
}

// ---------------------------------------------------------------------------
// Scatterer class table: one record per class plus global angular parameters.

struct ModelParameters {
    std::vector<ScattererClass> classes;
    AngularGainParams<double> angular;
};

inline ScattererKind kind_from_string(const std::string &s)
{
    if (s == "wall")
        return ScattererKind::wall;
    if (s == "non_wall")
        return ScattererKind::non_wall;
    if (s == "diffuse_wall")
        return ScattererKind::diffuse_wall;
    if (s == "diffuse_non_wall")
        return ScattererKind::diffuse_non_wall;
    throw DataError("unknown scatterer kind: " + s);
}

inline const char *kind_to_string(ScattererKind k)
{
    switch (k) {
    case ScattererKind::wall:
        return "wall";
    case ScattererKind::non_wall:
        return "non_wall";
    case ScattererKind::diffuse_wall:
        return "diffuse_wall";
    default:
        return "diffuse_non_wall";
    }
}

inline ModelParameters params_from_json(const json &j)
{
    ModelParameters out;
    if (j.contains("angular")) {
        const auto &a = j["angular"];
        if (a.contains("xi"))
            out.angular.xi = a["xi"].get<double>();
        if (a.contains("delta_theta1"))
            out.angular.delta_theta1 = a["delta_theta1"].get<double>();
        if (a.contains("delta_theta2"))
            out.angular.delta_theta2 = a["delta_theta2"].get<double>();
    }
    if (!j.contains("classes") || !j["classes"].is_array())
        throw DataError("parameters: expected a \"classes\" array");
    auto interval = [](const json &v, const std::string &what) {
        if (!v.is_array() || v.size() != 2)
            throw DataError(what + ": expected [lo, hi]");
        return Interval{v[0].get<double>(), v[1].get<double>()};
    };
    std::size_t i = 0;
    for (const auto &c : j["classes"]) {
        const std::string what = "parameters.classes[" + std::to_string(i++) + "]";
        ScattererClass cls;
        if (!c.contains("name") || !c.contains("kind") || !c.contains("intensity"))
            throw DataError(what + ": needs name, kind, intensity");
        cls.name = c["name"].get<std::string>();
        cls.kind = kind_from_string(c["kind"].get<std::string>());
        cls.order = c.value("order", 1);
        cls.intensity = c["intensity"].get<double>();
        cls.band_width = c.value("band_width", 0.0);
        if (c.contains("g0_db"))
            cls.g0_db_range = interval(c["g0_db"], what + ".g0_db");
        if (c.contains("d_c"))
            cls.d_c_range = interval(c["d_c"], what + ".d_c");
        if (c.contains("k"))
            cls.k_range = interval(c["k"], what + ".k");
        try {
            cls.validate();
        } catch (const ConfigError &e) {
            throw DataError(what + ": " + e.what());
        }
        out.classes.push_back(cls);
    }
    return out;
}

inline json params_to_json(const ModelParameters &p)
{
    json j;
    j["angular"] = {{"xi", p.angular.xi},
                    {"delta_theta1", p.angular.delta_theta1},
                    {"delta_theta2", p.angular.delta_theta2}};
    j["classes"] = json::array();
    for (const auto &c : p.classes)
        j["classes"].push_back({{"name", c.name},
                                {"kind", kind_to_string(c.kind)},
                                {"order", c.order},
                                {"intensity", c.intensity},
                                {"band_width", c.band_width},
                                {"g0_db", {c.g0_db_range.lo, c.g0_db_range.hi}},
                                {"d_c", {c.d_c_range.lo, c.d_c_range.hi}},
                                {"k", {c.k_range.lo, c.k_range.hi}}});
    return j;
}

inline ModelParameters load_params(const std::string &path)
{
    return params_from_json(detail::parse_json(read_file(path), path));
}

inline ModelParameters default_model_parameters()
{
    ModelParameters p;
    p.classes = default_scatterer_classes();
    return p;
}

// ---------------------------------------------------------------------------
// Delimited text: trajectories and delay tracks.

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string &line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_double(const std::string &s, const std::string &where)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception &) {
        throw DataError(where + ": not a number: '" + s + "'");
    }
}

} // namespace detail

// Header `t,x,y,heading`; seconds / meters / radians.
inline VehicleTrajectory load_trajectory(const std::string &path)
{
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line))
        throw DataError(path + ": empty trajectory file");
    auto header = detail::split_csv_line(line);
    if (header.size() < 4 || header[0] != "t" || header[1] != "x" || header[2] != "y" ||
        header[3] != "heading")
        throw DataError(path + ": expected header 't,x,y,heading'");
    VehicleTrajectory traj;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty() || line == "\r")
            continue;
        const auto f = detail::split_csv_line(line);
        const std::string where = path + ":" + std::to_string(n);
        if (f.size() < 4)
            throw DataError(where + ": expected 4 columns");
        TrajectorySample s;
        s.t = detail::parse_double(f[0], where);
        s.position = Vec2(detail::parse_double(f[1], where), detail::parse_double(f[2], where));
        s.heading = detail::parse_double(f[3], where);
        traj.samples.push_back(s);
    }
    try {
        traj.validate();
    } catch (const ConfigError &e) {
        throw DataError(path + ": " + e.what());
    }
    return traj;
}

struct TrackData {
    std::vector<double> t; // seconds
    std::vector<double> d; // meters
    std::vector<double> power;  // linear; empty if absent
    std::vector<double> theta1; // radians; empty if absent
    std::vector<double> theta2;
};

// Header `t,d[,power,theta1,theta2]`.
inline TrackData load_track(const std::string &path)
{
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line))
        throw DataError(path + ": empty track file");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "t" || header[1] != "d")
        throw DataError(path + ": expected header 't,d[,power,theta1,theta2]'");
    const bool has_power = header.size() >= 3;
    const bool has_angles = header.size() >= 5;
    TrackData out;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty() || line == "\r")
            continue;
        const auto f = detail::split_csv_line(line);
        const std::string where = path + ":" + std::to_string(n);
        if (f.size() < header.size())
            throw DataError(where + ": expected " + std::to_string(header.size()) + " columns");
        out.t.push_back(detail::parse_double(f[0], where));
        out.d.push_back(detail::parse_double(f[1], where));
        if (has_power)
            out.power.push_back(detail::parse_double(f[2], where));
        if (has_angles) {
            out.theta1.push_back(detail::parse_double(f[3], where));
            out.theta2.push_back(detail::parse_double(f[4], where));
        }
    }
    for (std::size_t i = 1; i < out.t.size(); ++i)
        if (out.t[i] < out.t[i - 1])
            throw DataError(path + ": timestamps must be nondecreasing");
    return out;
}

// ---------------------------------------------------------------------------
// Scatterer realization: JSON, exact replay (doubles round-trip losslessly).

inline json realization_to_json(const ScattererRealization &r,
                                const std::string &map_hash = "")
{
    json j;
    j["version"] = kVersion;
    j["seed"] = r.rng_seed;
    if (!map_hash.empty())
        j["map_hash"] = map_hash;
    j["classes"] = params_to_json({r.classes, {}})["classes"];
    j["scatterers"] = json::array();
    for (const auto &s : r.scatterers)
        j["scatterers"].push_back({{"location", detail::vec2_to(s.location)},
                                   {"class_index", s.class_index},
                                   {"normal", detail::vec2_to(s.normal)},
                                   {"g0_db", s.g0_db},
                                   {"d_c", s.d_c},
                                   {"k", s.k},
                                   {"theta", s.theta},
                                   {"phase", s.initial_phase}});
    return j;
}

inline ScattererRealization realization_from_json(const json &j)
{
    ScattererRealization r;
    if (!j.is_object() || !j.contains("scatterers"))
        throw DataError("realization: expected a \"scatterers\" array");
    if (j.contains("seed"))
        r.rng_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("classes"))
        r.classes = params_from_json(json{{"classes", j["classes"]}}).classes;
    std::size_t i = 0;
    for (const auto &s : j["scatterers"]) {
        const std::string what = "realization.scatterers[" + std::to_string(i++) + "]";
        Scatterer sc;
        sc.location = detail::vec2_from(s.at("location"), what + ".location");
        sc.class_index = s.value("class_index", std::size_t(0));
        sc.normal = detail::vec2_from(s.at("normal"), what + ".normal");
        sc.g0_db = s.at("g0_db").get<double>();
        sc.d_c = s.at("d_c").get<double>();
        sc.k = s.at("k").get<double>();
        sc.theta = s.at("theta").get<double>();
        sc.initial_phase = s.at("phase").get<double>();
        r.scatterers.push_back(sc);
    }
    return r;
}

inline void save_realization(const std::string &path, const ScattererRealization &r,
                             const std::string &map_hash = "")
{
    write_file(path, realization_to_json(r, map_hash).dump(2) + "\n");
}

inline ScattererRealization load_realization(const std::string &path)
{
    try {
        return realization_from_json(detail::parse_json(read_file(path), path));
    } catch (const json::exception &e) {
        throw DataError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Tensor container: magic, structured-text header, little-endian complex128
// payload in row-major (frequency, time, rx, tx) order.

inline constexpr char kTensorMagic[8] = {'G', 'S', 'C', 'M', 'C', 'H', '0', '1'};

namespace detail {

inline bool host_is_little_endian()
{
    const std::uint16_t v = 1;
    unsigned char b;
    std::memcpy(&b, &v, 1);
    return b == 1;
}

} // namespace detail

inline void save_tensor(const std::string &path, const ChannelTensor &t)
{
    json header;
    header["version"] = kVersion;
    header["seed"] = t.seed;
    header["freq_axis"] = t.freq_axis;
    header["time_axis"] = t.time_axis;
    header["n_rx"] = t.n_rx;
    header["n_tx"] = t.n_tx;
    header["dtype"] = "complex128";
    header["order"] = "freq,time,rx,tx";
    header["endianness"] = "little";
    if (!t.map_id.empty())
        header["map_hash"] = t.map_id;
    if (!t.param_id.empty())
        header["param_hash"] = t.param_id;
    const std::string htext = header.dump();

    std::string out;
    out.reserve(sizeof(kTensorMagic) + 8 + htext.size() + 16 * t.values.size());
    out.append(kTensorMagic, sizeof(kTensorMagic));
    const std::uint64_t hlen = htext.size();
    char lenbuf[8];
    for (int i = 0; i < 8; ++i)
        lenbuf[i] = char((hlen >> (8 * i)) & 0xff);
    out.append(lenbuf, 8);
    out += htext;
    if (!detail::host_is_little_endian())
        throw NumericalError("tensor writer requires a little-endian host");
    const char *payload = reinterpret_cast<const char *>(t.values.data());
    out.append(payload, 16 * t.values.size());
    write_file(path, out);
}

inline ChannelTensor load_tensor(const std::string &path)
{
    const std::string raw = read_file(path);
    if (raw.size() < sizeof(kTensorMagic) + 8 ||
        std::memcmp(raw.data(), kTensorMagic, sizeof(kTensorMagic)) != 0)
        throw DataError(path + ": not a channel tensor file (bad magic)");
    std::uint64_t hlen = 0;
    for (int i = 0; i < 8; ++i)
        hlen |= std::uint64_t(static_cast<unsigned char>(raw[sizeof(kTensorMagic) + i]))
                << (8 * i);
    const std::size_t hstart = sizeof(kTensorMagic) + 8;
    if (hstart + hlen > raw.size())
        throw DataError(path + ": truncated header");
    const json header = detail::parse_json(raw.substr(hstart, hlen), path + " header");
    ChannelTensor t;
    auto require = [&](const char *field) -> const json & {
        if (!header.contains(field))
            throw DataError(path + ": header missing field '" + field + "'");
        return header[field];
    };
    t.seed = require("seed").get<std::uint64_t>();
    t.freq_axis = require("freq_axis").get<std::vector<double>>();
    t.time_axis = require("time_axis").get<std::vector<double>>();
    t.n_rx = require("n_rx").get<std::size_t>();
    t.n_tx = require("n_tx").get<std::size_t>();
    if (require("dtype").get<std::string>() != "complex128")
        throw DataError(path + ": header field 'dtype' must be complex128");
    if (require("endianness").get<std::string>() != "little")
        throw DataError(path + ": header field 'endianness' must be little");
    t.map_id = header.value("map_hash", "");
    t.param_id = header.value("param_hash", "");
    const std::size_t n =
        t.freq_axis.size() * t.time_axis.size() * t.n_rx * t.n_tx;
    const std::size_t pstart = hstart + hlen;
    if (raw.size() - pstart != 16 * n)
        throw DataError(path + ": payload size does not match header axes");
    if (!detail::host_is_little_endian())
        throw NumericalError("tensor reader requires a little-endian host");
    t.values.resize(n);
    std::memcpy(t.values.data(), raw.data() + pstart, 16 * n);
    return t;
}

// Delimited magnitude/phase fallback for small tensors.
inline void save_tensor_text(const std::string &path, const ChannelTensor &t)
{
    std::ostringstream out;
    out.precision(17);
    out << "# version " << kVersion << " seed " << t.seed << "\n";
    out << "freq_index,time_index,rx,tx,freq_hz,time_s,magnitude,phase_rad\n";
    for (std::size_t f = 0; f < t.freq_axis.size(); ++f)
        for (std::size_t n = 0; n < t.time_axis.size(); ++n)
            for (std::size_t r = 0; r < t.n_rx; ++r)
                for (std::size_t x = 0; x < t.n_tx; ++x) {
                    const Complex v = t.at(f, n, r, x);
                    out << f << ',' << n << ',' << r << ',' << x << ',' << t.freq_axis[f] << ','
                        << t.time_axis[n] << ',' << std::abs(v) << ',' << std::arg(v) << "\n";
                }
    write_file(path, out.str());
}

} // namespace gscm
