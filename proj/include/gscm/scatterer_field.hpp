// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gscm/geometry.hpp"
#include "gscm/rng.hpp"

namespace gscm {

enum class ScattererKind { wall, non_wall, diffuse_wall, diffuse_non_wall };

inline bool is_wall_kind(ScattererKind k)
{
    return k == ScattererKind::wall || k == ScattererKind::diffuse_wall;
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    void validate(const char *what) const
    {
        if (!(lo <= hi))
            throw ConfigError(std::string("invalid interval for ") + what);
    }
};

struct ScattererClass {
    std::string name;
    ScattererKind kind = ScattererKind::wall;
    int order = 1;            // interaction order; selects the parameter class
    double intensity = 0.0;   // scatterers per m^2
    double band_width = 0.0;  // wall band depth, meters (wall kinds)
    Interval g0_db_range;     // dB
    Interval d_c_range;       // meters
    Interval k_range;         // dimensionless

    void validate() const
    {
        if (intensity <= 0.0)
            throw ConfigError("scatterer class intensity must be positive");
        if (is_wall_kind(kind) && band_width <= 0.0)
            throw ConfigError("wall scatterer class needs a positive band width");
        if (order < 1 || order > 3)
            throw ConfigError("interaction order must be 1, 2 or 3");
        g0_db_range.validate("G0");
        d_c_range.validate("d_c");
        k_range.validate("k");
        if (k_range.lo <= 0.0)
            throw ConfigError("k range must be positive");
    }
};

// Model defaults: wall reflections of orders 1-3, first-order non-wall and
// diffuse classes.
inline std::vector<ScattererClass> default_scatterer_classes()
{
    return {
        {"wall1", ScattererKind::wall, 1, 0.044, 3.0, {-65.0, -48.0}, {1.0, 2.0}, {2.0, 8.0}},
        {"wall2", ScattererKind::wall, 2, 0.044, 3.0, {-70.0, -59.0}, {0.0, 1.5}, {1.0, 6.0}},
        {"wall3", ScattererKind::wall, 3, 0.044, 3.0, {-75.0, -65.0}, {0.0, 1.0}, {1.0, 4.0}},
        {"non_wall", ScattererKind::non_wall, 1, 0.034, 0.0, {-68.0, -52.0}, {0.0, 1.0},
         {1.0, 6.0}},
        {"diffuse_wall", ScattererKind::diffuse_wall, 1, 0.61, 12.0, {-80.0, -68.0}, {0.0, 1.0},
         {1.0, 1.0}},
        {"diffuse_non_wall", ScattererKind::diffuse_non_wall, 1, 0.61, 0.0, {-80.0, -68.0},
         {0.0, 1.0}, {1.0, 1.0}},
    };
}

struct Scatterer {
    Vec2 location{0.0, 0.0};
    std::size_t class_index = 0;
    Vec2 normal{0.0, 1.0};
    double g0_db = 0.0;
    double d_c = 0.0;
    double k = 1.0;
    double theta = 1.0; // 1/k, unit-mean fading
    double initial_phase = 0.0;
};

struct ScattererRealization {
    std::vector<ScattererClass> classes;
    std::vector<Scatterer> scatterers;
    std::uint64_t rng_seed = 0;
};

struct ScattererParams {
    double g0_db, d_c, k, theta, phase;
};

inline ScattererParams draw_scatterer_params(const ScattererClass &cls, std::mt19937_64 &rng)
{
    auto uniform = [&rng](const Interval &iv) {
        if (iv.hi == iv.lo)
            return iv.lo;
        return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
    };
    ScattererParams p{};
    p.g0_db = uniform(cls.g0_db_range);
    p.d_c = uniform(cls.d_c_range);
    p.k = uniform(cls.k_range);
    p.theta = 1.0 / p.k;
    p.phase = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
    return p;
}

// Homogeneous Poisson draw over the map bounding box followed by rejection
// against the class's scattering areas. Wall kinds live in bands in front of
// each wall and inherit the wall normal; other kinds use the user polygons
// and get random normals.
inline ScattererRealization realize_scatterers(const IntersectionMap &map,
                                               const std::vector<ScattererClass> &classes,
                                               std::uint64_t seed)
{
    map.validate();
    for (const auto &c : classes)
        c.validate();

    double max_band = 0.0;
    for (const auto &c : classes)
        if (is_wall_kind(c.kind))
            max_band = std::max(max_band, c.band_width);
    const BoundingBox box = map_bounding_box(map, max_band);

    ScattererRealization out;
    out.classes = classes;
    out.rng_seed = seed;
    if (!box.valid)
        return out; // empty map, empty realization

    if (box.area() <= 0.0)
        throw ConfigError("map bounding box has zero area");

    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const ScattererClass &cls = classes[ci];
        auto rng = substream(seed, {ci});

        // Acceptance regions for this class.
        std::vector<AreaPolygon> areas;
        std::vector<Vec2> area_normals; // valid for wall kinds only
        if (is_wall_kind(cls.kind)) {
            for (const auto &w : map.walls) {
                areas.push_back(wall_scattering_area(w, cls.band_width));
                area_normals.push_back(w.normal);
            }
        } else {
            for (const auto &a : map.scattering_areas)
                areas.push_back(a);
        }
        if (areas.empty())
            continue;

        const double lambda = cls.intensity * box.area();
        const std::uint64_t count = std::poisson_distribution<std::uint64_t>(lambda)(rng);
        std::uniform_real_distribution<double> ux(box.lo.x(), box.hi.x());
        std::uniform_real_distribution<double> uy(box.lo.y(), box.hi.y());
        std::uniform_real_distribution<double> uang(0.0, 2.0 * M_PI);

        for (std::uint64_t i = 0; i < count; ++i) {
            const Vec2 p(ux(rng), uy(rng));
            std::size_t owner = areas.size();
            for (std::size_t ai = 0; ai < areas.size(); ++ai) {
                if (point_in_polygon(p, areas[ai].poly)) {
                    owner = ai;
                    break;
                }
            }
            if (owner == areas.size())
                continue;
            Scatterer s;
            s.location = p;
            s.class_index = ci;
            if (is_wall_kind(cls.kind)) {
                s.normal = area_normals[owner];
            } else {
                const double ang = uang(rng);
                s.normal = Vec2(std::cos(ang), std::sin(ang));
            }
            const ScattererParams pr = draw_scatterer_params(cls, rng);
            s.g0_db = pr.g0_db;
            s.d_c = pr.d_c;
            s.k = pr.k;
            s.theta = pr.theta;
            s.initial_phase = pr.phase;
            out.scatterers.push_back(s);
        }
    }
    return out;
}

} // namespace gscm
