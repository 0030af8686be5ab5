// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "gscm/core.hpp"

namespace gscm {

struct WallSegment {
    Vec2 p0;
    Vec2 p1;
    Vec2 normal; // unit, perpendicular to p1-p0, pointing into the street

    WallSegment() = default;
    WallSegment(const Vec2 &a, const Vec2 &b, const Vec2 &n) : p0(a), p1(b), normal(n)
    {
        if ((p1 - p0).norm() < 1e-12)
            throw UsageError("degenerate wall segment: p0 == p1");
        if (std::abs(normal.norm() - 1.0) > 1e-9)
            throw UsageError("wall normal must be a unit vector");
        if (std::abs(normal.dot(p1 - p0)) > 1e-9 * (p1 - p0).norm())
            throw UsageError("wall normal must be perpendicular to the segment");
    }
};

struct Polygon {
    std::vector<Vec2> vertices; // simple polygon, either winding

    double area() const
    {
        double a = 0.0;
        const std::size_t n = vertices.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 &u = vertices[i];
            const Vec2 &v = vertices[(i + 1) % n];
            a += u.x() * v.y() - v.x() * u.y();
        }
        return 0.5 * std::abs(a);
    }
};

using BuildingPolygon = Polygon;

enum class AreaKind { scattering, foliage };

struct AreaPolygon {
    Polygon poly;
    AreaKind kind = AreaKind::scattering;
};

struct TrajectorySample {
    double t = 0.0; // seconds
    Vec2 position{0.0, 0.0};
    double heading = 0.0; // radians, world frame
};

struct VehicleTrajectory {
    std::vector<TrajectorySample> samples;

    void validate() const
    {
        if (samples.empty())
            throw ConfigError("trajectory has no samples");
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (!(samples[i].t > samples[i - 1].t))
                throw ConfigError("trajectory timestamps must be strictly increasing");
    }

    double t_begin() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }

    // Linear position interpolation, shortest-arc heading interpolation.
    TrajectorySample at(double t) const
    {
        if (samples.size() == 1) {
            if (std::abs(t - samples.front().t) > 1e-12)
                throw DataError("time outside trajectory span");
            return samples.front();
        }
        if (t < t_begin() - 1e-12 || t > t_end() + 1e-12)
            throw DataError("time outside trajectory span");
        t = std::clamp(t, t_begin(), t_end());
        auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const TrajectorySample &s, double tv) { return s.t < tv; });
        if (it == samples.begin())
            ++it;
        if (it == samples.end())
            --it;
        const TrajectorySample &b = *it;
        const TrajectorySample &a = *(it - 1);
        const double w = (t - a.t) / (b.t - a.t);
        TrajectorySample out;
        out.t = t;
        out.position = (1.0 - w) * a.position + w * b.position;
        double dh = std::remainder(b.heading - a.heading, 2.0 * M_PI);
        out.heading = a.heading + w * dh;
        return out;
    }
};

struct AntennaElement {
    Vec2 offset{0.0, 0.0}; // vehicle frame, meters
    // Complex amplitude gain sampled uniformly over azimuth [0, 2pi) in the
    // vehicle frame; empty means isotropic (gain 1+0j).
    std::vector<std::complex<double>> pattern;

    std::complex<double> gain(double azimuth_vehicle_frame) const
    {
        if (pattern.empty())
            return {1.0, 0.0};
        const std::size_t n = pattern.size();
        double u = azimuth_vehicle_frame / (2.0 * M_PI) * double(n);
        u -= std::floor(u / double(n)) * double(n);
        const std::size_t i0 = std::size_t(u) % n;
        const std::size_t i1 = (i0 + 1) % n;
        const double w = u - std::floor(u);
        return (1.0 - w) * pattern[i0] + w * pattern[i1];
    }
};

struct AntennaLayout {
    std::vector<AntennaElement> elements;

    void validate() const
    {
        if (elements.empty())
            throw ConfigError("antenna layout needs at least one element");
    }
};

struct IntersectionMap {
    std::vector<WallSegment> walls;
    std::vector<BuildingPolygon> buildings;
    std::vector<AreaPolygon> scattering_areas; // user polygons, not wall bands
    std::vector<AreaPolygon> foliage_areas;

    void validate() const
    {
        for (const auto &b : buildings)
            if (b.vertices.size() < 3)
                throw ConfigError("building polygon needs at least 3 vertices");
        for (const auto &a : scattering_areas)
            if (a.poly.vertices.size() < 3)
                throw ConfigError("scattering area polygon needs at least 3 vertices");
        for (const auto &a : foliage_areas)
            if (a.poly.vertices.size() < 3)
                throw ConfigError("foliage area polygon needs at least 3 vertices");
    }
};

namespace detail {

inline double cross2(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

inline constexpr double kGeomEps = 1e-9;

// Intersection parameters t on segment a0-a1 where it meets segment b0-b1.
// Returns intersections (including touching and collinear overlap endpoints)
// as parameters in [0,1].
inline void segment_intersection_params(const Vec2 &a0, const Vec2 &a1, const Vec2 &b0,
                                        const Vec2 &b1, std::vector<double> &out)
{
    const Vec2 r = a1 - a0;
    const Vec2 s = b1 - b0;
    const double denom = cross2(r, s);
    const double scale = std::max({1.0, r.norm(), s.norm(), (b0 - a0).norm()});
    const double eps = kGeomEps * scale;
    if (std::abs(denom) > eps * eps) {
        const double t = cross2(b0 - a0, s) / denom;
        const double u = cross2(b0 - a0, r) / denom;
        const double ta = eps / std::max(r.norm(), eps);
        const double tb = eps / std::max(s.norm(), eps);
        if (t >= -ta && t <= 1.0 + ta && u >= -tb && u <= 1.0 + tb)
            out.push_back(std::clamp(t, 0.0, 1.0));
        return;
    }
    // Parallel; check collinearity.
    if (std::abs(cross2(b0 - a0, r)) > eps * std::max(r.norm(), 1.0))
        return;
    const double rr = r.squaredNorm();
    if (rr < eps * eps)
        return;
    double t0 = (b0 - a0).dot(r) / rr;
    double t1 = (b1 - a0).dot(r) / rr;
    if (t0 > t1)
        std::swap(t0, t1);
    t0 = std::max(t0, 0.0);
    t1 = std::min(t1, 1.0);
    if (t0 <= t1 + 1e-12) {
        out.push_back(std::clamp(t0, 0.0, 1.0));
        out.push_back(std::clamp(t1, 0.0, 1.0));
    }
}

} // namespace detail

// Even-odd point-in-polygon; points on the boundary count as inside.
inline bool point_in_polygon(const Vec2 &p, const Polygon &poly)
{
    const std::size_t n = poly.vertices.size();
    if (n < 3)
        throw ConfigError("degenerate polygon (<3 vertices)");
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 &a = poly.vertices[j];
        const Vec2 &b = poly.vertices[i];
        // Boundary check: p within the segment a-b.
        const Vec2 ab = b - a;
        const double len = ab.norm();
        if (len > 0.0) {
            const double d = std::abs(detail::cross2(ab, p - a)) / len;
            const double proj = (p - a).dot(ab) / (len * len);
            if (d <= detail::kGeomEps * std::max(1.0, len) && proj >= -1e-12 && proj <= 1.0 + 1e-12)
                return true;
        }
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x)
                inside = !inside;
        }
    }
    return inside;
}

inline bool on_boundary(const Vec2 &p, const Polygon &poly)
{
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 &a = poly.vertices[j];
        const Vec2 &b = poly.vertices[i];
        const Vec2 ab = b - a;
        const double len = ab.norm();
        if (len <= 0.0)
            continue;
        const double d = std::abs(detail::cross2(ab, p - a)) / len;
        const double proj = (p - a).dot(ab) / (len * len);
        if (d <= detail::kGeomEps * std::max(1.0, len) && proj >= -1e-12 && proj <= 1.0 + 1e-12)
            return true;
    }
    return false;
}

// Open-segment vs single polygon obstruction test. Boundary contact at an
// interior parameter counts; contact only at the segment endpoints does not.
inline bool segment_obstructed_one(const Vec2 &a, const Vec2 &b, const BuildingPolygon &poly)
{
    const std::size_t n = poly.vertices.size();
    if (n < 3)
        throw ConfigError("degenerate polygon (<3 vertices)");
    const double len = (b - a).norm();
    const double tend = detail::kGeomEps * std::max(1.0, 1.0 / len); // endpoint exclusion in t
    std::vector<double> params;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        detail::segment_intersection_params(a, b, poly.vertices[j], poly.vertices[i], params);
    for (double t : params)
        if (t > tend && t < 1.0 - tend)
            return true;
    // Boundary contact, if any, only at the endpoints; the open segment is
    // either fully inside or fully outside: test the midpoint.
    const Vec2 mid = 0.5 * (a + b);
    if (params.empty())
        return point_in_polygon(mid, poly);
    return point_in_polygon(mid, poly) && !on_boundary(mid, poly);
}

// True iff the open segment (a,b) meets the interior or boundary of any
// building. Endpoints sitting exactly on a boundary do not count by
// themselves (scatterers live on facades).
inline bool segment_obstructed(const Vec2 &a, const Vec2 &b,
                               const std::vector<BuildingPolygon> &buildings)
{
    if ((b - a).norm() < 1e-12)
        throw UsageError("segment endpoints coincide");
    for (const auto &poly : buildings)
        if (segment_obstructed_one(a, b, poly))
            return true;
    return false;
}

// Product of per-leg blockage indicators over an ordered interaction chain.
inline int path_blockage_gain(const std::vector<Vec2> &points,
                              const std::vector<BuildingPolygon> &buildings)
{
    if (points.size() < 2)
        throw UsageError("path needs at least 2 points");
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        if (segment_obstructed(points[i], points[i + 1], buildings))
            return 0;
    return 1;
}

// Signed incidence/departure angles relative to the scatterer normal.
// b points from the scatterer toward the previous interaction, a toward the
// next; normal incidence on both sides yields (0, 0).
inline std::pair<double, double> incidence_angles(const Vec2 &prev, const Vec2 &scat,
                                                  const Vec2 &next, const Vec2 &normal)
{
    const Vec2 b = prev - scat;
    const Vec2 a = next - scat;
    if (b.norm() < 1e-12 || a.norm() < 1e-12)
        throw UsageError("zero-length vector in incidence_angles");
    const double nx = normal.x(), ny = normal.y();
    const double theta1 = std::atan2(b.y() * nx - b.x() * ny, b.x() * nx + b.y() * ny);
    const double theta2 = std::atan2(a.x() * ny - a.y() * nx, a.x() * nx + a.y() * ny);
    return {theta1, theta2};
}

inline Vec2 antenna_world_position(const TrajectorySample &s, const Vec2 &offset)
{
    const double c = std::cos(s.heading), sn = std::sin(s.heading);
    return s.position + Vec2(c * offset.x() - sn * offset.y(), sn * offset.x() + c * offset.y());
}

struct DiffractionGeometry {
    double phi = 0.0; // bending angle, radians
    double d1 = 0.0;  // Tx to corner, meters
    double d2 = 0.0;  // corner to Rx, meters
    Vec2 corner{0.0, 0.0};
};

// Dominant single knife edge for an obstructed LOS: among building corners
// with both sub-legs clear, the one with the smallest bending angle. Empty
// optional means the direct segment is clear. A deeply shadowed link with no
// usable corner saturates at phi = pi/2.
inline std::optional<DiffractionGeometry>
los_diffraction_geometry(const Vec2 &tx, const Vec2 &rx,
                         const std::vector<BuildingPolygon> &buildings)
{
    if ((rx - tx).norm() < 1e-12)
        throw UsageError("tx == rx");
    if (!segment_obstructed(tx, rx, buildings))
        return std::nullopt;
    std::optional<DiffractionGeometry> best;
    for (const auto &poly : buildings) {
        for (const Vec2 &v : poly.vertices) {
            const double d1 = (tx - v).norm();
            const double d2 = (rx - v).norm();
            if (d1 < 1e-9 || d2 < 1e-9)
                continue;
            if (segment_obstructed(tx, v, buildings) || segment_obstructed(v, rx, buildings))
                continue;
            const Vec2 u = (tx - v) / d1;
            const Vec2 w = (rx - v) / d2;
            const double phi = M_PI - std::atan2(std::abs(detail::cross2(u, w)), u.dot(w));
            if (!best || phi < best->phi) {
                best = DiffractionGeometry{phi, d1, d2, v};
            }
        }
    }
    if (!best) {
        DiffractionGeometry deep;
        deep.phi = M_PI / 2.0;
        deep.d1 = 0.5 * (rx - tx).norm();
        deep.d2 = deep.d1;
        deep.corner = 0.5 * (tx + rx);
        return deep;
    }
    return best;
}

// Rectangular scattering band in front of a wall.
inline AreaPolygon wall_scattering_area(const WallSegment &wall, double width)
{
    if (width <= 0.0)
        throw UsageError("scattering band width must be positive");
    AreaPolygon area;
    area.kind = AreaKind::scattering;
    area.poly.vertices = {wall.p0, wall.p1, wall.p1 + wall.normal * width,
                          wall.p0 + wall.normal * width};
    return area;
}

// Total length of the polyline's traversal through the union of the given
// polygons.
inline double foliage_traversal(const std::vector<Vec2> &points,
                                const std::vector<AreaPolygon> &foliage_areas)
{
    double total = 0.0;
    std::vector<double> cuts;
    std::vector<std::pair<double, double>> intervals;
    for (std::size_t leg = 0; leg + 1 < points.size(); ++leg) {
        const Vec2 &a = points[leg];
        const Vec2 &b = points[leg + 1];
        const double len = (b - a).norm();
        if (len < 1e-12)
            continue;
        intervals.clear();
        for (const auto &area : foliage_areas) {
            const auto &poly = area.poly;
            const std::size_t n = poly.vertices.size();
            cuts.clear();
            cuts.push_back(0.0);
            cuts.push_back(1.0);
            for (std::size_t i = 0, j = n - 1; i < n; j = i++)
                detail::segment_intersection_params(a, b, poly.vertices[j], poly.vertices[i], cuts);
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const double t0 = cuts[i], t1 = cuts[i + 1];
                if (t1 - t0 < 1e-12)
                    continue;
                const Vec2 mid = a + 0.5 * (t0 + t1) * (b - a);
                if (point_in_polygon(mid, poly))
                    intervals.emplace_back(t0, t1);
            }
        }
        if (intervals.empty())
            continue;
        std::sort(intervals.begin(), intervals.end());
        double cur0 = intervals[0].first, cur1 = intervals[0].second;
        for (std::size_t i = 1; i < intervals.size(); ++i) {
            if (intervals[i].first <= cur1 + 1e-12) {
                cur1 = std::max(cur1, intervals[i].second);
            } else {
                total += (cur1 - cur0) * len;
                cur0 = intervals[i].first;
                cur1 = intervals[i].second;
            }
        }
        total += (cur1 - cur0) * len;
    }
    return total;
}

// Precomputed per-building bounding boxes for repeated obstruction queries.
// Same semantics as segment_obstructed.
class ObstructionIndex {
  public:
    explicit ObstructionIndex(const std::vector<BuildingPolygon> &buildings)
        : buildings_(&buildings)
    {
        boxes_.reserve(buildings.size());
        for (const auto &poly : buildings) {
            Vec2 lo = poly.vertices.front(), hi = poly.vertices.front();
            for (const auto &v : poly.vertices) {
                lo = lo.cwiseMin(v);
                hi = hi.cwiseMax(v);
            }
            boxes_.push_back({lo, hi});
        }
    }

    bool obstructed(const Vec2 &a, const Vec2 &b) const
    {
        const Vec2 slo = a.cwiseMin(b);
        const Vec2 shi = a.cwiseMax(b);
        for (std::size_t i = 0; i < boxes_.size(); ++i) {
            const auto &[lo, hi] = boxes_[i];
            if (shi.x() < lo.x() - 1e-9 || slo.x() > hi.x() + 1e-9 || shi.y() < lo.y() - 1e-9 ||
                slo.y() > hi.y() + 1e-9)
                continue;
            if (segment_obstructed_one(a, b, (*buildings_)[i]))
                return true;
        }
        return false;
    }

  private:
    const std::vector<BuildingPolygon> *buildings_;
    std::vector<std::pair<Vec2, Vec2>> boxes_;
};

struct BoundingBox {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{0.0, 0.0};
    bool valid = false;

    void include(const Vec2 &p)
    {
        if (!valid) {
            lo = hi = p;
            valid = true;
            return;
        }
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    double area() const { return valid ? (hi - lo).prod() : 0.0; }
};

inline BoundingBox map_bounding_box(const IntersectionMap &map, double wall_band_width)
{
    BoundingBox box;
    for (const auto &w : map.walls) {
        box.include(w.p0);
        box.include(w.p1);
        box.include(w.p0 + w.normal * wall_band_width);
        box.include(w.p1 + w.normal * wall_band_width);
    }
    for (const auto &b : map.buildings)
        for (const auto &v : b.vertices)
            box.include(v);
    for (const auto &a : map.scattering_areas)
        for (const auto &v : a.poly.vertices)
            box.include(v);
    for (const auto &a : map.foliage_areas)
        for (const auto &v : a.poly.vertices)
            box.include(v);
    return box;
}

} // namespace gscm
