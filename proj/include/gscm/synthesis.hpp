// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "gscm/fading.hpp"
#include "gscm/geometry.hpp"
#include "gscm/path_gain.hpp"
#include "gscm/scatterer_field.hpp"

namespace gscm {

using Complex = std::complex<double>;

struct PathGeometryResult {
    double d = 0.0;   // meters
    double tau = 0.0; // seconds
    double theta1 = 0.0;
    double theta2 = 0.0;
    bool has_angles = false; // false for the direct path
};

// Polyline length, delay and incidence angles for a (possibly scattered)
// path. Every scatterer is a single interaction point regardless of its
// order label; order selects the parameter class only.
inline PathGeometryResult path_geometry(const Vec2 &tx, const Scatterer *scatterer,
                                        const Vec2 &rx)
{
    PathGeometryResult out;
    if (scatterer == nullptr) {
        out.d = (rx - tx).norm();
        if (out.d < 1e-12)
            throw UsageError("path_geometry: coincident Tx and Rx");
        out.tau = out.d / kSpeedOfLight;
        return out;
    }
    const double d1 = (scatterer->location - tx).norm();
    const double d2 = (rx - scatterer->location).norm();
    if (d1 < 1e-12 || d2 < 1e-12)
        throw UsageError("path_geometry: interaction point coincides with an endpoint");
    out.d = d1 + d2;
    out.tau = out.d / kSpeedOfLight;
    auto [t1, t2] = incidence_angles(tx, scatterer->location, rx, scatterer->normal);
    out.theta1 = t1;
    out.theta2 = t2;
    out.has_angles = true;
    return out;
}

enum class PathClass { los, wall1, wall2, wall3, non_wall, diffuse };

struct PathComponent {
    PathClass cls = PathClass::los;
    const Scatterer *scatterer = nullptr; // null for LOS
    double initial_phase = 0.0;
    double psi = 1.0; // fading value at the current snapshot
};

// Complex path amplitude at one snapshot; the propagation phase term
// exp(-j 2 pi f tau) is applied by transfer_function, not here.
struct PathAmplitudeInputs {
    double d = 0.0;
    double g0_db = 0.0;
    double g_a = 1.0;
    double g_b = 1.0; // binary for scattered paths, diffraction factor for LOS
    double l_p_db = 0.0;
};

inline Complex path_amplitude(const PathAmplitudeInputs &in, double psi, double initial_phase)
{
    const double power = average_path_power(in.d, in.g0_db, in.g_a, in.g_b, in.l_p_db) * psi;
    const double amp = std::sqrt(power);
    return Complex(amp * std::cos(initial_phase), amp * std::sin(initial_phase));
}

struct EvaluatedPath {
    Complex amplitude{0.0, 0.0};
    double tau = 0.0;
    double departure_azimuth = 0.0; // world frame, at Tx
    double arrival_azimuth = 0.0;   // world frame, at Rx (toward last interaction)
};

// Sum of Eq-18 style phasors over live paths for a single antenna pair.
inline Complex transfer_function(const std::vector<EvaluatedPath> &paths, double f,
                                 const AntennaElement &tx_el, const AntennaElement &rx_el,
                                 double tx_heading, double rx_heading)
{
    Complex h{0.0, 0.0};
    for (const auto &p : paths) {
        const double phase = -2.0 * M_PI * f * p.tau;
        const Complex prop(std::cos(phase), std::sin(phase));
        const Complex gtx = tx_el.gain(p.departure_azimuth - tx_heading);
        const Complex grx = rx_el.gain(p.arrival_azimuth - rx_heading);
        h += p.amplitude * prop * gtx * grx;
    }
    return h;
}

struct ChannelTensor {
    // Row-major over (frequency, time, rx element, tx element).
    std::vector<Complex> values;
    std::vector<double> freq_axis; // Hz
    std::vector<double> time_axis; // seconds
    std::size_t n_rx = 0;
    std::size_t n_tx = 0;
    std::uint64_t seed = 0;
    std::string map_id;
    std::string param_id;

    std::size_t index(std::size_t f, std::size_t t, std::size_t r, std::size_t x) const
    {
        return ((f * time_axis.size() + t) * n_rx + r) * n_tx + x;
    }
    Complex &at(std::size_t f, std::size_t t, std::size_t r, std::size_t x)
    {
        return values[index(f, t, r, x)];
    }
    const Complex &at(std::size_t f, std::size_t t, std::size_t r, std::size_t x) const
    {
        return values[index(f, t, r, x)];
    }
};

struct SimulationConfig {
    AngularGainParams<double> angular; // shared by all scatterer classes
    double band_lo_hz = 5.2e9;
    double band_hi_hz = 6.2e9;
};

inline PathClass path_class_for(const ScattererClass &cls)
{
    switch (cls.kind) {
    case ScattererKind::wall:
        return cls.order == 1 ? PathClass::wall1 : (cls.order == 2 ? PathClass::wall2 : PathClass::wall3);
    case ScattererKind::non_wall:
        return PathClass::non_wall;
    default:
        return PathClass::diffuse;
    }
}

// Full scenario synthesis. Deterministic given (realization, seed); the seed
// drives only the per-path fading streams.
inline ChannelTensor simulate(const IntersectionMap &map, const ScattererRealization &realization,
                              const VehicleTrajectory &traj_tx, const VehicleTrajectory &traj_rx,
                              const AntennaLayout &tx_layout, const AntennaLayout &rx_layout,
                              const std::vector<double> &freq_grid,
                              const std::vector<double> &time_grid, std::uint64_t seed,
                              const SimulationConfig &config = {},
                              std::vector<std::string> *warnings = nullptr)
{
    if (freq_grid.empty() || time_grid.empty())
        throw UsageError("simulate: frequency and time grids must be nonempty");
    map.validate();
    traj_tx.validate();
    traj_rx.validate();
    tx_layout.validate();
    rx_layout.validate();
    for (double t : time_grid)
        if (t < traj_tx.t_begin() - 1e-12 || t > traj_tx.t_end() + 1e-12 ||
            t < traj_rx.t_begin() - 1e-12 || t > traj_rx.t_end() + 1e-12)
            throw DataError("simulate: time grid outside trajectory span");
    for (double f : freq_grid)
        if ((f < config.band_lo_hz || f > config.band_hi_hz) && warnings) {
            warnings->push_back("frequency grid extends outside the supported band");
            break;
        }

    const double f_ref = 0.5 * (freq_grid.front() + freq_grid.back());
    const double lambda_ref = kSpeedOfLight / f_ref;
    const double g0_los_db = los_reference_gain(lambda_ref);

    const std::size_t n_f = freq_grid.size();
    const std::size_t n_t = time_grid.size();
    const std::size_t n_rx = rx_layout.elements.size();
    const std::size_t n_tx = tx_layout.elements.size();

    ChannelTensor tensor;
    tensor.freq_axis = freq_grid;
    tensor.time_axis = time_grid;
    tensor.n_rx = n_rx;
    tensor.n_tx = n_tx;
    tensor.seed = seed;
    tensor.values.assign(n_f * n_t * n_rx * n_tx, Complex(0.0, 0.0));

    // Fading increments: summed Tx+Rx vehicle displacement between snapshots.
    std::vector<double> increments(n_t > 0 ? n_t - 1 : 0, 0.0);
    std::vector<TrajectorySample> tx_samples(n_t), rx_samples(n_t);
    for (std::size_t n = 0; n < n_t; ++n) {
        tx_samples[n] = traj_tx.at(time_grid[n]);
        rx_samples[n] = traj_rx.at(time_grid[n]);
    }
    for (std::size_t n = 0; n + 1 < n_t; ++n)
        increments[n] = (tx_samples[n + 1].position - tx_samples[n].position).norm() +
                        (rx_samples[n + 1].position - rx_samples[n].position).norm();

    // Per-scatterer fading sequences over the snapshot grid. The LOS path is
    // deterministic (no fading parameters are defined for it).
    const std::size_t n_paths = realization.scatterers.size();
    std::vector<std::vector<double>> fading(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        const Scatterer &s = realization.scatterers[p];
        GammaFadingParams<double> fp{s.k, s.theta, s.d_c};
        // Stream keyed by the scatterer itself, not its index, so that
        // simulating a union of scatterer sets superposes the tensors.
        auto key = [](double v) {
            std::uint64_t u;
            std::memcpy(&u, &v, sizeof(u));
            return u;
        };
        auto rng = substream(seed, {0x70617468ULL, key(s.location.x()), key(s.location.y()),
                                    key(s.initial_phase)});
        fading[p] = generate_fading_sequence(increments, fp, rng);
    }

    const ObstructionIndex obstruction(map.buildings);
    std::vector<EvaluatedPath> live;
    live.reserve(n_paths + 1);
    std::vector<Vec2> polyline(3);

    for (std::size_t n = 0; n < n_t; ++n) {
        for (std::size_t r = 0; r < n_rx; ++r) {
            for (std::size_t x = 0; x < n_tx; ++x) {
                const Vec2 tx_pos = antenna_world_position(tx_samples[n], tx_layout.elements[x].offset);
                const Vec2 rx_pos = antenna_world_position(rx_samples[n], rx_layout.elements[r].offset);
                live.clear();

                // Direct path with knife-edge diffraction when obstructed.
                {
                    PathGeometryResult geo = path_geometry(tx_pos, nullptr, rx_pos);
                    double g_b = 1.0;
                    if (auto diff = los_diffraction_geometry(tx_pos, rx_pos, map.buildings)) {
                        const double nu = fresnel_nu(diff->phi, lambda_ref, diff->d1, diff->d2);
                        g_b = db_to_linear_amplitude(-knife_edge_loss(nu));
                    }
                    polyline.resize(2);
                    polyline[0] = tx_pos;
                    polyline[1] = rx_pos;
                    const double d_p = foliage_traversal(polyline, map.foliage_areas);
                    const double l_p = foliage_loss(f_ref, d_p);
                    PathAmplitudeInputs in{geo.d, g0_los_db, 1.0, g_b, l_p};
                    EvaluatedPath ep;
                    ep.amplitude = path_amplitude(in, 1.0, 0.0);
                    ep.tau = geo.tau;
                    const Vec2 dir = (rx_pos - tx_pos).normalized();
                    ep.departure_azimuth = std::atan2(dir.y(), dir.x());
                    ep.arrival_azimuth = std::atan2(-dir.y(), -dir.x());
                    live.push_back(ep);
                }

                for (std::size_t p = 0; p < n_paths; ++p) {
                    const Scatterer &s = realization.scatterers[p];
                    if (obstruction.obstructed(tx_pos, s.location) ||
                        obstruction.obstructed(s.location, rx_pos))
                        continue; // binary blockage kills the path
                    PathGeometryResult geo = path_geometry(tx_pos, &s, rx_pos);
                    const double g_a = angular_gain(geo.theta1, geo.theta2, config.angular);
                    polyline.resize(3);
                    polyline[0] = tx_pos;
                    polyline[1] = s.location;
                    polyline[2] = rx_pos;
                    const double d_p = foliage_traversal(polyline, map.foliage_areas);
                    const double l_p = foliage_loss(f_ref, d_p);
                    PathAmplitudeInputs in{geo.d, s.g0_db, g_a, 1.0, l_p};
                    EvaluatedPath ep;
                    ep.amplitude = path_amplitude(in, fading[p][n], s.initial_phase);
                    ep.tau = geo.tau;
                    const Vec2 out_dir = (s.location - tx_pos).normalized();
                    const Vec2 in_dir = (s.location - rx_pos).normalized();
                    ep.departure_azimuth = std::atan2(out_dir.y(), out_dir.x());
                    ep.arrival_azimuth = std::atan2(in_dir.y(), in_dir.x());
                    live.push_back(ep);
                }

                const double tx_heading = tx_samples[n].heading;
                const double rx_heading = rx_samples[n].heading;
                for (std::size_t fi = 0; fi < n_f; ++fi)
                    tensor.at(fi, n, r, x) =
                        transfer_function(live, freq_grid[fi], tx_layout.elements[x],
                                          rx_layout.elements[r], tx_heading, rx_heading);
            }
        }
    }
    return tensor;
}

} // namespace gscm
