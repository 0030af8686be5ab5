// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "gscm/core.hpp"
#include "gscm/synthesis.hpp"

namespace gscm {

struct ImpulseResponse {
    // Row-major over (delay, time).
    std::vector<Complex> values;
    std::vector<double> delay_axis; // seconds
    std::vector<double> time_axis;  // seconds

    std::size_t index(std::size_t q, std::size_t t) const { return q * time_axis.size() + t; }
    Complex &at(std::size_t q, std::size_t t) { return values[index(q, t)]; }
    const Complex &at(std::size_t q, std::size_t t) const { return values[index(q, t)]; }
};

namespace detail {

inline double frequency_spacing(const std::vector<double> &freq_axis)
{
    if (freq_axis.size() < 2)
        throw UsageError("need at least 2 frequency points");
    const double df = freq_axis[1] - freq_axis[0];
    if (df <= 0.0)
        throw UsageError("frequency axis must be increasing");
    for (std::size_t i = 1; i + 1 < freq_axis.size(); ++i)
        if (std::abs(freq_axis[i + 1] - freq_axis[i] - df) > 1e-6 * df)
            throw UsageError("frequency grid must be uniform");
    return df;
}

} // namespace detail

// Per-time inverse discrete transform of H(f, t) over the frequency axis for
// one antenna pair. Delay bin spacing is 1 / (M df); the unaliased span is
// 1 / df.
inline ImpulseResponse impulse_response(const ChannelTensor &tensor, std::size_t rx,
                                        std::size_t tx)
{
    const double df = detail::frequency_spacing(tensor.freq_axis);
    const std::size_t m = tensor.freq_axis.size();
    const std::size_t n_t = tensor.time_axis.size();
    ImpulseResponse h;
    h.time_axis = tensor.time_axis;
    h.delay_axis.resize(m);
    const double dtau = 1.0 / (double(m) * df);
    for (std::size_t q = 0; q < m; ++q)
        h.delay_axis[q] = double(q) * dtau;
    h.values.assign(m * n_t, Complex(0.0, 0.0));
    const double f0 = tensor.freq_axis.front();
    for (std::size_t t = 0; t < n_t; ++t) {
        for (std::size_t q = 0; q < m; ++q) {
            Complex acc(0.0, 0.0);
            for (std::size_t fi = 0; fi < m; ++fi) {
                const double phase = 2.0 * M_PI * (f0 + double(fi) * df) * h.delay_axis[q];
                acc += tensor.at(fi, t, rx, tx) * Complex(std::cos(phase), std::sin(phase));
            }
            h.at(q, t) = acc / double(m);
        }
    }
    return h;
}

// Forward counterpart of impulse_response, used to check the transform pair.
inline std::vector<Complex> frequency_response(const ImpulseResponse &h, std::size_t t,
                                               const std::vector<double> &freq_axis)
{
    std::vector<Complex> out(freq_axis.size(), Complex(0.0, 0.0));
    for (std::size_t fi = 0; fi < freq_axis.size(); ++fi) {
        Complex acc(0.0, 0.0);
        for (std::size_t q = 0; q < h.delay_axis.size(); ++q) {
            const double phase = -2.0 * M_PI * freq_axis[fi] * h.delay_axis[q];
            acc += h.at(q, t) * Complex(std::cos(phase), std::sin(phase));
        }
        out[fi] = acc;
    }
    return out;
}

struct PowerDelayProfile {
    double t_a = 0.0;
    std::vector<double> delays; // seconds
    std::vector<double> powers; // linear
    std::size_t window_n = 1;
};

// Windowed average of squared impulse-response magnitudes starting at the
// snapshot index t_start.
inline PowerDelayProfile pdp(const ImpulseResponse &h, std::size_t t_start, std::size_t window_n)
{
    if (window_n == 0)
        throw UsageError("pdp: window must contain at least one snapshot");
    if (t_start + window_n > h.time_axis.size())
        throw UsageError("pdp: window exceeds available snapshots");
    PowerDelayProfile p;
    p.t_a = h.time_axis[t_start];
    p.delays = h.delay_axis;
    p.window_n = window_n;
    p.powers.assign(h.delay_axis.size(), 0.0);
    for (std::size_t q = 0; q < h.delay_axis.size(); ++q) {
        double acc = 0.0;
        for (std::size_t n = 0; n < window_n; ++n)
            acc += std::norm(h.at(q, t_start + n));
        p.powers[q] = acc / double(window_n);
    }
    return p;
}

// Power-weighted standard deviation of the delay axis; nullopt when the
// profile carries no power.
inline std::optional<double> rms_delay_spread(const PowerDelayProfile &p)
{
    double ptot = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < p.powers.size(); ++i) {
        ptot += p.powers[i];
        m1 += p.powers[i] * p.delays[i];
        m2 += p.powers[i] * p.delays[i] * p.delays[i];
    }
    if (ptot <= 0.0)
        return std::nullopt;
    m1 /= ptot;
    m2 /= ptot;
    const double var = std::max(m2 - m1 * m1, 0.0);
    return std::sqrt(var);
}

inline std::optional<double> mean_delay(const PowerDelayProfile &p)
{
    double ptot = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < p.powers.size(); ++i) {
        ptot += p.powers[i];
        m1 += p.powers[i] * p.delays[i];
    }
    if (ptot <= 0.0)
        return std::nullopt;
    return m1 / ptot;
}

struct NoiseModel {
    double noise_floor = 1e-13;     // linear power per delay bin (-130 dB)
    double threshold_offset_db = 5.0;

    double threshold() const { return noise_floor * db_to_linear_power(threshold_offset_db); }
};

// Sum of PDP bins at or above the noise threshold.
inline double channel_gain(const PowerDelayProfile &p, const NoiseModel &noise)
{
    if (noise.noise_floor < 0.0)
        throw UsageError("channel_gain: noise floor must be nonnegative");
    const double thr = noise.threshold();
    double g = 0.0;
    for (double pw : p.powers)
        if (pw >= thr)
            g += pw;
    return g;
}

struct DopplerDelayMap {
    // Row-major over (doppler, delay).
    std::vector<Complex> values;
    std::vector<double> doppler_axis; // Hz
    std::vector<double> delay_axis;   // seconds

    std::size_t index(std::size_t v, std::size_t q) const { return v * delay_axis.size() + q; }
    Complex &at(std::size_t v, std::size_t q) { return values[index(v, q)]; }
    const Complex &at(std::size_t v, std::size_t q) const { return values[index(v, q)]; }
};

// Per-delay-bin unitary discrete transform over a rectangular time window
// [t_start, t_start + count). Doppler axis is centered around zero.
inline DopplerDelayMap doppler_resolved_ir(const ImpulseResponse &h, std::size_t t_start,
                                           std::size_t count)
{
    if (count < 2)
        throw UsageError("doppler_resolved_ir: window needs at least 2 snapshots");
    if (t_start + count > h.time_axis.size())
        throw UsageError("doppler_resolved_ir: window exceeds available snapshots");
    const double dt = h.time_axis[t_start + 1] - h.time_axis[t_start];
    for (std::size_t n = 1; n + 1 < count; ++n)
        if (std::abs(h.time_axis[t_start + n + 1] - h.time_axis[t_start + n] - dt) > 1e-9 * dt)
            throw UsageError("doppler_resolved_ir: time sampling must be uniform");
    DopplerDelayMap out;
    out.delay_axis = h.delay_axis;
    out.doppler_axis.resize(count);
    const double dv = 1.0 / (double(count) * dt);
    const std::ptrdiff_t half = std::ptrdiff_t(count) / 2;
    for (std::size_t v = 0; v < count; ++v)
        out.doppler_axis[v] = double(std::ptrdiff_t(v) - half) * dv;
    out.values.assign(count * h.delay_axis.size(), Complex(0.0, 0.0));
    const double scale = 1.0 / std::sqrt(double(count));
    for (std::size_t v = 0; v < count; ++v) {
        const double nu = out.doppler_axis[v];
        for (std::size_t q = 0; q < h.delay_axis.size(); ++q) {
            Complex acc(0.0, 0.0);
            for (std::size_t n = 0; n < count; ++n) {
                const double phase = -2.0 * M_PI * nu * (h.time_axis[t_start + n] - h.time_axis[t_start]);
                acc += h.at(q, t_start + n) * Complex(std::cos(phase), std::sin(phase));
            }
            out.at(v, q) = acc * scale;
        }
    }
    return out;
}

// Stationarity-window helper: distance covered at the given speed.
inline double window_travel_distance(double window_seconds, double speed_mps)
{
    return window_seconds * speed_mps;
}

} // namespace gscm
