// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gscm/core.hpp"
#include "gscm/rng.hpp"

namespace gscm {

template <typename Scalar = double>
struct GammaFadingParams {
    Scalar k = Scalar(1);    // shape
    Scalar theta = Scalar(1); // scale; 1/k for unit-mean model use
    Scalar d_c = Scalar(1);  // coherence distance, meters; 0 means white fading
};

template <typename Scalar>
inline Scalar gamma_pdf(Scalar x, Scalar k, Scalar theta)
{
    if (x <= Scalar(0) || k <= Scalar(0) || theta <= Scalar(0))
        throw UsageError("gamma_pdf: arguments must be positive");
    return std::exp(-std::lgamma(k) - k * std::log(theta) + (k - Scalar(1)) * std::log(x) -
                    x / theta);
}

// Nakagami amplitude parameters equivalent to a Gamma power distribution.
template <typename Scalar>
inline std::pair<Scalar, Scalar> nakagami_from_gamma(Scalar k, Scalar theta)
{
    return {k, k * theta};
}

// Gudmundson exponential autocorrelation; d_c = 0 degenerates to white fading.
template <typename Scalar>
inline Scalar gudmundson_acf(Scalar delta_d, Scalar sigma2, Scalar d_c)
{
    if (d_c < Scalar(0))
        throw UsageError("gudmundson_acf: d_c must be nonnegative");
    if (d_c == Scalar(0))
        return delta_d == Scalar(0) ? sigma2 : Scalar(0);
    return sigma2 * std::exp(-std::abs(delta_d) / d_c);
}

inline constexpr double kFadingFloor = 1e-12;

// One step of the discretized square-root diffusion driving the
// autocorrelated Gamma process; w is a standard normal draw. The result is
// clamped to a small positive floor since the discretization can cross zero
// for large delta_d / d_c.
template <typename Scalar>
inline Scalar step_gamma_process(Scalar psi, Scalar delta_d, Scalar k, Scalar theta, Scalar d_c,
                                 Scalar w)
{
    if (delta_d < Scalar(0))
        throw UsageError("step_gamma_process: delta_d must be nonnegative");
    if (psi <= Scalar(0) || k <= Scalar(0) || theta <= Scalar(0) || d_c <= Scalar(0))
        throw UsageError("step_gamma_process: psi, k, theta, d_c must be positive");
    const Scalar num = psi * d_c + k * theta * delta_d + theta * delta_d * (w * w - Scalar(1)) / Scalar(2) +
                       std::sqrt(Scalar(2) * psi * theta * d_c * delta_d) * w;
    const Scalar next = num / (delta_d + d_c);
    return std::max(next, Scalar(kFadingFloor));
}

// Distance-driven autocorrelated Gamma sequence. Each increment is the sum
// of the Tx and Rx displacements between consecutive snapshots. d_c = 0
// classes redraw i.i.d. from Gamma(k, theta) at every snapshot.
inline std::vector<double> generate_fading_sequence(const std::vector<double> &increments,
                                                    const GammaFadingParams<double> &params,
                                                    std::mt19937_64 &rng)
{
    std::gamma_distribution<double> gamma(params.k, params.theta);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> psi;
    psi.reserve(increments.size() + 1);
    psi.push_back(std::max(gamma(rng), kFadingFloor));
    for (double dd : increments) {
        if (dd < 0.0)
            throw UsageError("generate_fading_sequence: negative increment");
        if (params.d_c <= 0.0) {
            psi.push_back(std::max(gamma(rng), kFadingFloor));
        } else {
            const double w = normal(rng);
            psi.push_back(step_gamma_process(psi.back(), dd, params.k, params.theta, params.d_c, w));
        }
    }
    return psi;
}

inline std::vector<double> generate_fading_sequence(const std::vector<double> &increments,
                                                    const GammaFadingParams<double> &params,
                                                    std::uint64_t seed)
{
    auto rng = substream(seed, {0x6661646564ULL});
    return generate_fading_sequence(increments, params, rng);
}

struct FadingProcessState {
    double psi = 1.0;
    double cumulative_distance = 0.0;
};

} // namespace gscm
