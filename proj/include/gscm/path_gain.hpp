// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>

#include "gscm/core.hpp"

namespace gscm {

template <typename Scalar = double>
struct AngularGainParams {
    Scalar xi = Scalar(12);            // angular decay, rad^-1
    Scalar delta_theta1 = Scalar(0.35); // specular tolerance, rad
    Scalar delta_theta2 = Scalar(1.22); // grazing limit, rad
};

// Angular voltage gain: unity on the active set, exponential decay with
// slope -xi per radian outside each violated constraint.
template <typename Scalar>
inline Scalar angular_gain(Scalar theta1, Scalar theta2, const AngularGainParams<Scalar> &p)
{
    const Scalar e1 = std::max(std::abs(theta1 - theta2) - p.delta_theta1, Scalar(0));
    const Scalar e2 = std::max(std::abs(theta1) - p.delta_theta2, Scalar(0));
    const Scalar e3 = std::max(std::abs(theta2) - p.delta_theta2, Scalar(0));
    return std::exp(-p.xi * (e1 + e2 + e3));
}

// Fresnel diffraction parameter for a single knife edge.
template <typename Scalar>
inline Scalar fresnel_nu(Scalar phi, Scalar lambda, Scalar d1, Scalar d2)
{
    if (lambda <= Scalar(0) || d1 <= Scalar(0) || d2 <= Scalar(0))
        throw UsageError("fresnel_nu: lambda and distances must be positive");
    return phi * std::sqrt(Scalar(2) / (lambda * (Scalar(1) / d1 + Scalar(1) / d2)));
}

// ITU knife-edge diffraction loss in dB; 0 dB for nu <= -0.7, clamped at 0.
template <typename Scalar>
inline Scalar knife_edge_loss(Scalar nu)
{
    if (!(nu > Scalar(-0.7)))
        return Scalar(0);
    const Scalar x = nu - Scalar(0.1);
    const Scalar l = Scalar(6.9) + Scalar(20) * std::log10(std::sqrt(x * x + Scalar(1)) + x);
    return std::max(l, Scalar(0));
}

// Foliage/obstruction penetration loss in dB for a traversal of d_p meters.
template <typename Scalar>
inline Scalar foliage_loss(Scalar f_hz, Scalar d_p)
{
    if (f_hz <= Scalar(0))
        throw UsageError("foliage_loss: frequency must be positive");
    if (d_p < Scalar(0))
        throw UsageError("foliage_loss: traversal distance must be nonnegative");
    if (d_p == Scalar(0))
        return Scalar(0);
    return Scalar(0.2) * std::pow(f_hz * Scalar(1e-6), Scalar(0.3)) * std::pow(d_p, Scalar(0.6));
}

// Average path power gain, linear. Distances below the 1 m reference are
// clamped to 1 m.
template <typename Scalar>
inline Scalar average_path_power(Scalar d, Scalar g0_db, Scalar g_a, Scalar g_b, Scalar l_p_db)
{
    d = std::max(d, Scalar(1));
    const Scalar g0 = db_to_linear_amplitude(g0_db);
    const Scalar v = g0 * g_a * g_b / d;
    return v * v * db_to_linear_power(-l_p_db);
}

// Free-space reference gain at 1 m, dB.
template <typename Scalar>
inline Scalar los_reference_gain(Scalar lambda)
{
    if (lambda <= Scalar(0))
        throw UsageError("los_reference_gain: wavelength must be positive");
    return Scalar(20) * std::log10(lambda / (Scalar(4) * Scalar(M_PI)));
}

struct PathGainBreakdown {
    double d = 0.0;          // meters
    double g0_db = 0.0;      // reference gain, dB
    double g_a = 1.0;        // angular voltage gain
    double g_b = 1.0;        // blockage/diffraction voltage factor
    double l_p_db = 0.0;     // penetration loss, dB
    double mean_power = 0.0; // linear

    static PathGainBreakdown evaluate(double d, double g0_db, double g_a, double g_b,
                                      double l_p_db)
    {
        PathGainBreakdown b{d, g0_db, g_a, g_b, l_p_db, 0.0};
        b.mean_power = average_path_power(d, g0_db, g_a, g_b, l_p_db);
        return b;
    }
};

} // namespace gscm
