// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gscm {

using Vec2 = Eigen::Vector2d;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

// Error taxonomy mirrored by the CLI exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename Scalar>
inline Scalar db_to_linear_power(Scalar db)
{
    return std::pow(Scalar(10), db / Scalar(10));
}

template <typename Scalar>
inline Scalar linear_power_to_db(Scalar p)
{
    return Scalar(10) * std::log10(p);
}

template <typename Scalar>
inline Scalar db_to_linear_amplitude(Scalar db)
{
    return std::pow(Scalar(10), db / Scalar(20));
}

inline double wavelength(double frequency_hz)
{
    if (frequency_hz <= 0.0)
        throw UsageError("frequency must be positive");
    return kSpeedOfLight / frequency_hz;
}

} // namespace gscm
