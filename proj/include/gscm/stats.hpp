// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gscm/core.hpp"

namespace gscm {

inline double digamma(double x)
{
    if (x <= 0.0)
        throw UsageError("digamma: x must be positive");
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return result;
}

inline double trigamma(double x)
{
    if (x <= 0.0)
        throw UsageError("trigamma: x must be positive");
    double result = 0.0;
    while (x < 6.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += inv * (1.0 + 0.5 * inv +
                     inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
    return result;
}

// Regularized lower incomplete gamma P(a, x); series for x < a+1, continued
// fraction otherwise.
inline double gamma_p(double a, double x)
{
    if (a <= 0.0 || x < 0.0)
        throw UsageError("gamma_p: invalid arguments");
    if (x == 0.0)
        return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15)
                break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Lentz continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15)
            break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

inline double gamma_cdf(double x, double k, double theta)
{
    if (x <= 0.0)
        return 0.0;
    return gamma_p(k, x / theta);
}

// Upper-tail p-value of a chi-square statistic with the given degrees of
// freedom.
inline double chi_square_pvalue(double statistic, double dof)
{
    return gamma_q(dof / 2.0, statistic / 2.0);
}

// One-sample Kolmogorov-Smirnov statistic against a cdf functor.
template <typename Cdf>
inline double ks_statistic(std::vector<double> samples, Cdf &&cdf)
{
    if (samples.empty())
        throw UsageError("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - double(i) / n));
        d = std::max(d, std::abs(double(i + 1) / n - f));
    }
    return d;
}

// Critical KS value at significance alpha (asymptotic; valid for n >~ 35).
inline double ks_critical_value(std::size_t n, double alpha)
{
    const double k_alpha = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return k_alpha / std::sqrt(double(n));
}

inline double mean(const std::vector<double> &v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / double(v.size());
}

inline double variance(const std::vector<double> &v)
{
    const double m = mean(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return s / double(v.size());
}

} // namespace gscm
