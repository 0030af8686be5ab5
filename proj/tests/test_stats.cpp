// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gscm/stats.hpp"

using namespace gscm;

TEST_CASE("digamma and trigamma reference values")
{
    CHECK(digamma(1.0) == doctest::Approx(-0.5772156649).epsilon(1e-9));
    CHECK(digamma(0.5) == doctest::Approx(-1.9635100260).epsilon(1e-9));
    CHECK(digamma(10.0) == doctest::Approx(2.2517525891).epsilon(1e-9));
    CHECK(trigamma(1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-9));
    CHECK(trigamma(0.5) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-9));
    // Recurrence psi(x+1) = psi(x) + 1/x.
    for (double x : {0.3, 1.7, 4.2})
        CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-12));
}

TEST_CASE("incomplete gamma")
{
    CHECK(gamma_p(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(gamma_p(0.5, 0.5) == doctest::Approx(0.6826894921).epsilon(1e-9)); // erf(1/sqrt2)... via chi2
    CHECK(gamma_p(3.0, 2.0) + gamma_q(3.0, 2.0) == doctest::Approx(1.0));
    // Quadrature oracle for the Gamma cdf.
    const double k = 2.7, theta = 0.6, x = 1.9;
    const int n = 200000;
    double s = 0.0;
    for (int i = 1; i < n; ++i) {
        const double t = x * double(i) / n;
        s += std::exp(-std::lgamma(k) - k * std::log(theta) + (k - 1.0) * std::log(t) - t / theta);
    }
    s *= x / n;
    CHECK(gamma_cdf(x, k, theta) == doctest::Approx(s).epsilon(1e-4));
}

TEST_CASE("chi_square_pvalue")
{
    // Known critical value: chi2(0.99, dof=29) ~ 49.588.
    CHECK(chi_square_pvalue(49.588, 29) == doctest::Approx(0.01).epsilon(1e-2));
    CHECK(chi_square_pvalue(0.0, 10) == doctest::Approx(1.0));
}

TEST_CASE("ks_statistic sanity")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s;
    for (int i = 0; i < 20000; ++i)
        s.push_back(u(rng));
    const double d = ks_statistic(s, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(d < ks_critical_value(s.size(), 0.01));
    // Wrong model rejected.
    const double d2 = ks_statistic(s, [](double x) { return std::clamp(x * x, 0.0, 1.0); });
    CHECK(d2 > ks_critical_value(s.size(), 0.01));
}
