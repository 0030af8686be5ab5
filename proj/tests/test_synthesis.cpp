// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gscm/metrics.hpp"
#include "gscm/stats.hpp"
#include "gscm/synthesis.hpp"

using namespace gscm;

namespace {

VehicleTrajectory static_trajectory(const Vec2 &pos, double heading = 0.0)
{
    VehicleTrajectory t;
    t.samples = {{0.0, pos, heading}, {10.0, pos, heading}};
    return t;
}

AntennaLayout single_isotropic()
{
    AntennaLayout l;
    l.elements.push_back(AntennaElement{});
    return l;
}

ScattererRealization empty_realization()
{
    ScattererRealization r;
    r.classes = default_scatterer_classes();
    return r;
}

} // namespace

TEST_CASE("path_geometry")
{
    auto los = path_geometry({-10.0, 0.0}, nullptr, {10.0, 0.0});
    CHECK(los.d == doctest::Approx(20.0));
    CHECK(los.tau == doctest::Approx(20.0 / kSpeedOfLight).epsilon(1e-12));
    CHECK(los.tau == doctest::Approx(66.71e-9).epsilon(1e-3));
    CHECK_FALSE(los.has_angles);

    Scatterer s;
    s.location = Vec2(0.0, 5.0);
    s.normal = Vec2(0.0, -1.0);
    auto sp = path_geometry({-10.0, 0.0}, &s, {10.0, 0.0});
    CHECK(sp.d == doctest::Approx(2.0 * std::sqrt(125.0)).epsilon(1e-12));
    CHECK(sp.has_angles);

    // Collinear scatterer degenerates to the direct distance.
    Scatterer mid;
    mid.location = Vec2(0.0, 0.0);
    mid.normal = Vec2(0.0, 1.0);
    CHECK(path_geometry({-10.0, 0.0}, &mid, {10.0, 0.0}).d == doctest::Approx(20.0));

    CHECK_THROWS_AS(path_geometry({1.0, 1.0}, nullptr, {1.0, 1.0}), UsageError);
}

TEST_CASE("path_amplitude")
{
    // Fully blocked path.
    CHECK(std::abs(path_amplitude({50.0, -48.0, 1.0, 0.0, 0.0}, 1.0, 0.3)) == 0.0);
    // Frozen stack: G0 = -48 dB at d = 100 m -> -88 dB.
    const Complex g = path_amplitude({100.0, -48.0, 1.0, 1.0, 0.0}, 1.0, 0.0);
    CHECK(linear_power_to_db(std::norm(g)) == doctest::Approx(-88.0).epsilon(1e-9));
    // Phase carried by the initial phase.
    const Complex gp = path_amplitude({100.0, -48.0, 1.0, 1.0, 0.0}, 1.0, M_PI / 3.0);
    CHECK(std::arg(gp) == doctest::Approx(M_PI / 3.0));
    // Fading scales the power linearly.
    const Complex gf = path_amplitude({100.0, -48.0, 1.0, 1.0, 0.0}, 2.0, 0.0);
    CHECK(std::norm(gf) == doctest::Approx(2.0 * std::norm(g)).epsilon(1e-12));
}

TEST_CASE("transfer_function")
{
    AntennaElement iso;
    // Single path.
    std::vector<EvaluatedPath> one{{Complex(0.5, 0.0), 100e-9, 0.0, M_PI}};
    const double f = 5.7e9;
    const Complex h = transfer_function(one, f, iso, iso, 0.0, 0.0);
    const double ph = -2.0 * M_PI * f * 100e-9;
    CHECK(std::abs(h - Complex(0.5 * std::cos(ph), 0.5 * std::sin(ph))) < 1e-12);

    // Two equal paths separated by half a period: destructive.
    std::vector<EvaluatedPath> two{{Complex(0.5, 0.0), 100e-9, 0.0, M_PI},
                                   {Complex(0.5, 0.0), 100e-9 + 0.5 / f, 0.0, M_PI}};
    CHECK(std::abs(transfer_function(two, f, iso, iso, 0.0, 0.0)) < 1e-12);

    // Oracle re-summation over many paths.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<EvaluatedPath> many;
    for (int i = 0; i < 64; ++i)
        many.push_back({Complex(u(rng), u(rng)), u(rng) * 1e-6, u(rng), u(rng)});
    Complex oracle(0.0, 0.0);
    for (const auto &p : many) {
        const double phase = -2.0 * M_PI * f * p.tau;
        oracle += p.amplitude * Complex(std::cos(phase), std::sin(phase));
    }
    const Complex sum = transfer_function(many, f, iso, iso, 0.0, 0.0);
    CHECK(std::abs(sum - oracle) <= 1e-12 * std::abs(oracle));
}

TEST_CASE("simulate: Friis for a clear static link")
{
    IntersectionMap map;
    const double d = 50.0;
    const auto traj_tx = static_trajectory({-d / 2.0, 0.0});
    const auto traj_rx = static_trajectory({d / 2.0, 0.0});
    const std::vector<double> freq{5.7e9};
    const std::vector<double> time{0.0, 0.5, 1.0};
    const auto tensor = simulate(map, empty_realization(), traj_tx, traj_rx, single_isotropic(),
                                 single_isotropic(), freq, time, 1);
    REQUIRE(tensor.values.size() == 3);
    const double lambda = kSpeedOfLight / 5.7e9;
    const double friis_db = 20.0 * std::log10(lambda / (4.0 * M_PI * d));
    for (std::size_t n = 0; n < 3; ++n) {
        CHECK(linear_power_to_db(std::norm(tensor.at(0, n, 0, 0))) ==
              doctest::Approx(friis_db).epsilon(1e-6));
        // Static scene: constant over time.
        CHECK(std::abs(tensor.at(0, n, 0, 0) - tensor.at(0, 0, 0, 0)) < 1e-15);
    }
}

TEST_CASE("simulate: tensor shape contract and grid errors")
{
    IntersectionMap map;
    AntennaLayout two;
    two.elements.push_back(AntennaElement{Vec2(-0.5, 0.0), {}});
    two.elements.push_back(AntennaElement{Vec2(0.5, 0.0), {}});
    const auto traj_tx = static_trajectory({-10.0, 0.0});
    const auto traj_rx = static_trajectory({10.0, 0.0});
    const std::vector<double> freq{5.65e9, 5.7e9, 5.75e9};
    const std::vector<double> time{0.0, 1.0};
    const auto t = simulate(map, empty_realization(), traj_tx, traj_rx, two, single_isotropic(),
                            freq, time, 1);
    CHECK(t.values.size() == 3 * 2 * 1 * 2);
    CHECK(t.n_tx == 2);
    CHECK(t.n_rx == 1);

    CHECK_THROWS_AS(simulate(map, empty_realization(), traj_tx, traj_rx, two, single_isotropic(),
                             {}, time, 1),
                    UsageError);
    CHECK_THROWS_AS(simulate(map, empty_realization(), traj_tx, traj_rx, two, single_isotropic(),
                             freq, {11.0, 12.0}, 1),
                    DataError);
}

TEST_CASE("simulate: out-of-band frequency warns")
{
    IntersectionMap map;
    const auto traj = static_trajectory({-10.0, 0.0});
    const auto traj2 = static_trajectory({10.0, 0.0});
    std::vector<std::string> warnings;
    simulate(map, empty_realization(), traj, traj2, single_isotropic(), single_isotropic(),
             {2.4e9}, {0.0}, 1, {}, &warnings);
    CHECK(!warnings.empty());
    warnings.clear();
    simulate(map, empty_realization(), traj, traj2, single_isotropic(), single_isotropic(),
             {5.7e9}, {0.0}, 1, {}, &warnings);
    CHECK(warnings.empty());
}

TEST_CASE("simulate: knife-edge attenuation matches the composed oracle")
{
    IntersectionMap map;
    BuildingPolygon b;
    b.vertices = {{0.0, 1.0}, {-40.0, 1.0}, {-40.0, 60.0}, {0.0, 60.0}};
    map.buildings.push_back(b);
    const Vec2 tx_pos(-30.0, -20.0);
    const Vec2 rx_pos(25.0, 30.0);
    const auto traj_tx = static_trajectory(tx_pos);
    const auto traj_rx = static_trajectory(rx_pos);
    const std::vector<double> freq{5.7e9};
    const auto tensor = simulate(map, empty_realization(), traj_tx, traj_rx, single_isotropic(),
                                 single_isotropic(), freq, {0.0}, 1);
    const double lambda = kSpeedOfLight / 5.7e9;
    const auto geo = los_diffraction_geometry(tx_pos, rx_pos, map.buildings);
    REQUIRE(geo.has_value());
    const double ld = knife_edge_loss(fresnel_nu(geo->phi, lambda, geo->d1, geo->d2));
    CHECK(ld > 0.1);
    const double d = (rx_pos - tx_pos).norm();
    const double expect_db = 20.0 * std::log10(lambda / (4.0 * M_PI * d)) - ld;
    CHECK(linear_power_to_db(std::norm(tensor.at(0, 0, 0, 0))) ==
          doctest::Approx(expect_db).epsilon(1e-6));
}

namespace {

ScattererRealization tiny_field(std::uint64_t seed)
{
    IntersectionMap map;
    map.walls.push_back(WallSegment({-30.0, 20.0}, {30.0, 20.0}, {0.0, -1.0}));
    auto classes = default_scatterer_classes();
    classes.resize(1); // wall 1st order only
    return realize_scatterers(map, classes, seed);
}

} // namespace

TEST_CASE("simulate: superposition over disjoint scatterer sets")
{
    IntersectionMap map;
    map.walls.push_back(WallSegment({-30.0, 20.0}, {30.0, 20.0}, {0.0, -1.0}));
    const auto ra = tiny_field(11);
    const auto rb = tiny_field(22);
    REQUIRE(!ra.scatterers.empty());
    REQUIRE(!rb.scatterers.empty());
    ScattererRealization runion = ra;
    for (const auto &s : rb.scatterers)
        runion.scatterers.push_back(s);

    VehicleTrajectory traj_tx, traj_rx;
    traj_tx.samples = {{0.0, {-20.0, 0.0}, 0.0}, {1.0, {-10.0, 0.0}, 0.0}};
    traj_rx.samples = {{0.0, {20.0, 0.0}, M_PI}, {1.0, {10.0, 0.0}, M_PI}};
    const std::vector<double> freq{5.68e9, 5.7e9, 5.72e9};
    const std::vector<double> time{0.0, 0.25, 0.5, 0.75, 1.0};
    const std::uint64_t seed = 99;
    const auto ta = simulate(map, ra, traj_tx, traj_rx, single_isotropic(), single_isotropic(),
                             freq, time, seed);
    const auto tb = simulate(map, rb, traj_tx, traj_rx, single_isotropic(), single_isotropic(),
                             freq, time, seed);
    const auto tu = simulate(map, runion, traj_tx, traj_rx, single_isotropic(), single_isotropic(),
                             freq, time, seed);
    const auto tlos = simulate(map, ScattererRealization{}, traj_tx, traj_rx, single_isotropic(),
                               single_isotropic(), freq, time, seed);
    for (std::size_t i = 0; i < tu.values.size(); ++i) {
        const Complex lhs = tu.values[i];
        const Complex rhs = ta.values[i] + tb.values[i] - tlos.values[i];
        CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("simulate: geometric reciprocity transposes the antenna axes")
{
    IntersectionMap map;
    map.walls.push_back(WallSegment({-30.0, 20.0}, {30.0, 20.0}, {0.0, -1.0}));
    BuildingPolygon b;
    b.vertices = {{-5.0, 30.0}, {5.0, 30.0}, {5.0, 40.0}, {-5.0, 40.0}};
    map.buildings.push_back(b);
    const auto real = tiny_field(31);

    VehicleTrajectory traj_a, traj_b;
    traj_a.samples = {{0.0, {-25.0, -3.0}, 0.1}, {1.0, {-12.0, -1.0}, 0.2}};
    traj_b.samples = {{0.0, {22.0, 2.0}, M_PI}, {1.0, {12.0, 3.0}, M_PI - 0.1}};
    AntennaLayout la, lb;
    la.elements.push_back(AntennaElement{Vec2(-0.5, 0.1), {}});
    la.elements.push_back(AntennaElement{Vec2(0.5, -0.1), {}});
    lb.elements.push_back(AntennaElement{Vec2(0.0, 0.3), {}});
    const std::vector<double> freq{5.69e9, 5.71e9};
    const std::vector<double> time{0.0, 0.5, 1.0};
    const std::uint64_t seed = 7;

    const auto fwd = simulate(map, real, traj_a, traj_b, la, lb, freq, time, seed);
    const auto rev = simulate(map, real, traj_b, traj_a, lb, la, freq, time, seed);
    for (std::size_t fi = 0; fi < freq.size(); ++fi)
        for (std::size_t n = 0; n < time.size(); ++n)
            for (std::size_t r = 0; r < fwd.n_rx; ++r)
                for (std::size_t x = 0; x < fwd.n_tx; ++x) {
                    const Complex h1 = fwd.at(fi, n, r, x);
                    const Complex h2 = rev.at(fi, n, x, r);
                    CHECK(std::abs(h1 - h2) < 1e-12 * std::max(1.0, std::abs(h1)));
                }
}

TEST_CASE("many equal-power paths produce Rayleigh-like narrowband fading")
{
    // 200 equal-power phasors with random delays; magnitude of the sum over
    // independent draws follows a Rayleigh distribution.
    AntennaElement iso;
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double f = 5.7e9;
    const int n_paths = 200;
    const double amp = 1.0 / std::sqrt(double(n_paths));
    std::vector<double> mags;
    for (int trial = 0; trial < 4000; ++trial) {
        std::vector<EvaluatedPath> paths;
        for (int i = 0; i < n_paths; ++i)
            paths.push_back({Complex(amp, 0.0), u(rng) * 1e-6, 0.0, 0.0});
        mags.push_back(std::abs(transfer_function(paths, f, iso, iso, 0.0, 0.0)));
    }
    // Rayleigh with sigma^2 = 1/2 (unit mean power).
    const double d = ks_statistic(mags, [](double x) { return 1.0 - std::exp(-x * x); });
    CHECK(d < ks_critical_value(mags.size(), 0.01));
}

TEST_CASE("frequency resolution: 1/B delay resolution surfaces two paths")
{
    // Two paths 10 ns apart resolved with a 100 MHz grid after the inverse
    // transform.
    ChannelTensor t;
    t.n_rx = t.n_tx = 1;
    const std::size_t m = 64;
    const double df = 100e6 / double(m);
    for (std::size_t i = 0; i < m; ++i)
        t.freq_axis.push_back(5.65e9 + double(i) * df);
    t.time_axis = {0.0};
    const double tau1 = 100e-9, tau2 = 110e-9;
    for (std::size_t i = 0; i < m; ++i) {
        const double f = t.freq_axis[i];
        const double p1 = -2.0 * M_PI * f * tau1;
        const double p2 = -2.0 * M_PI * f * tau2;
        t.values.push_back(Complex(std::cos(p1), std::sin(p1)) +
                           Complex(std::cos(p2), std::sin(p2)));
    }
    const auto h = impulse_response(t, 0, 0);
    // Bin spacing is 1/(m df) = 10 ns / (m/ (B/df))... with B = 100 MHz the
    // unaliased delay span is 1/df and resolution 1/B = 10 ns.
    int peaks = 0;
    for (std::size_t q = 0; q < m; ++q)
        if (std::abs(h.at(q, 0)) > 0.8)
            ++peaks;
    CHECK(peaks == 2);
}
