// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: scatterer realization, channel synthesis, condensed
// metrics, and subpath estimation, all reproducible from a single 64-bit seed.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gscm/estimation.hpp"
#include "gscm/io.hpp"
#include "gscm/metrics.hpp"
#include "gscm/synthesis.hpp"
#include "gscm/version.hpp"

namespace {

using namespace gscm;

std::vector<double> linear_grid(double start, double stop, std::size_t points,
                                const char *what)
{
    if (points == 0)
        throw ConfigError(std::string(what) + ": need at least one grid point");
    if (points == 1)
        return {start};
    if (!(stop > start))
        throw ConfigError(std::string(what) + ": stop must exceed start");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = start + (stop - start) * double(i) / double(points - 1);
    return g;
}

AntennaLayout layout_from_offsets(const std::vector<double> &flat, const char *what)
{
    AntennaLayout l;
    if (flat.size() % 2 != 0)
        throw ConfigError(std::string(what) + ": offsets come in x,y pairs");
    if (flat.empty()) {
        l.elements.push_back(AntennaElement{});
        return l;
    }
    for (std::size_t i = 0; i < flat.size(); i += 2)
        l.elements.push_back(AntennaElement{Vec2(flat[i], flat[i + 1]), {}});
    return l;
}

// "0.03" or "0.03s" -> seconds.
double parse_window(std::string s)
{
    if (!s.empty() && s.back() == 's')
        s.pop_back();
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || v <= 0.0)
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception &) {
        throw ConfigError("invalid window duration: '" + s + "'");
    }
}

struct RealizeMapArgs {
    std::string map_path, params_path, out_path;
    std::uint64_t seed = 0;
};

int cmd_realize_map(const RealizeMapArgs &a)
{
    const std::string map_bytes = read_file(a.map_path);
    const IntersectionMap map = map_from_json(detail::parse_json(map_bytes, a.map_path));
    ModelParameters params =
        a.params_path.empty() ? default_model_parameters() : load_params(a.params_path);
    const ScattererRealization r = realize_scatterers(map, params.classes, a.seed);
    save_realization(a.out_path, r, content_hash(map_bytes));
    std::vector<std::size_t> counts(params.classes.size(), 0);
    for (const auto &s : r.scatterers)
        ++counts[s.class_index];
    for (std::size_t i = 0; i < params.classes.size(); ++i)
        std::printf("%-18s %zu\n", params.classes[i].name.c_str(), counts[i]);
    std::printf("total              %zu\n", r.scatterers.size());
    return 0;
}

struct SimulateArgs {
    std::string map_path, realization_path, tx_path, rx_path, out_path;
    std::string format = "binary";
    double f_start = 5.6e9, f_stop = 5.8e9;
    std::size_t f_points = 1;
    double t_start = 0.0, t_stop = 0.0;
    std::size_t t_points = 1;
    std::vector<double> tx_offsets, rx_offsets;
    std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs &a)
{
    const std::string map_bytes = read_file(a.map_path);
    const IntersectionMap map = map_from_json(detail::parse_json(map_bytes, a.map_path));
    const std::string realization_bytes = read_file(a.realization_path);
    const ScattererRealization realization = realization_from_json(
        detail::parse_json(realization_bytes, a.realization_path));
    const VehicleTrajectory tx = load_trajectory(a.tx_path);
    const VehicleTrajectory rx = load_trajectory(a.rx_path);
    const auto freq = linear_grid(a.f_start, a.f_stop, a.f_points, "frequency grid");
    const auto time = linear_grid(a.t_start, a.t_stop, a.t_points, "time grid");
    const AntennaLayout tx_layout = layout_from_offsets(a.tx_offsets, "--tx-antenna");
    const AntennaLayout rx_layout = layout_from_offsets(a.rx_offsets, "--rx-antenna");

    std::vector<std::string> warnings;
    ChannelTensor tensor = simulate(map, realization, tx, rx, tx_layout, rx_layout, freq, time,
                                    a.seed, {}, &warnings);
    for (const auto &w : warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    tensor.map_id = content_hash(map_bytes);
    tensor.param_id = content_hash(realization_bytes);
    if (a.format == "binary")
        save_tensor(a.out_path, tensor);
    else if (a.format == "text")
        save_tensor_text(a.out_path, tensor);
    else
        throw ConfigError("--format must be 'binary' or 'text'");
    std::printf("tensor %zu x %zu x %zu x %zu written to %s\n", tensor.freq_axis.size(),
                tensor.time_axis.size(), tensor.n_rx, tensor.n_tx, a.out_path.c_str());
    return 0;
}

struct AnalyzeArgs {
    std::string tensor_path, out_prefix;
    std::string window = "0.03";
    bool doppler = false;
    double noise_floor = 1e-13;
    double threshold_offset_db = 5.0;
    std::size_t rx = 0, tx = 0;
};

int cmd_analyze(const AnalyzeArgs &a)
{
    const ChannelTensor tensor = load_tensor(a.tensor_path);
    if (a.rx >= tensor.n_rx || a.tx >= tensor.n_tx)
        throw ConfigError("antenna element index out of range");
    const double window_s = parse_window(a.window);
    const ImpulseResponse h = impulse_response(tensor, a.rx, a.tx);
    const std::size_t n_t = h.time_axis.size();
    std::size_t window_n = 1;
    if (n_t >= 2) {
        const double dt = h.time_axis[1] - h.time_axis[0];
        window_n = std::max<std::size_t>(1, std::size_t(std::llround(window_s / dt)));
        window_n = std::min(window_n, n_t);
    }
    const NoiseModel noise{a.noise_floor, a.threshold_offset_db};

    std::ostringstream metrics, pdp_out;
    metrics.precision(12);
    pdp_out.precision(12);
    metrics << "t_a,gain_db,mean_delay_ns,rms_ds_ns\n";
    pdp_out << "t_a,delay_ns,power\n";
    for (std::size_t start = 0; start + window_n <= n_t; start += window_n) {
        const PowerDelayProfile p = pdp(h, start, window_n);
        const double gain = channel_gain(p, noise);
        const auto md = mean_delay(p);
        const auto ds = rms_delay_spread(p);
        metrics << p.t_a << ',';
        if (gain > 0.0)
            metrics << linear_power_to_db(gain);
        else
            metrics << "-inf";
        metrics << ',' << (md ? std::to_string(*md * 1e9) : "nan") << ','
                << (ds ? std::to_string(*ds * 1e9) : "nan") << "\n";
        for (std::size_t q = 0; q < p.delays.size(); ++q)
            pdp_out << p.t_a << ',' << p.delays[q] * 1e9 << ',' << p.powers[q] << "\n";
    }
    write_file(a.out_prefix + "_metrics.csv", metrics.str());
    write_file(a.out_prefix + "_pdp.csv", pdp_out.str());

    if (a.doppler) {
        if (n_t < 2)
            throw ConfigError("--doppler needs at least 2 snapshots");
        const std::size_t count = std::max<std::size_t>(2, window_n);
        const DopplerDelayMap d = doppler_resolved_ir(h, 0, count);
        std::ostringstream dop;
        dop.precision(12);
        dop << "doppler_hz,delay_ns,magnitude\n";
        for (std::size_t v = 0; v < d.doppler_axis.size(); ++v)
            for (std::size_t q = 0; q < d.delay_axis.size(); ++q)
                dop << d.doppler_axis[v] << ',' << d.delay_axis[q] * 1e9 << ','
                    << std::abs(d.at(v, q)) << "\n";
        write_file(a.out_prefix + "_doppler.csv", dop.str());
    }
    return 0;
}

struct RansacArgs {
    std::string track_path, tx_path, rx_path, out_path;
    int j = 0;
    bool auto_j = false;
    double inner_thresh = 0.3, final_thresh = 0.45;
    int iterations = 500;
    double min_inlier_fraction = 0.05;
    std::size_t min_points = 10, sample_size = 10;
    int order = 1;
    std::uint64_t seed = 0;
};

int cmd_ransac(const RansacArgs &a)
{
    const TrackData data = load_track(a.track_path);
    const VehicleTrajectory tx = load_trajectory(a.tx_path);
    const VehicleTrajectory rx = load_trajectory(a.rx_path);
    DelayTrack track;
    track.t = data.t;
    track.d = data.d;
    track.tx_pos = [tx](double t) { return tx.at(t).position; };
    track.rx_pos = [rx](double t) { return rx.at(t).position; };
    if (track.t.size() < a.min_points)
        throw DataError("track has " + std::to_string(track.t.size()) +
                        " observations; at least " + std::to_string(a.min_points) +
                        " are required");
    if (!a.auto_j && a.j < 1)
        throw ConfigError("specify -J (number of subpaths) or --auto-j");

    RansacOptions opt;
    opt.inner_threshold = a.inner_thresh;
    opt.final_threshold = a.final_thresh;
    opt.iterations = a.iterations;
    opt.min_inlier_fraction = a.min_inlier_fraction;
    opt.min_points = a.min_points;
    opt.sample_size = a.sample_size;
    opt.order = a.order;
    opt.auto_j = a.auto_j;
    const RansacResult res = ransac_subpaths(track, a.j, opt, a.seed);

    json out;
    out["version"] = kVersion;
    out["seed"] = a.seed;
    out["track_hash"] = file_hash(a.track_path);
    out["subpaths"] = json::array();
    for (const auto &sp : res.subpaths) {
        json pts = json::array();
        for (const auto &p : sp.scatter_points)
            pts.push_back({p.x(), p.y()});
        out["subpaths"].push_back({{"order", sp.order},
                                   {"scatter_points", pts},
                                   {"inlier_indices", sp.inlier_indices},
                                   {"residual_rms", sp.residual_rms}});
    }
    out["residual_indices"] = res.residual_indices;
    write_file(a.out_path, out.dump(2) + "\n");
    std::printf("%zu subpath(s), %zu residual observation(s)\n", res.subpaths.size(),
                res.residual_indices.size());
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Geometry-based stochastic V2V channel simulator"};
    app.set_version_flag("--version", gscm::kVersion);
    app.set_config("--config", "", "Config file; command-line flags override its values");
    app.require_subcommand(1);

    RealizeMapArgs rm;
    auto *realize = app.add_subcommand("realize-map", "Draw a scatterer realization for a map");
    realize->add_option("--map", rm.map_path, "Map JSON file")->required();
    realize->add_option("--params", rm.params_path,
                        "Scatterer class table JSON (defaults to the built-in table)");
    realize->add_option("--seed", rm.seed, "64-bit RNG seed")->required();
    realize->add_option("--out", rm.out_path, "Output realization JSON")->required();

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "Synthesize a channel tensor");
    simulate->add_option("--map", sim.map_path, "Map JSON file")->required();
    simulate->add_option("--realization", sim.realization_path, "Realization JSON")->required();
    simulate->add_option("--tx", sim.tx_path, "Tx trajectory CSV (t,x,y,heading)")->required();
    simulate->add_option("--rx", sim.rx_path, "Rx trajectory CSV (t,x,y,heading)")->required();
    simulate->add_option("--f-start", sim.f_start, "Frequency grid start, Hz");
    simulate->add_option("--f-stop", sim.f_stop, "Frequency grid stop, Hz");
    simulate->add_option("--f-points", sim.f_points, "Frequency grid points");
    simulate->add_option("--t-start", sim.t_start, "Time grid start, s");
    simulate->add_option("--t-stop", sim.t_stop, "Time grid stop, s");
    simulate->add_option("--t-points", sim.t_points, "Time grid points");
    simulate->add_option("--tx-antenna", sim.tx_offsets,
                         "Tx element offset pair x y (repeatable)");
    simulate->add_option("--rx-antenna", sim.rx_offsets,
                         "Rx element offset pair x y (repeatable)");
    simulate->add_option("--seed", sim.seed, "64-bit RNG seed")->required();
    simulate->add_option("--out", sim.out_path, "Output tensor file")->required();
    simulate->add_option("--format", sim.format, "Output format: binary (default) or text");

    AnalyzeArgs an;
    auto *analyze = app.add_subcommand("analyze", "Condensed metrics from a channel tensor");
    analyze->add_option("--tensor", an.tensor_path, "Channel tensor file")->required();
    analyze->add_option("--out", an.out_prefix, "Output file prefix")->required();
    analyze->add_option("--window", an.window, "Stationarity window, seconds (default 0.03)");
    analyze->add_flag("--doppler", an.doppler, "Also write the Doppler-resolved map");
    analyze->add_option("--noise-floor", an.noise_floor, "Noise floor, linear power per bin");
    analyze->add_option("--threshold-offset-db", an.threshold_offset_db,
                        "Threshold offset above the floor, dB");
    analyze->add_option("--rx-element", an.rx, "Rx element index");
    analyze->add_option("--tx-element", an.tx, "Tx element index");

    RansacArgs ra;
    auto *ransac = app.add_subcommand("ransac", "Subpath decomposition of a delay track");
    ransac->add_option("--track", ra.track_path, "Track CSV (t,d[,power,theta1,theta2])")
        ->required();
    ransac->add_option("--tx", ra.tx_path, "Tx trajectory CSV")->required();
    ransac->add_option("--rx", ra.rx_path, "Rx trajectory CSV")->required();
    ransac->add_option("-J,--subpaths", ra.j, "Number of subpaths to extract");
    ransac->add_flag("--auto-j", ra.auto_j, "Extract until a candidate fails the inlier test");
    ransac->add_option("--inner-thresh", ra.inner_thresh, "Candidate threshold, m (default 0.3)");
    ransac->add_option("--final-thresh", ra.final_thresh, "Refit threshold, m (default 0.45)");
    ransac->add_option("--iters", ra.iterations, "RANSAC iterations (default 500)");
    ransac->add_option("--min-inlier-frac", ra.min_inlier_fraction,
                       "Minimum inlier fraction (default 0.05)");
    ransac->add_option("--min-points", ra.min_points, "Minimum observations (default 10)");
    ransac->add_option("--sample-size", ra.sample_size, "Minimal sample size (default 10)");
    ransac->add_option("--order", ra.order, "Interaction order of the fitted subpaths");
    ransac->add_option("--seed", ra.seed, "64-bit RNG seed")->required();
    ransac->add_option("--out", ra.out_path, "Output estimates JSON")->required();

    try {
        app.parse(argc, argv);
        if (realize->parsed())
            return cmd_realize_map(rm);
        if (simulate->parsed())
            return cmd_simulate(sim);
        if (analyze->parsed())
            return cmd_analyze(an);
        if (ransac->parsed())
            return cmd_ransac(ra);
        return 2;
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const gscm::ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const gscm::UsageError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const gscm::DataError &e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const gscm::NumericalError &e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
