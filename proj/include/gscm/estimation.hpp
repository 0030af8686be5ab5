// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gscm/core.hpp"
#include "gscm/geometry.hpp"
#include "gscm/path_gain.hpp"
#include "gscm/rng.hpp"
#include "gscm/stats.hpp"

namespace gscm {

struct DelayTrack {
    std::vector<double> t; // seconds, nondecreasing
    std::vector<double> d; // measured path propagation distance, meters
    std::function<Vec2(double)> tx_pos;
    std::function<Vec2(double)> rx_pos;

    void validate() const
    {
        if (t.size() != d.size())
            throw DataError("track: t and d lengths differ");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (t[i] < t[i - 1])
                throw DataError("track: timestamps must be nondecreasing");
        if (!tx_pos || !rx_pos)
            throw ConfigError("track: vehicle position functions are required");
    }
};

// Sum of Euclidean leg lengths Tx -> s1 -> ... -> so -> Rx.
inline double modelled_distance(const std::vector<Vec2> &scatter_points, const Vec2 &tx,
                                const Vec2 &rx)
{
    if (scatter_points.empty())
        return (rx - tx).norm();
    double d = (scatter_points.front() - tx).norm();
    for (std::size_t i = 0; i + 1 < scatter_points.size(); ++i)
        d += (scatter_points[i + 1] - scatter_points[i]).norm();
    d += (rx - scatter_points.back()).norm();
    return d;
}

struct ScattererFitOptions {
    BoundingBox search_box;      // multistart initialization region
    int multistarts = 5;
    int max_iterations = 200;
    double relative_tolerance = 1e-9;
};

struct ScattererFitResult {
    std::vector<Vec2> scatter_points;
    double objective = std::numeric_limits<double>::infinity(); // sum of squared residuals
    bool converged = false;
};

namespace detail {

struct FitObservation {
    Vec2 tx, rx;
    double d;
};

inline double fit_objective(const std::vector<FitObservation> &obs, const std::vector<Vec2> &pts)
{
    double ss = 0.0;
    for (const auto &o : obs) {
        const double r = o.d - modelled_distance(pts, o.tx, o.rx);
        ss += r * r;
    }
    return ss;
}

// Levenberg-Marquardt on the 2*order scatter coordinates.
inline ScattererFitResult lm_fit(const std::vector<FitObservation> &obs, std::vector<Vec2> pts,
                                 const ScattererFitOptions &opt)
{
    const std::size_t order = pts.size();
    const std::size_t n = obs.size();
    const std::size_t dim = 2 * order;
    Eigen::VectorXd x(dim);
    for (std::size_t k = 0; k < order; ++k) {
        x(2 * k) = pts[k].x();
        x(2 * k + 1) = pts[k].y();
    }
    auto unpack = [&](const Eigen::VectorXd &v) {
        std::vector<Vec2> p(order);
        for (std::size_t k = 0; k < order; ++k)
            p[k] = Vec2(v(2 * k), v(2 * k + 1));
        return p;
    };

    double lambda = 1e-3;
    double obj = fit_objective(obs, unpack(x));
    Eigen::MatrixXd jac(n, dim);
    Eigen::VectorXd res(n);
    bool converged = false;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        const std::vector<Vec2> p = unpack(x);
        for (std::size_t i = 0; i < n; ++i) {
            res(i) = obs[i].d - modelled_distance(p, obs[i].tx, obs[i].rx);
            for (std::size_t k = 0; k < order; ++k) {
                const Vec2 prev = (k == 0) ? obs[i].tx : p[k - 1];
                const Vec2 next = (k + 1 == order) ? obs[i].rx : p[k + 1];
                Vec2 grad(0.0, 0.0);
                const double lp = (p[k] - prev).norm();
                const double ln = (p[k] - next).norm();
                if (lp > 1e-12)
                    grad += (p[k] - prev) / lp;
                if (ln > 1e-12)
                    grad += (p[k] - next) / ln;
                // residual = d - model, so the residual gradient is -grad
                jac(i, 2 * k) = -grad.x();
                jac(i, 2 * k + 1) = -grad.y();
            }
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * res;
        bool stepped = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal().array() += lambda;
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);
            const Eigen::VectorXd xc = x + step;
            const double cand = fit_objective(obs, unpack(xc));
            if (cand < obj) {
                const double rel = (obj - cand) / std::max(obj, 1e-300);
                x = xc;
                obj = cand;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel < opt.relative_tolerance)
                    converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            converged = true; // no improving step at any damping
            break;
        }
        if (converged)
            break;
    }
    ScattererFitResult out;
    out.scatter_points = unpack(x);
    out.objective = obj;
    out.converged = converged;
    return out;
}

} // namespace detail

// Nonlinear least squares for the scatter locations of one subpath, with
// random multistart inside the search box.
inline ScattererFitResult fit_scatterer_ls(const std::vector<std::pair<double, double>> &subset,
                                           const DelayTrack &track, int order,
                                           const ScattererFitOptions &opt, std::mt19937_64 &rng)
{
    if (order < 1)
        throw UsageError("fit_scatterer_ls: order must be >= 1");
    if (subset.size() < std::size_t(2 * order))
        throw UsageError("fit_scatterer_ls: need at least 2*order observations");
    if (!opt.search_box.valid)
        throw ConfigError("fit_scatterer_ls: search box is required");

    std::vector<detail::FitObservation> obs;
    obs.reserve(subset.size());
    for (const auto &[ti, di] : subset)
        obs.push_back({track.tx_pos(ti), track.rx_pos(ti), di});

    std::uniform_real_distribution<double> ux(opt.search_box.lo.x(), opt.search_box.hi.x());
    std::uniform_real_distribution<double> uy(opt.search_box.lo.y(), opt.search_box.hi.y());
    ScattererFitResult best;
    for (int s = 0; s < opt.multistarts; ++s) {
        std::vector<Vec2> init(order);
        for (int k = 0; k < order; ++k)
            init[k] = Vec2(ux(rng), uy(rng));
        ScattererFitResult r = detail::lm_fit(obs, init, opt);
        if (r.objective < best.objective)
            best = r;
    }
    return best;
}

struct RansacOptions {
    double inner_threshold = 0.3;  // meters, candidate scoring
    double final_threshold = 0.45; // meters, refit inlier selection
    int iterations = 500;
    double min_inlier_fraction = 0.05;
    std::size_t min_points = 10;
    std::size_t sample_size = 10;
    int order = 1;
    bool auto_j = false; // keep extracting until a candidate fails
    ScattererFitOptions fit;
};

struct SubpathEstimate {
    int order = 1;
    std::vector<Vec2> scatter_points;
    std::vector<std::size_t> inlier_indices; // indices into the original track
    double residual_rms = 0.0;
};

struct RansacResult {
    std::vector<SubpathEstimate> subpaths;
    std::vector<std::size_t> residual_indices; // unconsumed observations (diffuse)
};

// Subpath decomposition: repeated minimal-subset hypotheses, inlier scoring
// at the inner threshold, refit on the final-threshold inlier set, then
// decimation.
inline RansacResult ransac_subpaths(const DelayTrack &track, int j_max, const RansacOptions &opt,
                                    std::uint64_t seed)
{
    track.validate();
    if (!opt.auto_j && j_max < 1)
        throw UsageError("ransac_subpaths: J must be >= 1");
    const std::size_t n0 = track.t.size();
    if (n0 < opt.min_points)
        throw UsageError("ransac_subpaths: need at least " + std::to_string(opt.min_points) +
                         " observations");

    // Default search box: bounding box of the vehicle positions, inflated by
    // the largest measured propagation distance.
    ScattererFitOptions fit_opt = opt.fit;
    if (!fit_opt.search_box.valid) {
        BoundingBox box;
        double dmax = 0.0;
        for (std::size_t i = 0; i < n0; ++i) {
            box.include(track.tx_pos(track.t[i]));
            box.include(track.rx_pos(track.t[i]));
            dmax = std::max(dmax, track.d[i]);
        }
        const Vec2 pad(0.5 * dmax, 0.5 * dmax);
        box.lo -= pad;
        box.hi += pad;
        fit_opt.search_box = box;
    }

    std::vector<std::size_t> active(n0);
    for (std::size_t i = 0; i < n0; ++i)
        active[i] = i;

    std::vector<Vec2> tx_at(n0), rx_at(n0);
    for (std::size_t i = 0; i < n0; ++i) {
        tx_at[i] = track.tx_pos(track.t[i]);
        rx_at[i] = track.rx_pos(track.t[i]);
    }
    auto model_dist = [&](const std::vector<Vec2> &pts, std::size_t i) {
        return modelled_distance(pts, tx_at[i], rx_at[i]);
    };

    RansacResult out;
    int j = 0;
    while (active.size() >= opt.min_points && (opt.auto_j || j < j_max)) {
        auto rng = substream(seed, {0x72616e73ULL, std::uint64_t(j)});
        const std::size_t n = active.size();
        std::size_t best_count = 0;
        double best_obj = std::numeric_limits<double>::infinity();
        std::vector<Vec2> best_pts;

        std::vector<std::size_t> idx(n);
        for (int it = 0; it < opt.iterations; ++it) {
            // Sample opt.sample_size distinct active indices.
            for (std::size_t i = 0; i < n; ++i)
                idx[i] = i;
            const std::size_t ssize = std::min(opt.sample_size, n);
            for (std::size_t i = 0; i < ssize; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, n - 1);
                std::swap(idx[i], idx[pick(rng)]);
            }
            std::vector<std::pair<double, double>> subset;
            subset.reserve(ssize);
            for (std::size_t i = 0; i < ssize; ++i) {
                const std::size_t gi = active[idx[i]];
                subset.emplace_back(track.t[gi], track.d[gi]);
            }
            if (subset.size() < std::size_t(2 * opt.order))
                continue;
            ScattererFitResult cand = fit_scatterer_ls(subset, track, opt.order, fit_opt, rng);
            std::size_t count = 0;
            for (std::size_t gi : active)
                if (std::abs(model_dist(cand.scatter_points, gi) - track.d[gi]) <
                    opt.inner_threshold)
                    ++count;
            if (double(count) > opt.min_inlier_fraction * double(n) &&
                (count > best_count || (count == best_count && cand.objective < best_obj))) {
                best_count = count;
                best_obj = cand.objective;
                best_pts = cand.scatter_points;
            }
        }
        if (best_pts.empty())
            break; // no candidate cleared the inlier-fraction bar

        // Final-threshold inlier set and refit on it.
        std::vector<std::size_t> inliers;
        for (std::size_t gi : active)
            if (std::abs(model_dist(best_pts, gi) - track.d[gi]) < opt.final_threshold)
                inliers.push_back(gi);
        if (inliers.size() >= std::size_t(2 * opt.order)) {
            std::vector<std::pair<double, double>> subset;
            for (std::size_t gi : inliers)
                subset.emplace_back(track.t[gi], track.d[gi]);
            ScattererFitOptions refit_opt = fit_opt;
            refit_opt.multistarts = 1; // refine from the RANSAC winner
            std::vector<detail::FitObservation> obs;
            for (std::size_t gi : inliers)
                obs.push_back({tx_at[gi], rx_at[gi], track.d[gi]});
            ScattererFitResult refit = detail::lm_fit(obs, best_pts, refit_opt);
            if (refit.objective <= detail::fit_objective(obs, best_pts))
                best_pts = refit.scatter_points;
        }

        SubpathEstimate est;
        est.order = opt.order;
        est.scatter_points = best_pts;
        double ss = 0.0;
        for (std::size_t gi : inliers) {
            est.inlier_indices.push_back(gi);
            const double r = model_dist(best_pts, gi) - track.d[gi];
            ss += r * r;
        }
        if (est.inlier_indices.empty())
            break;
        est.residual_rms = std::sqrt(ss / double(est.inlier_indices.size()));
        out.subpaths.push_back(est);

        // Decimate.
        std::vector<std::size_t> remaining;
        std::size_t ii = 0;
        for (std::size_t gi : active) {
            while (ii < inliers.size() && inliers[ii] < gi)
                ++ii;
            if (ii < inliers.size() && inliers[ii] == gi)
                continue;
            remaining.push_back(gi);
        }
        active = std::move(remaining);
        ++j;
    }
    out.residual_indices = active;
    return out;
}

struct PathGainObservation {
    double d;      // meters
    double theta1; // radians
    double theta2; // radians
    double power;  // linear
};

struct PathGainFit {
    double g0_db = 0.0;
    double xi = 0.0;
    double delta_theta1 = 0.0;
    bool wide_confidence = false; // degenerate angle coverage
};

// Joint ML fit of (G0, xi, delta_theta1) under unit-mean exponential fading
// of the power about the distance/angle mean; delta_theta2 is held fixed.
// G0 has a closed form given the angular parameters, so the search runs over
// (xi, delta_theta1) on a refined grid.
inline PathGainFit fit_path_gain_params(const std::vector<PathGainObservation> &obs,
                                        double delta_theta2 = 1.22)
{
    if (obs.size() < 10)
        throw UsageError("fit_path_gain_params: need at least 10 observations");
    for (const auto &o : obs)
        if (o.power <= 0.0 || o.d <= 0.0)
            throw UsageError("fit_path_gain_params: powers and distances must be positive");

    auto nll = [&](double xi, double dth1, double *c_out) {
        AngularGainParams<double> p{xi, dth1, delta_theta2};
        double sum_ratio = 0.0;
        std::vector<double> a(obs.size());
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const double ga = angular_gain(obs[i].theta1, obs[i].theta2, p);
            const double dd = std::max(obs[i].d, 1.0);
            a[i] = (ga / dd) * (ga / dd);
            sum_ratio += obs[i].power / a[i];
        }
        const double c = sum_ratio / double(obs.size()); // ML g0^2
        double v = 0.0;
        for (std::size_t i = 0; i < obs.size(); ++i)
            v += std::log(c * a[i]) + obs[i].power / (c * a[i]);
        if (c_out)
            *c_out = c;
        return v;
    };

    double best_xi = 12.0, best_dth1 = 0.35, best_v = std::numeric_limits<double>::infinity();
    double xi_lo = 1.0, xi_hi = 30.0, d_lo = 0.02, d_hi = 1.2;
    const int nx = 24, nd = 24;
    for (int level = 0; level < 4; ++level) {
        for (int i = 0; i < nx; ++i) {
            const double xi = xi_lo + (xi_hi - xi_lo) * double(i) / double(nx - 1);
            for (int k = 0; k < nd; ++k) {
                const double dth1 = d_lo + (d_hi - d_lo) * double(k) / double(nd - 1);
                const double v = nll(xi, dth1, nullptr);
                if (v < best_v) {
                    best_v = v;
                    best_xi = xi;
                    best_dth1 = dth1;
                }
            }
        }
        const double wx = (xi_hi - xi_lo) / double(nx - 1);
        const double wd = (d_hi - d_lo) / double(nd - 1);
        xi_lo = std::max(0.1, best_xi - 2.0 * wx);
        xi_hi = best_xi + 2.0 * wx;
        d_lo = std::max(0.0, best_dth1 - 2.0 * wd);
        d_hi = std::min(M_PI, best_dth1 + 2.0 * wd);
    }

    PathGainFit fit;
    double c = 0.0;
    nll(best_xi, best_dth1, &c);
    fit.g0_db = 10.0 * std::log10(c);
    fit.xi = best_xi;
    fit.delta_theta1 = best_dth1;

    // Angle coverage check: the decay is identifiable only if observations
    // fall on both sides of the active-region boundary.
    AngularGainParams<double> pb{best_xi, best_dth1, delta_theta2};
    std::size_t inside = 0, outside = 0;
    for (const auto &o : obs)
        (angular_gain(o.theta1, o.theta2, pb) > 0.999 ? inside : outside)++;
    fit.wide_confidence = (inside < 3 || outside < 3);
    return fit;
}

struct GammaFit {
    double k = 0.0;
    double theta = 0.0;
    double mean = 0.0; // k * theta, unit-mean sanity value
    bool degenerate = false;
};

// Standard Gamma maximum likelihood: Newton iteration on the digamma
// equation log(k) - psi(k) = log(mean) - mean(log).
inline GammaFit fit_gamma_fading(const std::vector<double> &samples)
{
    if (samples.size() < 20)
        throw UsageError("fit_gamma_fading: need at least 20 samples");
    double sum = 0.0, logsum = 0.0;
    for (double x : samples) {
        if (x <= 0.0)
            throw UsageError("fit_gamma_fading: samples must be positive");
        sum += x;
        logsum += std::log(x);
    }
    const double m = sum / double(samples.size());
    const double s = std::log(m) - logsum / double(samples.size());
    GammaFit fit;
    if (s < 1e-10) { // constant samples, k -> infinity
        fit.degenerate = true;
        fit.k = std::numeric_limits<double>::infinity();
        fit.theta = 0.0;
        fit.mean = m;
        return fit;
    }
    double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int i = 0; i < 100; ++i) {
        const double f = std::log(k) - digamma(k) - s;
        const double fp = 1.0 / k - trigamma(k);
        double step = f / fp;
        if (k - step <= 0.0)
            step = k / 2.0;
        k -= step;
        if (std::abs(step) < 1e-12 * k)
            break;
    }
    fit.k = k;
    fit.theta = m / k;
    fit.mean = fit.k * fit.theta;
    return fit;
}

// Coherence-distance estimate: resample onto a uniform distance grid, take
// the sample autocorrelation of the mean-removed process, and least-squares
// fit exp(-lag/d_c) over lags up to the first zero crossing. Returns nullopt
// for an all-constant input.
inline std::optional<double>
estimate_coherence_distance(const std::vector<std::pair<double, double>> &samples)
{
    if (samples.size() < 50)
        throw UsageError("estimate_coherence_distance: need at least 50 samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].first < samples[i - 1].first)
            throw UsageError("estimate_coherence_distance: distances must be nondecreasing");

    const double span = samples.back().first - samples.front().first;
    if (span <= 0.0)
        throw UsageError("estimate_coherence_distance: zero distance span");
    const std::size_t n = samples.size();
    const double step = span / double(n - 1);

    // Linear resampling onto the uniform grid.
    std::vector<double> u(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = samples.front().first + double(i) * step;
        while (k + 2 < n && samples[k + 1].first < x)
            ++k;
        const double x0 = samples[k].first, x1 = samples[k + 1].first;
        const double w = (x1 > x0) ? std::clamp((x - x0) / (x1 - x0), 0.0, 1.0) : 0.0;
        u[i] = (1.0 - w) * samples[k].second + w * samples[k + 1].second;
    }

    const double m = mean(u);
    double var = 0.0;
    for (double x : u)
        var += (x - m) * (x - m);
    var /= double(n);
    if (var < 1e-24)
        return std::nullopt;

    const std::size_t max_lag = n / 2;
    std::vector<double> rho;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            acc += (u[i] - m) * (u[i + lag] - m);
        const double r = acc / (double(n) * var);
        if (r <= 0.0)
            break;
        rho.push_back(r);
    }
    if (rho.empty())
        return 0.0; // decorrelated within one lag

    auto sse = [&](double dc) {
        double v = 0.0;
        for (std::size_t l = 0; l < rho.size(); ++l) {
            const double e = rho[l] - std::exp(-double(l + 1) * step / dc);
            v += e * e;
        }
        return v;
    };
    // Golden-section search over d_c.
    double lo = step / 100.0, hi = 2.0 * span;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = sse(c1), f2 = sse(c2);
    for (int i = 0; i < 200; ++i) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = sse(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = sse(c2);
        }
        if (b - a < 1e-6 * hi)
            break;
    }
    return 0.5 * (a + b);
}

} // namespace gscm
