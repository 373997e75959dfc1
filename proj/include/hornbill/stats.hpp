#pragma once

#include <hornbill/errors.hpp>
#include <hornbill/parallel.hpp>
#include <hornbill/quadrature.hpp>
#include <hornbill/random.hpp>
#include <hornbill/suspension.hpp>
#include <hornbill/table.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hornbill::stats {

struct EnsembleMeta {
    std::uint64_t seed = 0;
    std::string config_hash;
    double horizon = 0.0;
    std::string observable;
};

struct Ensemble {
    std::vector<double> samples;
    EnsembleMeta meta;
};

struct TailFit {
    double index = 0.0;
    std::size_t k_used = 0;
    double std_err = 0.0;
};

/**
 * @brief Hill estimator of the tail index from the top @p tail_fraction
 * order statistics. Stderr is the asymptotic index / sqrt(k).
 */
[[nodiscard]] inline TailFit hill(std::span<const double> samples, double tail_fraction)
{
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
        throw DomainError("hill: tail_fraction must lie in (0, 1)");
    }
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(samples.size()) * tail_fraction));
    if (k < 10 || k >= samples.size()) {
        throw PreconditionError("hill: needs at least 10 order statistics, got " + std::to_string(k));
    }
    std::vector<double> top(samples.begin(), samples.end());
    std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k), top.end(), std::greater<>());
    const double threshold = top[k];
    if (!(threshold > 0.0)) {
        throw PreconditionError("hill: tail order statistics must be positive");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sum += std::log(top[i] / threshold);
    }
    if (!(sum > 0.0)) {
        throw DegenerateError("hill: constant tail");
    }
    TailFit fit;
    fit.k_used = k;
    fit.index = static_cast<double>(k) / sum;
    fit.std_err = fit.index / std::sqrt(static_cast<double>(k));
    return fit;
}

/// Hill fits over several tail fractions; an index drifting with the fraction signals no regular variation.
[[nodiscard]] inline std::vector<TailFit> hill_path(std::span<const double> samples, const std::vector<double>& fractions)
{
    std::vector<TailFit> out;
    out.reserve(fractions.size());
    for (double f : fractions) {
        out.push_back(hill(samples, f));
    }
    return out;
}

struct AcfFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Decay rate -slope of log|rho| per lag.
    double rate = 0.0;
    std::vector<std::size_t> lags;
    /// True when fewer than two lags cleared the noise floor and lags 1-2 were used.
    bool fallback = false;
};

struct AcfResult {
    std::vector<double> rho;
    double noise_floor = 0.0;
    AcfFit fit;
};

/// Least-squares line through (lag, log|rho(lag)|) over the given lags.
[[nodiscard]] inline AcfFit fit_log_acf(const std::vector<double>& rho, const std::vector<std::size_t>& lags)
{
    if (lags.size() < 2) {
        throw PreconditionError("acf fit needs at least two lags");
    }
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    const double n = static_cast<double>(lags.size());
    for (std::size_t l : lags) {
        const double x = static_cast<double>(l);
        const double y = std::log(std::max(std::abs(rho.at(l)), 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    AcfFit fit;
    fit.lags = lags;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.rate = -fit.slope;
    return fit;
}

/**
 * @brief Biased sample autocorrelation up to @p max_lag with an exponential
 * fit over lags whose |rho| exceeds the white-noise floor 3/sqrt(N).
 */
[[nodiscard]] inline AcfResult acf(std::span<const double> series, std::size_t max_lag)
{
    if (max_lag < 1 || series.size() < 50 * max_lag) {
        throw PreconditionError("acf: series length must be at least 50 * max_lag");
    }
    const double n = static_cast<double>(series.size());
    double mean = 0.0;
    for (double v : series) {
        mean += v;
    }
    mean /= n;
    std::vector<double> c(series.begin(), series.end());
    for (double& v : c) {
        v -= mean;
    }
    AcfResult res;
    res.rho.resize(max_lag + 1);
    double c0 = 0.0;
    for (double v : c) {
        c0 += v * v;
    }
    if (!(c0 > 0.0)) {
        throw DegenerateError("acf: zero-variance series");
    }
    res.rho[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < c.size(); ++i) {
            s += c[i] * c[i + k];
        }
        res.rho[k] = s / c0;
    }
    res.noise_floor = 3.0 / std::sqrt(n);
    std::vector<std::size_t> lags;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        if (std::abs(res.rho[k]) > res.noise_floor) {
            lags.push_back(k);
        }
    }
    if (lags.size() >= 2) {
        res.fit = fit_log_acf(res.rho, lags);
    } else if (max_lag >= 2) {
        res.fit = fit_log_acf(res.rho, {1, 2});
        res.fit.fallback = true;
    } else {
        res.fit.fallback = true;
    }
    return res;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
[[nodiscard]] inline double ks(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw PreconditionError("ks: samples must be nonempty");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) {
            ++i;
        }
        while (j < y.size() && y[j] == v) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
template <class Cdf>
[[nodiscard]] double ks_one_sample(std::span<const double> a, Cdf&& cdf)
{
    if (a.empty()) {
        throw PreconditionError("ks: sample must be nonempty");
    }
    std::vector<double> x(a.begin(), a.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// KS distance between a sample and the normal law with the sample's mean and deviation.
[[nodiscard]] inline double ks_gaussian_fit(std::span<const double> a)
{
    const double n = static_cast<double>(a.size());
    double mean = 0.0;
    for (double v : a) {
        mean += v;
    }
    mean /= n;
    double var = 0.0;
    for (double v : a) {
        var += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(var / (n - 1.0));
    if (!(sd > 0.0)) {
        throw DegenerateError("ks_gaussian_fit: zero-variance sample");
    }
    return ks_one_sample(a, [&](double x) { return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2)); });
}

/**
 * @brief Standard alpha-stable variates (Chambers-Mallows-Stuck), in the
 * parameterization with characteristic exponent alpha and skewness @p skew.
 */
[[nodiscard]] inline Ensemble stable_sample(double alpha, double skew, std::size_t n, std::uint64_t seed)
{
    if (!(alpha > 0.0 && alpha <= 2.0)) {
        throw DomainError("stable_sample: alpha must lie in (0, 2]");
    }
    if (!(skew >= -1.0 && skew <= 1.0)) {
        throw DomainError("stable_sample: skew must lie in [-1, 1]");
    }
    Rng rng(seed, 0x737461626cULL);
    Ensemble e;
    e.meta.seed = seed;
    e.meta.observable = "stable(alpha=" + std::to_string(alpha) + ",skew=" + std::to_string(skew) + ")";
    e.samples.reserve(n);
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = pi * (rng.uniform_open() - 0.5);
        const double w = rng.exponential();
        double x;
        if (alpha == 1.0) {
            const double a = 0.5 * pi + skew * v;
            x = 2.0 / pi * (a * std::tan(v) - skew * std::log(0.5 * pi * w * std::cos(v) / a));
        } else {
            const double t = skew * std::tan(0.5 * pi * alpha);
            const double b = std::atan(t) / alpha;
            const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
            x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
                std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
        }
        e.samples.push_back(x);
    }
    return e;
}

enum class Scaling { automatic, stable, log_gaussian, gaussian };

inline const char* to_string(Scaling s)
{
    switch (s) {
    case Scaling::automatic:
        return "automatic";
    case Scaling::stable:
        return "T^(1/beta)";
    case Scaling::log_gaussian:
        return "sqrt(T log T)";
    case Scaling::gaussian:
        return "sqrt(T)";
    }
    return "unknown";
}

/// Regime of the horn exponent: stable for beta < 2, log-corrected at 2, Gaussian above.
[[nodiscard]] inline Scaling regime(double beta)
{
    if (beta < 2.0) {
        return Scaling::stable;
    }
    return beta == 2.0 ? Scaling::log_gaussian : Scaling::gaussian;
}

[[nodiscard]] inline double scale_factor(Scaling s, double T, double beta)
{
    switch (s) {
    case Scaling::stable:
        return std::pow(T, 1.0 / beta);
    case Scaling::log_gaussian:
        return std::sqrt(T * std::log(T));
    case Scaling::gaussian:
        return std::sqrt(T);
    case Scaling::automatic:
        break;
    }
    return scale_factor(regime(beta), T, beta);
}

/// Observable a * 1{inside horn} + c, integrated along the flow.
struct Observable {
    double horn_weight = 1.0;
    double offset = 0.0;
};

struct LimitLawOptions {
    std::size_t replicas = 2000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    Scaling scaling = Scaling::automatic;
    Observable observable;
    double tail_fraction = 0.05;
    QuadratureSettings quadrature;
    std::string config_hash;
};

struct LimitLawRow {
    double T = 0.0;
    double scale = 0.0;
    /// Centered sums S_T per replica; NaN marks a discarded (trapped) replica.
    std::vector<double> raw;
    Ensemble scaled;
    std::size_t trapped = 0;
    std::optional<TailFit> hill;
    double ks_gaussian = 0.0;
};

struct LimitLawResult {
    double v_bar = 0.0;
    Scaling scaling = Scaling::automatic;
    std::vector<LimitLawRow> rows;
    /// KS distance between the scaled ensembles of consecutive T.
    std::vector<double> ks_consecutive;
    std::vector<std::string> warnings;
};

/**
 * @brief Scaled centered occupation sums S_T = int_0^T v dt - T * mean(v)
 * over independent orbits started from mu.
 *
 * Replica r at the t-th horizon uses the generator stream (seed, t, r), so
 * the output is independent of the worker count. The mean of v comes from
 * the exact invariant-measure means.
 */
[[nodiscard]] inline LimitLawResult limit_law_experiment(const table::TableConfig& cfg, std::size_t horn_i,
                                                         const std::vector<double>& T_list, const LimitLawOptions& opt)
{
    if (horn_i >= cfg.obstacles.size() || !cfg.obstacles[horn_i].is_horn()) {
        throw DomainError("limit_law_experiment: obstacle " + std::to_string(horn_i) + " is not a horn");
    }
    const double beta = cfg.obstacles[horn_i].profile().beta;
    if (!(beta > 1.0)) {
        throw PreconditionError("limit_law_experiment: horn beta must exceed 1");
    }
    if (opt.replicas < 500) {
        throw PreconditionError("limit_law_experiment: needs at least 500 replicas");
    }
    if (T_list.empty()) {
        throw PreconditionError("limit_law_experiment: empty horizon list");
    }
    for (double T : T_list) {
        if (!(T > 1.0) || !std::isfinite(T)) {
            throw DomainError("limit_law_experiment: horizons must exceed 1");
        }
    }
    LimitLawResult res;
    res.scaling = opt.scaling == Scaling::automatic ? regime(beta) : opt.scaling;
    const auto means = suspension::mean_height(cfg, opt.quadrature);
    const double frac = means.occupation_fraction(horn_i);
    res.v_bar = opt.observable.horn_weight * frac + opt.observable.offset;

    for (std::size_t ti = 0; ti < T_list.size(); ++ti) {
        const double T = T_list[ti];
        LimitLawRow row;
        row.T = T;
        row.scale = scale_factor(res.scaling, T, beta);
        row.raw.assign(opt.replicas, std::numeric_limits<double>::quiet_NaN());
        parallel_for(opt.replicas, opt.workers, [&](std::size_t r) {
            Rng rng(opt.seed, ti, r);
            const auto x0 = suspension::sample_mu(cfg, rng);
            const auto occ = suspension::horn_occupation(cfg, x0, T, horn_i, opt.quadrature);
            if (occ.termination != suspension::Termination::completed) {
                return;
            }
            const double integral = opt.observable.horn_weight * occ.occupation + opt.observable.offset * T;
            row.raw[r] = integral - T * res.v_bar;
        });
        row.scaled.meta = {opt.seed, opt.config_hash, T, "horn " + std::to_string(horn_i) + " occupation"};
        for (double v : row.raw) {
            if (std::isnan(v)) {
                ++row.trapped;
            } else {
                row.scaled.samples.push_back(v / row.scale);
            }
        }
        if (row.scaled.samples.size() < 20) {
            throw Error("limit_law_experiment: too few completed replicas at T = " + std::to_string(T));
        }
        if (static_cast<double>(row.trapped) > 1e-3 * static_cast<double>(opt.replicas)) {
            res.warnings.push_back(std::to_string(row.trapped) + " replicas trapped at T = " + std::to_string(T));
        }
        std::vector<double> mags;
        mags.reserve(row.scaled.samples.size());
        for (double v : row.scaled.samples) {
            mags.push_back(std::abs(v));
        }
        try {
            row.hill = hill(mags, opt.tail_fraction);
        } catch (const Error&) {
            row.hill.reset();
        }
        row.ks_gaussian = ks_gaussian_fit(row.scaled.samples);
        res.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i + 1 < res.rows.size(); ++i) {
        res.ks_consecutive.push_back(ks(res.rows[i].scaled.samples, res.rows[i + 1].scaled.samples));
    }
    return res;
}

} // namespace hornbill::stats
