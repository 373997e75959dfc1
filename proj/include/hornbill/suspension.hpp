#pragma once

#include <hornbill/errors.hpp>
#include <hornbill/horn.hpp>
#include <hornbill/parallel.hpp>
#include <hornbill/quadrature.hpp>
#include <hornbill/random.hpp>
#include <hornbill/table.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hornbill::suspension {

using table::CollisionCoord;
using table::Side;
using table::TableConfig;

/// Draws an outgoing point from the invariant measure r_i cos(phi) dtheta dphi.
[[nodiscard]] inline CollisionCoord sample_mu(const TableConfig& cfg, Rng& rng)
{
    const double total = cfg.total_radius();
    double pick = rng.uniform() * total;
    std::size_t i = 0;
    for (; i + 1 < cfg.obstacles.size(); ++i) {
        pick -= cfg.obstacles[i].radius;
        if (pick < 0.0) {
            break;
        }
    }
    const double theta = table::two_pi * rng.uniform();
    const double phi = std::asin(2.0 * rng.uniform() - 1.0);
    return {i, theta, phi, Side::outgoing};
}

struct HeightSample {
    double tau = 0.0;
    double sojourn = 0.0;
    double h = 0.0;
};

/// Roof function: flight time plus the sojourn in the horn the flight ends at.
[[nodiscard]] inline HeightSample height(const TableConfig& cfg, const CollisionCoord& x, const QuadratureSettings& q = {})
{
    const auto f = table::flight(cfg, x);
    HeightSample s;
    s.tau = f.tau;
    const auto& obs = cfg.obstacles[f.hit.obstacle];
    if (obs.is_horn()) {
        s.sojourn = 2.0 * horn::tmax(obs.profile(), f.hit.phi, q);
    }
    s.h = s.tau + s.sojourn;
    return s;
}

struct TailRow {
    double t = 0.0;
    double s_star = 0.0;
    double asymptote = 0.0;
    double asymptote_ratio = 0.0;
};

/**
 * @brief Probability that one horn visit lasts longer than t.
 *
 * Solves 2 T_max(phi*) = t; under the cos-density the probability is
 * s* = sin(phi*). The asymptote is (t / (2 I0))^-beta.
 */
[[nodiscard]] inline std::vector<TailRow> tail_profile(const horn::HornProfile& prof, const std::vector<double>& t_grid,
                                                       const QuadratureSettings& q = {})
{
    const auto c = horn::asymptotic_constants(prof);
    const double floor_t = 2.0 * horn::tmax(prof, horn::half_pi - 1e-9, q);
    std::vector<TailRow> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid) {
        if (!(t > floor_t) || !std::isfinite(t)) {
            throw RangeError("tail_profile: t = " + std::to_string(t) + " outside the invertible range");
        }
        TailRow row;
        row.t = t;
        row.asymptote = std::pow(t / (2.0 * c.i0), -prof.beta);
        const double guess = row.asymptote < 1.0 ? std::asin(row.asymptote) : horn::half_pi;
        auto f = [&](double phi) { return 2.0 * horn::tmax(prof, phi, q); };
        row.s_star = std::sin(horn::detail::solve_decreasing(f, t, guess, "tail_profile"));
        row.asymptote_ratio = row.s_star / row.asymptote;
        rows.push_back(row);
    }
    return rows;
}

enum class Termination { completed, trapped, horizon_error };

inline const char* to_string(Termination t)
{
    switch (t) {
    case Termination::completed:
        return "completed";
    case Termination::trapped:
        return "trapped";
    case Termination::horizon_error:
        return "horizon_error";
    }
    return "unknown";
}

struct OrbitPoint {
    CollisionCoord coord;
    double time = 0.0;
    double tau = 0.0;
    double sojourn = 0.0;
};

struct OrbitRecord {
    std::vector<OrbitPoint> points;
    Termination termination = Termination::completed;
    std::string message;
};

/// Stop after a collision count, after a flow time, or at whichever comes first.
struct Horizon {
    std::optional<std::size_t> collisions;
    std::optional<double> flow_time;
};

/// Iterates the billiard map from x0, accumulating flight and sojourn times.
[[nodiscard]] inline OrbitRecord orbit(const TableConfig& cfg, const CollisionCoord& x0, const Horizon& horizon,
                                       const QuadratureSettings& q = {})
{
    if (!horizon.collisions && !horizon.flow_time) {
        throw PreconditionError("orbit: horizon needs a collision count or a flow time");
    }
    OrbitRecord rec;
    rec.points.push_back({x0, 0.0, 0.0, 0.0});
    if (horizon.collisions) {
        rec.points.reserve(*horizon.collisions + 1);
    }
    CollisionCoord x = x0;
    double time = 0.0;
    while (true) {
        if (horizon.collisions && rec.points.size() > *horizon.collisions) {
            break;
        }
        if (horizon.flow_time && time >= *horizon.flow_time) {
            break;
        }
        try {
            const auto step = table::billiard_map(cfg, x, q);
            time += step.tau + step.sojourn;
            x = step.next;
            rec.points.push_back({x, time, step.tau, step.sojourn});
        } catch (const TrappedError& e) {
            rec.termination = Termination::trapped;
            rec.message = e.what();
            break;
        } catch (const HorizonError& e) {
            rec.termination = Termination::horizon_error;
            rec.message = e.what();
            break;
        }
    }
    return rec;
}

struct OccupationResult {
    double occupation = 0.0;
    std::size_t collisions = 0;
    Termination termination = Termination::completed;
};

/**
 * @brief Time spent inside obstacle @p horn_i during [0, T].
 *
 * The excursion straddling T is clipped linearly. Hard scatterers give 0.
 */
[[nodiscard]] inline OccupationResult horn_occupation(const TableConfig& cfg, const CollisionCoord& x0, double T,
                                                      std::size_t horn_i, const QuadratureSettings& q = {})
{
    if (horn_i >= cfg.obstacles.size()) {
        throw DomainError("horn_occupation: obstacle index out of range");
    }
    const auto& target = cfg.obstacles[horn_i];
    if (target.is_horn() && !(target.profile().beta > 1.0)) {
        throw PreconditionError("horn_occupation: horn beta must exceed 1 (finite mean height)");
    }
    OccupationResult res;
    if (!target.is_horn()) {
        return res;
    }
    CollisionCoord x = x0;
    double time = 0.0;
    try {
        while (time < T) {
            const auto step = table::billiard_map(cfg, x, q);
            ++res.collisions;
            time += step.tau;
            if (time >= T) {
                break;
            }
            if (step.next.obstacle == horn_i) {
                res.occupation += std::min(step.sojourn, T - time);
            }
            time += step.sojourn;
            x = step.next;
        }
    } catch (const TrappedError&) {
        res.termination = Termination::trapped;
    } catch (const HorizonError&) {
        res.termination = Termination::horizon_error;
    }
    return res;
}

/// Invariant-measure means of the roof function.
struct MeanHeight {
    double tau = 0.0;
    std::vector<double> sojourn;
    double h = 0.0;

    /// Long-run fraction of flow time spent in obstacle i.
    [[nodiscard]] double occupation_fraction(std::size_t i) const { return sojourn.at(i) / h; }
};

/// int_0^1 2 T_max(asin s) ds, the mean sojourn per visit; +inf for beta <= 1.
[[nodiscard]] inline double mean_visit_sojourn(const horn::HornProfile& prof, const QuadratureSettings& q = {})
{
    const double b = prof.beta;
    if (!(b > 1.0)) {
        return std::numeric_limits<double>::infinity();
    }
    // s = w^m flattens the s^(-1/beta) endpoint singularity.
    const double m = std::ceil(b / (b - 1.0));
    const double i0 = horn::asymptotic_constants(prof).i0;
    auto f = [&](double w) {
        const double s = std::pow(w, m);
        if (s < horn::head_on_tolerance) {
            return m * i0 * std::exp((m * (1.0 - 1.0 / b) - 1.0) * std::log(w));
        }
        const double phi = std::asin(std::min(s, 1.0));
        return horn::tmax(prof, phi, q) * m * std::pow(w, m - 1.0);
    };
    const auto breaks = dyadic_breakpoints(1e-8, 0.5);
    return 2.0 * integrate(f, 0.0, 1.0, q, breaks).value;
}

/**
 * @brief Exact means under mu: flight time by Santalo's formula
 * pi |Q| / |boundary|, sojourns from the per-visit mean weighted by r_i.
 */
[[nodiscard]] inline MeanHeight mean_height(const TableConfig& cfg, const QuadratureSettings& q = {})
{
    MeanHeight m;
    double disks = 0.0;
    for (const auto& o : cfg.obstacles) {
        disks += std::numbers::pi * o.radius * o.radius;
    }
    const double total = cfg.total_radius();
    const double free_area = cfg.domain.width * cfg.domain.height - disks;
    m.tau = free_area / (2.0 * total);
    m.h = m.tau;
    for (const auto& o : cfg.obstacles) {
        double s = 0.0;
        if (o.is_horn()) {
            s = o.radius / total * mean_visit_sojourn(o.profile(), q);
        }
        m.sojourn.push_back(s);
        m.h += s;
    }
    return m;
}

struct MeanEstimate {
    double mean = 0.0;
    double std_err = 0.0;
};

struct HeightMonteCarlo {
    MeanEstimate tau;
    MeanEstimate h;
    std::vector<MeanEstimate> sojourn;
    std::size_t samples = 0;
    std::size_t trapped = 0;
};

/// Plain Monte Carlo means of tau, h and per-obstacle sojourn over mu-samples.
[[nodiscard]] inline HeightMonteCarlo height_monte_carlo(const TableConfig& cfg, std::size_t n, std::uint64_t seed,
                                                         const QuadratureSettings& q = {}, unsigned workers = 1)
{
    const std::size_t blocks = std::max<std::size_t>(1, std::min<std::size_t>(n, 64));
    const std::size_t k = cfg.obstacles.size();
    struct Acc {
        std::vector<double> sum;
        std::vector<double> sq;
        std::size_t trapped = 0;
    };
    std::vector<Acc> acc(blocks);
    parallel_for(blocks, workers, [&](std::size_t bi) {
        Rng rng(seed, 0x68656967ULL, bi);
        auto& a = acc[bi];
        a.sum.assign(k + 2, 0.0);
        a.sq.assign(k + 2, 0.0);
        const std::size_t lo = n * bi / blocks;
        const std::size_t hi = n * (bi + 1) / blocks;
        for (std::size_t j = lo; j < hi; ++j) {
            const auto x = sample_mu(cfg, rng);
            HeightSample s;
            std::size_t target = 0;
            try {
                const auto f = table::flight(cfg, x);
                target = f.hit.obstacle;
                s.tau = f.tau;
                const auto& obs = cfg.obstacles[target];
                if (obs.is_horn()) {
                    s.sojourn = 2.0 * horn::tmax(obs.profile(), f.hit.phi, q);
                }
                s.h = s.tau + s.sojourn;
            } catch (const TrappedError&) {
                ++a.trapped;
                continue;
            }
            const double v[2] = {s.tau, s.h};
            for (int c = 0; c < 2; ++c) {
                a.sum[c] += v[c];
                a.sq[c] += v[c] * v[c];
            }
            for (std::size_t o = 0; o < k; ++o) {
                const double so = o == target ? s.sojourn : 0.0;
                a.sum[2 + o] += so;
                a.sq[2 + o] += so * so;
            }
        }
    });
    HeightMonteCarlo out;
    std::vector<double> sum(k + 2, 0.0);
    std::vector<double> sq(k + 2, 0.0);
    for (const auto& a : acc) {
        for (std::size_t c = 0; c < k + 2; ++c) {
            sum[c] += a.sum[c];
            sq[c] += a.sq[c];
        }
        out.trapped += a.trapped;
    }
    out.samples = n - out.trapped;
    const double cnt = static_cast<double>(out.samples);
    auto est = [&](std::size_t c) {
        const double mean = sum[c] / cnt;
        const double var = std::max(0.0, sq[c] / cnt - mean * mean);
        return MeanEstimate{mean, std::sqrt(var / cnt)};
    };
    out.tau = est(0);
    out.h = est(1);
    for (std::size_t o = 0; o < k; ++o) {
        out.sojourn.push_back(est(2 + o));
    }
    return out;
}

} // namespace hornbill::suspension
