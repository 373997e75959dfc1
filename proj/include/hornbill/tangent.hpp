#pragma once

#include <hornbill/errors.hpp>
#include <hornbill/horn.hpp>
#include <hornbill/quadrature.hpp>
#include <hornbill/random.hpp>
#include <hornbill/suspension.hpp>
#include <hornbill/table.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hornbill::tangent {

using table::CollisionCoord;
using table::Side;
using table::TableConfig;

/// 2x2 derivative acting on column vectors (dtheta, dphi).
struct TangentMatrix {
    std::array<std::array<double, 2>, 2> m{};

    [[nodiscard]] double operator()(int i, int j) const { return m[i][j]; }
    [[nodiscard]] double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
    [[nodiscard]] double max_abs() const
    {
        return std::max({std::abs(m[0][0]), std::abs(m[0][1]), std::abs(m[1][0]), std::abs(m[1][1])});
    }

    [[nodiscard]] std::array<double, 2> apply(const std::array<double, 2>& v) const
    {
        return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
    }

    friend TangentMatrix operator*(const TangentMatrix& a, const TangentMatrix& b)
    {
        TangentMatrix c;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                c.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
            }
        }
        return c;
    }
};

/// Largest entrywise difference relative to the largest entry of @p ref.
[[nodiscard]] inline double relative_difference(const TangentMatrix& a, const TangentMatrix& ref)
{
    double d = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            d = std::max(d, std::abs(a.m[i][j] - ref.m[i][j]));
        }
    }
    return d / ref.max_abs();
}

enum class Cone { unstable, stable };

/// Membership of (dtheta, dphi) in the closed quadrant cone.
[[nodiscard]] inline bool in_cone(Cone c, double dtheta, double dphi)
{
    return c == Cone::unstable ? dtheta * dphi >= 0.0 : dtheta * dphi <= 0.0;
}

/// True iff all four entries share one strict sign, i.e. the unstable quadrant maps strictly into itself.
[[nodiscard]] inline bool cone_check(const TangentMatrix& a)
{
    const auto& m = a.m;
    const bool pos = m[0][0] > 0 && m[0][1] > 0 && m[1][0] > 0 && m[1][1] > 0;
    const bool neg = m[0][0] < 0 && m[0][1] < 0 && m[1][0] < 0 && m[1][1] < 0;
    return pos || neg;
}

/**
 * @brief Strict invariance of the divergent-wavefront cone
 * dtheta * (dtheta + dphi) >= 0.
 *
 * In coordinates (theta, psi = theta + phi) this cone is a quadrant, so the
 * sign-pattern test applies to P m P^-1 with P = [[1,0],[1,1]].
 */
[[nodiscard]] inline bool wavefront_cone_check(const TangentMatrix& a)
{
    const auto& m = a.m;
    TangentMatrix c;
    c.m[0][0] = m[0][0] - m[0][1];
    c.m[0][1] = m[0][1];
    c.m[1][0] = m[0][0] + m[1][0] - m[0][1] - m[1][1];
    c.m[1][1] = m[0][1] + m[1][1];
    return cone_check(c);
}

/// Derivative of the flight map from outgoing (theta_i, phi_i) to incoming (theta_j, phi_j).
[[nodiscard]] inline TangentMatrix dflight(const TableConfig& cfg, const CollisionCoord& out, const table::FlightResult& next)
{
    const double ri = cfg.obstacles.at(out.obstacle).radius;
    const double rj = cfg.obstacles.at(next.hit.obstacle).radius;
    const double ci = ri * std::cos(out.phi);
    const double cj_raw = std::cos(next.hit.phi);
    if (cj_raw < 1e-12) {
        throw GrazingError("dflight: near-grazing arrival, cos(phi) = " + std::to_string(cj_raw));
    }
    const double cj = rj * cj_raw;
    const double tau = next.tau;
    TangentMatrix d;
    d.m = {{{-(tau + ci) / cj, -tau / cj}, {(tau + ci + cj) / cj, (tau + cj) / cj}}};
    return d;
}

/// Derivative of the reflection at obstacle @p obs given the incoming angle.
[[nodiscard]] inline TangentMatrix dreflect(const table::Obstacle& obs, double phi_in, const QuadratureSettings& q = {})
{
    double k = 0.0;
    if (obs.is_horn()) {
        if (std::abs(phi_in) < horn::head_on_tolerance) {
            throw TrappedError("dreflect: head-on entry into horn");
        }
        k = horn::kappa(obs.profile(), -phi_in, q);
    }
    TangentMatrix r;
    r.m = {{{1.0, -k}, {0.0, -1.0}}};
    return r;
}

/// Analytic DT at a precomputed map step.
[[nodiscard]] inline TangentMatrix dmap_at(const TableConfig& cfg, const CollisionCoord& x, const table::MapStep& step,
                                           const QuadratureSettings& q = {})
{
    const auto& inc = step.flight.hit;
    return dreflect(cfg.obstacles[inc.obstacle], inc.phi, q) * dflight(cfg, x, step.flight);
}

/// Analytic derivative of the billiard map T = R o F.
[[nodiscard]] inline TangentMatrix dmap(const TableConfig& cfg, const CollisionCoord& x, const QuadratureSettings& q = {})
{
    return dmap_at(cfg, x, table::billiard_map(cfg, x, q), q);
}

namespace detail {

struct Probe {
    double theta;
    double phi;
    std::size_t obstacle;
    table::ImageIndex image;
    bool downstream_positive;
};

// Image of x under the flight map (reflect = false) or the full map, with branch data.
inline Probe probe(const TableConfig& cfg, const CollisionCoord& x, bool reflect, const QuadratureSettings& q)
{
    if (!(std::abs(x.phi) < horn::half_pi)) {
        throw SingularityError("dmap_fd: stencil leaves the open phase space");
    }
    if (!reflect) {
        const auto f = table::flight(cfg, x);
        return {f.hit.theta, f.hit.phi, f.hit.obstacle, f.image, f.hit.phi > 0.0};
    }
    const auto s = table::billiard_map(cfg, x, q);
    return {s.next.theta, s.next.phi, s.next.obstacle, s.flight.image, s.flight.hit.phi > 0.0};
}

inline TangentMatrix central_difference(const TableConfig& cfg, const CollisionCoord& x, double h, bool reflect,
                                        const QuadratureSettings& q, bool richardson = false)
{
    if (richardson) {
        const auto coarse = central_difference(cfg, x, h, reflect, q);
        const auto fine = central_difference(cfg, x, 0.5 * h, reflect, q);
        TangentMatrix r;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                r.m[i][j] = (4.0 * fine.m[i][j] - coarse.m[i][j]) / 3.0;
            }
        }
        return r;
    }
    if (!(h > 0.0)) {
        throw DomainError("dmap_fd: step must be positive");
    }
    const Probe base = probe(cfg, x, reflect, q);
    const bool horn_target = cfg.obstacles[base.obstacle].is_horn();
    TangentMatrix d;
    for (int col = 0; col < 2; ++col) {
        CollisionCoord xp = x;
        CollisionCoord xm = x;
        if (col == 0) {
            xp.theta = table::wrap_angle(x.theta + h);
            xm.theta = table::wrap_angle(x.theta - h);
        } else {
            xp.phi = x.phi + h;
            xm.phi = x.phi - h;
        }
        const Probe p = probe(cfg, xp, reflect, q);
        const Probe m = probe(cfg, xm, reflect, q);
        for (const Probe* pr : {&p, &m}) {
            if (pr->obstacle != base.obstacle || !(pr->image == base.image) ||
                (horn_target && pr->downstream_positive != base.downstream_positive)) {
                throw SingularityError("dmap_fd: perturbation crosses a singularity curve");
            }
        }
        d.m[0][col] = table::angle_diff(p.theta, m.theta) / (2.0 * h);
        d.m[1][col] = (p.phi - m.phi) / (2.0 * h);
    }
    return d;
}

} // namespace detail

enum class FdScheme { central, richardson };

/**
 * @brief Central-difference Jacobian of the billiard map; the reference for dmap.
 *
 * FdScheme::richardson combines steps h and h/2 for fourth-order accuracy.
 */
[[nodiscard]] inline TangentMatrix dmap_fd(const TableConfig& cfg, const CollisionCoord& x, double h,
                                           const QuadratureSettings& q = {}, FdScheme scheme = FdScheme::central)
{
    return detail::central_difference(cfg, x, h, true, q, scheme == FdScheme::richardson);
}

/// Central-difference Jacobian of the flight map alone.
[[nodiscard]] inline TangentMatrix dflight_fd(const TableConfig& cfg, const CollisionCoord& x, double h)
{
    return detail::central_difference(cfg, x, h, false, {});
}

struct LyapunovEstimate {
    double lambda = 0.0;
    double std_err = 0.0;
    std::size_t steps = 0;
    std::size_t restarts = 0;
};

struct LyapunovOptions {
    std::size_t batches = 20;
    /// Restart budget; 0 means n.
    std::size_t max_restarts = 0;
    double grazing_margin = 1e-4;
    double head_on_margin = 1e-4;
};

/**
 * @brief Top Lyapunov exponent per collision from the growth of a tangent
 * vector, renormalized every step. Stderr comes from batch means.
 *
 * Orbits entering a singular neighbourhood restart from a fresh mu-sample
 * drawn from the stream for @p seed.
 */
[[nodiscard]] inline LyapunovEstimate lyapunov(const TableConfig& cfg, const CollisionCoord& x0, std::size_t n,
                                               std::uint64_t seed, const QuadratureSettings& q = {},
                                               const LyapunovOptions& opt = {})
{
    if (n < 1000) {
        throw PreconditionError("lyapunov: needs n >= 1000 iterations, got " + std::to_string(n));
    }
    const std::size_t batches = std::max<std::size_t>(2, std::min(opt.batches, n));
    const std::size_t budget = opt.max_restarts > 0 ? opt.max_restarts : n;
    Rng rng(seed, 0x6c79617055ULL);
    LyapunovEstimate est;

    auto singular_start = [&](const CollisionCoord& x) { return std::abs(x.phi) > horn::half_pi - opt.grazing_margin; };
    CollisionCoord x = x0;
    std::array<double, 2> v{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    std::vector<double> batch_sum(batches, 0.0);
    std::vector<std::size_t> batch_count(batches, 0);
    double total = 0.0;
    auto restart = [&] {
        if (++est.restarts > budget) {
            throw Error("lyapunov: restart budget exhausted");
        }
        do {
            x = suspension::sample_mu(cfg, rng);
        } while (singular_start(x));
        v = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    };
    if (singular_start(x)) {
        restart();
    }
    std::size_t done = 0;
    while (done < n) {
        double growth = 0.0;
        CollisionCoord next;
        try {
            const auto step = table::billiard_map(cfg, x, q);
            const double phi_in = step.flight.hit.phi;
            const bool at_horn = cfg.obstacles[step.flight.hit.obstacle].is_horn();
            if (std::abs(phi_in) > horn::half_pi - opt.grazing_margin || (at_horn && std::abs(phi_in) < opt.head_on_margin)) {
                restart();
                continue;
            }
            const auto w = dmap_at(cfg, x, step, q).apply(v);
            const double len = std::hypot(w[0], w[1]);
            growth = std::log(len);
            v = {w[0] / len, w[1] / len};
            next = step.next;
        } catch (const TrappedError&) {
            restart();
            continue;
        } catch (const GrazingError&) {
            restart();
            continue;
        } catch (const HorizonError&) {
            restart();
            continue;
        }
        const std::size_t b = done * batches / n;
        batch_sum[b] += growth;
        ++batch_count[b];
        total += growth;
        ++done;
        x = next;
    }
    est.steps = n;
    est.lambda = total / static_cast<double>(n);
    double mean = 0.0;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        means[b] = batch_sum[b] / static_cast<double>(batch_count[b]);
        mean += means[b];
    }
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (double m : means) {
        var += (m - mean) * (m - mean);
    }
    var /= static_cast<double>(batches - 1);
    est.std_err = std::sqrt(var / static_cast<double>(batches));
    return est;
}

/// Graph phi -> theta = w(phi) over [a, b] given by slope samples, linearly interpolated.
struct UnstableCurve {
    std::vector<double> phi;
    std::vector<double> slope;

    [[nodiscard]] static UnstableCurve straight(double a, double b, double w_prime)
    {
        return {{a, b}, {w_prime, w_prime}};
    }

    [[nodiscard]] double lo() const { return phi.front(); }
    [[nodiscard]] double hi() const { return phi.back(); }

    [[nodiscard]] double slope_at(double x) const
    {
        if (x <= phi.front()) {
            return slope.front();
        }
        if (x >= phi.back()) {
            return slope.back();
        }
        const auto it = std::upper_bound(phi.begin(), phi.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - phi.begin());
        const double t = (x - phi[j - 1]) / (phi[j] - phi[j - 1]);
        return slope[j - 1] + t * (slope[j] - slope[j - 1]);
    }
};

struct DistortionResult {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Index k of the homogeneity strip containing phi: floor(|delta_theta| / 2pi).
[[nodiscard]] inline long long strip_index(const horn::HornProfile& prof, double phi, const QuadratureSettings& q = {})
{
    return static_cast<long long>(std::floor(std::abs(horn::delta_theta(prof, phi, q)) / table::two_pi));
}

/**
 * @brief Distortion of the horn reflection along an unstable curve.
 *
 * lhs = log(J(y)/J(x)) with J = sqrt(1+(w'+kappa)^2)/sqrt(1+w'^2);
 * rhs = length of the reflected curve between the images of x and y.
 */
[[nodiscard]] inline DistortionResult distortion_check(const horn::HornProfile& prof, const UnstableCurve& curve, double x,
                                                       double y, const QuadratureSettings& q = {})
{
    if (curve.phi.size() < 2 || curve.phi.size() != curve.slope.size() || !(curve.lo() < curve.hi())) {
        throw DomainError("distortion_check: malformed curve");
    }
    if (!(curve.lo() > 0.0 && curve.hi() < horn::half_pi)) {
        throw DomainError("distortion_check: curve must lie in (0, pi/2)");
    }
    if (x < curve.lo() || x > curve.hi() || y < curve.lo() || y > curve.hi()) {
        throw DomainError("distortion_check: points must lie on the curve");
    }
    if (strip_index(prof, curve.lo(), q) != strip_index(prof, curve.hi(), q)) {
        throw RangeError("distortion_check: curve exits its homogeneity strip");
    }
    auto jac = [&](double p) {
        const double w = curve.slope_at(p);
        const double k = horn::kappa(prof, p, q);
        return std::sqrt(1.0 + (w + k) * (w + k)) / std::sqrt(1.0 + w * w);
    };
    DistortionResult r;
    if (x == y) {
        return r;
    }
    r.lhs = std::log(jac(y) / jac(x));
    auto speed = [&](double p) {
        const double s = curve.slope_at(p) + horn::kappa(prof, p, q);
        return std::sqrt(1.0 + s * s);
    };
    QuadratureSettings outer = q;
    outer.rel_tol = std::max(q.rel_tol, 1e-8);
    r.rhs = std::abs(integrate(speed, std::min(x, y), std::max(x, y), outer).value);
    return r;
}

/// d kappa / d phi by Richardson-extrapolated central differences.
[[nodiscard]] inline double kappa_prime(const horn::HornProfile& prof, double phi, const QuadratureSettings& q = {})
{
    const double a = std::abs(phi);
    double h = 1e-5 * a;
    h = std::min(h, 0.5 * (horn::half_pi - a));
    auto d = [&](double step) { return (horn::kappa(prof, phi + step, q) - horn::kappa(prof, phi - step, q)) / (2.0 * step); };
    return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

struct ConditionItem {
    int index = 0;
    std::string name;
    bool pass = false;
    double witness = 0.0;
    std::string detail;
};

struct ConditionsReport {
    std::vector<ConditionItem> items;

    [[nodiscard]] bool all_pass() const
    {
        return std::all_of(items.begin(), items.end(), [](const ConditionItem& c) { return c.pass; });
    }
};

/// Grid of positive angles accumulating at 0 and at pi/2.
[[nodiscard]] inline std::vector<double> condition_grid()
{
    std::vector<double> g;
    for (int e = -60; e <= -5; ++e) {
        g.push_back(std::pow(10.0, e / 10.0));
    }
    for (int i = 1; i < 30; ++i) {
        g.push_back(0.5 * i / 30.0 * horn::half_pi + 0.3);
    }
    for (int e = 5; e <= 60; ++e) {
        g.push_back(horn::half_pi - std::pow(10.0, -e / 10.0));
    }
    std::sort(g.begin(), g.end());
    return g;
}

/**
 * @brief Grid evaluation of the six regularity conditions a horn must meet
 * for the billiard to be hyperbolic. Each item records its witness number.
 *
 * The flight-time item compares against tau_min sampled from @p cfg.
 */
[[nodiscard]] inline ConditionsReport conditions_report(const horn::HornProfile& prof, const TableConfig& cfg,
                                                        const QuadratureSettings& q = {})
{
    QuadratureSettings fine = q;
    fine.rel_tol = std::min(q.rel_tol, 1e-13);
    const auto grid = condition_grid();
    std::vector<double> k(grid.size());
    std::vector<double> kp(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        k[i] = horn::kappa(prof, grid[i], fine);
        kp[i] = kappa_prime(prof, grid[i], fine);
    }
    ConditionsReport rep;

    double inf_gap = std::numeric_limits<double>::infinity();
    for (double v : k) {
        inf_gap = std::min(inf_gap, std::abs(2.0 + v));
    }
    rep.items.push_back({1, "inf |2 + kappa| > 0", inf_gap > 0.0, inf_gap, "minimum over grid"});

    double sup_ratio = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double omega = (2.0 + k[i]) / std::cos(grid[i]);
        sup_ratio = std::max(sup_ratio, -2.0 * prof.r0 * k[i] / omega);
    }
    const double tau_min = table::validate_table(cfg, {64, 33}).tau_min;
    rep.items.push_back({2, "tau_min > sup -2 r kappa / omega", sup_ratio <= 0.0 && tau_min > sup_ratio, sup_ratio,
                         "tau_min sampled = " + std::to_string(tau_min)});

    double sup_graze = 0.0;
    bool finite_graze = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] > 1.0) {
            sup_graze = std::max(sup_graze, std::abs(k[i]));
            finite_graze = finite_graze && std::isfinite(k[i]);
        }
    }
    rep.items.push_back({3, "kappa bounded near grazing", finite_graze, sup_graze, "sup |kappa| on (1, pi/2)"});

    bool smooth = true;
    double sup_kp = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        smooth = smooth && std::isfinite(kp[i]) && std::isfinite(k[i]);
        if (grid[i] >= 1e-1) {
            sup_kp = std::max(sup_kp, std::abs(kp[i]));
        }
    }
    rep.items.push_back({4, "kappa piecewise C1 on grid", smooth, sup_kp, "sup |kappa'| on [0.1, pi/2)"});

    double sup_ratio5 = 0.0;
    bool finite5 = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] >= 1e-4 && grid[i] <= 1e-1) {
            const double g = std::abs(2.0 + k[i]);
            const double r = std::abs(kp[i]) / (g * g * g);
            finite5 = finite5 && std::isfinite(r);
            sup_ratio5 = std::max(sup_ratio5, r);
        }
    }
    rep.items.push_back({5, "|kappa'| <= C |2 + kappa|^3", finite5, sup_ratio5, "sup ratio on [1e-4, 1e-1]"});

    int sign = 0;
    bool monotone = true;
    double prev = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 1e-4 || grid[i] > 1e-1) {
            continue;
        }
        const double omega = (2.0 + k[i]) / std::cos(grid[i]);
        if (!first) {
            const int s = omega > prev ? 1 : (omega < prev ? -1 : 0);
            if (sign == 0) {
                sign = s;
            } else if (s != 0 && s != sign) {
                monotone = false;
            }
        }
        prev = omega;
        first = false;
    }
    rep.items.push_back({6, "omega monotone near 0", monotone, static_cast<double>(sign),
                         "direction of omega on [1e-4, 1e-1] (+1 increasing)"});
    return rep;
}

struct HeadOnPoint {
    double theta = 0.0;
    double phi = 0.0;
    double residual = 0.0;
};

struct HeadOnCurve {
    std::vector<HeadOnPoint> points;
    std::vector<double> gaps;
};

namespace detail {

struct HeadOnProbe {
    bool valid = false;
    double value = 0.0;
    double length = 0.0;
    table::ImageIndex first;
    table::ImageIndex second;
};

// Downstream incidence angle that vanishes on a head-on trajectory.
inline HeadOnProbe head_on_residual(const TableConfig& cfg, std::size_t horn_j, std::size_t target, double theta,
                                    double phi)
{
    HeadOnProbe r;
    try {
        const auto f1 = table::flight(cfg, {horn_j, theta, phi, Side::outgoing});
        if (f1.hit.obstacle != target) {
            return r;
        }
        r.first = f1.image;
        r.length = f1.tau;
        if (cfg.obstacles[target].is_horn()) {
            r.value = f1.hit.phi;
            r.valid = true;
            return r;
        }
        const auto f2 = table::flight(cfg, {target, f1.hit.theta, -f1.hit.phi, Side::outgoing});
        if (f2.hit.obstacle != horn_j) {
            return r;
        }
        r.second = f2.image;
        r.length += f2.tau;
        r.value = f2.hit.phi;
        r.valid = true;
    } catch (const Error&) {
        r.valid = false;
    }
    return r;
}

} // namespace detail

/**
 * @brief Traces the curve of outgoing points on horn @p horn_j whose orbit
 * is head-on at a horn: directly when @p opposite is a horn, or after one
 * specular bounce off @p opposite when it is a scatterer.
 *
 * For each theta the phi-range is scanned for sign changes of the
 * downstream incidence angle, then bisected. The root on the shortest
 * path wins; thetas without a bracket are returned as gaps.
 */
[[nodiscard]] inline HeadOnCurve head_on_curve(const TableConfig& cfg, std::size_t horn_j, std::size_t opposite,
                                               const std::vector<double>& theta_grid, int scan_points = 721)
{
    if (horn_j >= cfg.obstacles.size() || opposite >= cfg.obstacles.size()) {
        throw DomainError("head_on_curve: obstacle index out of range");
    }
    if (!cfg.obstacles[horn_j].is_horn()) {
        throw DomainError("head_on_curve: obstacle " + std::to_string(horn_j) + " is not a horn");
    }
    if (horn_j == opposite) {
        throw DomainError("head_on_curve: opposite obstacle must differ from the horn");
    }
    HeadOnCurve curve;
    for (double theta : theta_grid) {
        std::vector<double> phis(static_cast<std::size_t>(scan_points));
        std::vector<detail::HeadOnProbe> vals(phis.size());
        for (int i = 0; i < scan_points; ++i) {
            phis[i] = -horn::half_pi + std::numbers::pi * (i + 0.5) / scan_points;
            vals[i] = detail::head_on_residual(cfg, horn_j, opposite, theta, phis[i]);
        }
        std::optional<HeadOnPoint> best;
        double best_len = std::numeric_limits<double>::infinity();
        for (int i = 0; i + 1 < scan_points; ++i) {
            const auto& a = vals[i];
            const auto& b = vals[i + 1];
            if (!a.valid || !b.valid || !(a.first == b.first) || !(a.second == b.second)) {
                continue;
            }
            if ((a.value > 0.0) == (b.value > 0.0) && a.value != 0.0) {
                continue;
            }
            double lo = phis[i];
            double hi = phis[i + 1];
            const bool lo_pos = a.value > 0.0;
            detail::HeadOnProbe mid = a;
            double root = lo;
            if (a.value != 0.0) {
                for (int it = 0; it < 200; ++it) {
                    root = 0.5 * (lo + hi);
                    if (root == lo || root == hi) {
                        break;
                    }
                    mid = detail::head_on_residual(cfg, horn_j, opposite, theta, root);
                    if (!mid.valid) {
                        break;
                    }
                    if (mid.value == 0.0) {
                        break;
                    }
                    ((mid.value > 0.0) == lo_pos ? lo : hi) = root;
                }
            }
            if (!mid.valid) {
                continue;
            }
            const double len = mid.length;
            if (len < best_len - 1e-12 || (std::abs(len - best_len) <= 1e-12 && best && std::abs(root) < std::abs(best->phi))) {
                best_len = len;
                best = HeadOnPoint{theta, root, std::abs(mid.value)};
            }
        }
        if (best) {
            curve.points.push_back(*best);
        } else {
            curve.gaps.push_back(theta);
        }
    }
    return curve;
}

} // namespace hornbill::tangent
