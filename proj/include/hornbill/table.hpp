#pragma once

#include <hornbill/errors.hpp>
#include <hornbill/horn.hpp>
#include <hornbill/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace hornbill::table {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Maps an angle to [0, 2*pi).
[[nodiscard]] inline double wrap_angle(double theta)
{
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) {
        r += two_pi;
    }
    return r >= two_pi ? 0.0 : r;
}

/// Difference a - b mapped to [-pi, pi).
[[nodiscard]] inline double angle_diff(double a, double b)
{
    return wrap_angle(a - b + std::numbers::pi) - std::numbers::pi;
}

enum class DomainKind { torus, rectangle };

struct Domain {
    DomainKind kind = DomainKind::torus;
    double width = 1.0;
    double height = 1.0;
};

struct HardScatterer {};

struct TorricelliHorn {
    double beta = 1.0;
};

using ObstacleKind = std::variant<HardScatterer, TorricelliHorn>;

struct Obstacle {
    Vec2 center;
    double radius = 1.0;
    ObstacleKind kind = HardScatterer{};

    [[nodiscard]] bool is_horn() const { return std::holds_alternative<TorricelliHorn>(kind); }

    [[nodiscard]] horn::HornProfile profile() const
    {
        if (!is_horn()) {
            throw DomainError("obstacle is a hard scatterer, not a horn");
        }
        return horn::HornProfile::torricelli(std::get<TorricelliHorn>(kind).beta, radius);
    }
};

struct TableConfig {
    Domain domain;
    std::vector<Obstacle> obstacles;
    /// Maximum flight length; 0 selects 100 x the longer domain side.
    double length_cap = 0.0;

    [[nodiscard]] double cap() const
    {
        return length_cap > 0.0 ? length_cap : 100.0 * std::max(domain.width, domain.height);
    }

    [[nodiscard]] double total_radius() const
    {
        double s = 0.0;
        for (const auto& o : obstacles) {
            s += o.radius;
        }
        return s;
    }
};

enum class Side { incoming, outgoing };

/// Phase point on an obstacle boundary.
struct CollisionCoord {
    std::size_t obstacle = 0;
    double theta = 0.0;
    double phi = 0.0;
    Side side = Side::outgoing;
};

/// Lattice translation (torus) or reflection cell (rectangle) of the obstacle image that was hit.
struct ImageIndex {
    long long a = 0;
    long long b = 0;

    friend bool operator==(ImageIndex, ImageIndex) = default;
};

struct FlightResult {
    CollisionCoord hit;
    double tau = 0.0;
    int wall_bounces = 0;
    ImageIndex image;
};

/// Outward normal at boundary angle theta.
inline Vec2 normal_at(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Unit velocity leaving the boundary at (theta, phi).
inline Vec2 outgoing_velocity(double theta, double phi) { return normal_at(theta + phi); }

/// Reverses the velocity of an incoming point, giving the outgoing point that retraces the flight.
[[nodiscard]] inline CollisionCoord reversed(const CollisionCoord& inc)
{
    return {inc.obstacle, inc.theta, inc.phi, inc.side == Side::incoming ? Side::outgoing : Side::incoming};
}

namespace detail {

struct Candidate {
    double t = std::numeric_limits<double>::infinity();
    std::size_t obstacle = 0;
    Vec2 center;
    ImageIndex image;
    long long cell_a = 0;
    long long cell_b = 0;
};

// Entry parameter of the ray p + t d (|d| = 1) into the circle (c, r); infinity on a miss.
inline double ray_circle(Vec2 p, Vec2 d, Vec2 c, double r)
{
    const Vec2 w = p - c;
    const double b = dot(d, w);
    const double cc = dot(w, w) - r * r;
    if (b >= 0.0 && cc >= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double disc = b * b - cc;
    if (disc < 1e-14 * r * r) {
        return std::numeric_limits<double>::infinity();
    }
    const double t = cc / (-b + std::sqrt(disc));
    return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

inline bool is_odd(long long n) { return (n % 2) != 0; }

// Torus images of obstacle k that intersect the fundamental cell [0,W]x[0,H].
inline std::vector<ImageIndex> torus_offsets(const Obstacle& o, const Domain& d)
{
    std::vector<ImageIndex> out;
    for (int ox = -1; ox <= 1; ++ox) {
        for (int oy = -1; oy <= 1; ++oy) {
            const double cx = o.center.x + ox * d.width;
            const double cy = o.center.y + oy * d.height;
            const double nx = std::clamp(cx, 0.0, d.width);
            const double ny = std::clamp(cy, 0.0, d.height);
            if (std::hypot(cx - nx, cy - ny) < o.radius) {
                out.push_back({ox, oy});
            }
        }
    }
    return out;
}

} // namespace detail

/**
 * @brief Free flight from an outgoing point to the next obstacle boundary.
 *
 * Walks the unfolded cells crossed by the ray (lattice translates on the
 * torus, mirror images in the rectangle) and returns the first entry point.
 */
[[nodiscard]] inline FlightResult flight(const TableConfig& cfg, const CollisionCoord& out)
{
    if (out.side != Side::outgoing) {
        throw DomainError("flight: start point must be outgoing");
    }
    if (out.obstacle >= cfg.obstacles.size()) {
        throw DomainError("flight: obstacle index out of range");
    }
    const auto& dom = cfg.domain;
    const double W = dom.width;
    const double H = dom.height;
    const bool torus = dom.kind == DomainKind::torus;
    const Obstacle& src = cfg.obstacles[out.obstacle];
    const Vec2 p = src.center + src.radius * normal_at(out.theta);
    const Vec2 d = outgoing_velocity(out.theta, out.phi);
    const double cap = cfg.cap();

    std::vector<std::vector<ImageIndex>> offsets;
    if (torus) {
        offsets.reserve(cfg.obstacles.size());
        for (const auto& o : cfg.obstacles) {
            offsets.push_back(detail::torus_offsets(o, dom));
        }
    }

    long long a = static_cast<long long>(std::floor(p.x / W));
    long long b = static_cast<long long>(std::floor(p.y / H));
    const long long sa = d.x > 0.0 ? 1 : -1;
    const long long sb = d.y > 0.0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    double tx = d.x != 0.0 ? ((static_cast<double>(a) + (d.x > 0.0 ? 1.0 : 0.0)) * W - p.x) / d.x : inf;
    double ty = d.y != 0.0 ? ((static_cast<double>(b) + (d.y > 0.0 ? 1.0 : 0.0)) * H - p.y) / d.y : inf;
    const double dtx = d.x != 0.0 ? W / std::abs(d.x) : inf;
    const double dty = d.y != 0.0 ? H / std::abs(d.y) : inf;

    detail::Candidate best;
    double t_enter = 0.0;
    while (t_enter <= cap) {
        for (std::size_t k = 0; k < cfg.obstacles.size(); ++k) {
            const Obstacle& o = cfg.obstacles[k];
            auto consider = [&](Vec2 c, ImageIndex img) {
                if (k == out.obstacle && img == ImageIndex{}) {
                    return;
                }
                const double t = detail::ray_circle(p, d, c, o.radius);
                if (t < best.t) {
                    best = {t, k, c, img, a, b};
                }
            };
            if (torus) {
                for (const auto& off : offsets[k]) {
                    const ImageIndex img{a + off.a, b + off.b};
                    consider({o.center.x + static_cast<double>(img.a) * W, o.center.y + static_cast<double>(img.b) * H},
                             img);
                }
            } else {
                const double cx = detail::is_odd(a) ? W - o.center.x : o.center.x;
                const double cy = detail::is_odd(b) ? H - o.center.y : o.center.y;
                consider({static_cast<double>(a) * W + cx, static_cast<double>(b) * H + cy}, {a, b});
            }
        }
        const double t_exit = std::min(tx, ty);
        if (best.t <= t_exit) {
            break;
        }
        t_enter = t_exit;
        if (tx < ty) {
            a += sa;
            tx += dtx;
        } else {
            b += sb;
            ty += dty;
        }
    }
    if (!(best.t <= cap)) {
        throw HorizonError("flight: no obstacle within length cap " + std::to_string(cap));
    }

    const Obstacle& dst = cfg.obstacles[best.obstacle];
    Vec2 q = p + best.t * d;
    Vec2 v = d;
    Vec2 c = best.center;
    int bounces = 0;
    if (!torus) {
        const long long ca = best.image.a;
        const long long cb = best.image.b;
        auto fold = [](double x, long long cell, double side) {
            const double local = x - static_cast<double>(cell) * side;
            return detail::is_odd(cell) ? side - local : local;
        };
        q = {fold(q.x, ca, W), fold(q.y, cb, H)};
        v = {detail::is_odd(ca) ? -d.x : d.x, detail::is_odd(cb) ? -d.y : d.y};
        c = dst.center;
        bounces = static_cast<int>(std::llabs(ca) + std::llabs(cb));
    }
    const Vec2 rel = q - c;
    const double theta = std::atan2(rel.y, rel.x);
    const Vec2 n = normal_at(theta);
    const Vec2 tg{-n.y, n.x};
    const double phi = std::atan2(-dot(v, tg), -dot(v, n));

    FlightResult res;
    res.hit = {best.obstacle, wrap_angle(theta), phi, Side::incoming};
    res.tau = best.t;
    res.wall_bounces = bounces;
    res.image = best.image;
    return res;
}

/// Reflection law: specular at scatterers, rotated by delta_theta at horns.
[[nodiscard]] inline CollisionCoord reflect(const Obstacle& obs, const CollisionCoord& inc, const QuadratureSettings& q = {})
{
    if (inc.side != Side::incoming) {
        throw DomainError("reflect: point must be incoming");
    }
    CollisionCoord out{inc.obstacle, inc.theta, -inc.phi, Side::outgoing};
    if (obs.is_horn()) {
        if (std::abs(inc.phi) < horn::head_on_tolerance) {
            throw TrappedError("reflect: head-on entry into horn never returns");
        }
        out.theta = wrap_angle(inc.theta + horn::delta_theta(obs.profile(), out.phi, q));
    }
    return out;
}

struct MapStep {
    CollisionCoord next;
    double tau = 0.0;
    double sojourn = 0.0;
    FlightResult flight;
};

/// One iterate of T = R o F with its flight time and horn sojourn.
[[nodiscard]] inline MapStep billiard_map(const TableConfig& cfg, const CollisionCoord& x, const QuadratureSettings& q = {})
{
    MapStep step;
    step.flight = flight(cfg, x);
    step.tau = step.flight.tau;
    const auto& inc = step.flight.hit;
    const Obstacle& obs = cfg.obstacles[inc.obstacle];
    if (!obs.is_horn()) {
        step.next = {inc.obstacle, inc.theta, -inc.phi, Side::outgoing};
        return step;
    }
    if (std::abs(inc.phi) < horn::head_on_tolerance) {
        throw TrappedError("billiard_map: head-on entry into horn never returns");
    }
    const auto ex = horn::excursion(obs.profile(), -inc.phi, q);
    step.next = {inc.obstacle, wrap_angle(inc.theta + ex.dtheta), -inc.phi, Side::outgoing};
    step.sojourn = 2.0 * ex.tmax;
    return step;
}

struct ValidationReport {
    bool finite_horizon_suspect = false;
    double tau_min = 0.0;
    double tau_max = 0.0;
    std::size_t samples = 0;
    std::size_t horizon_failures = 0;
    std::vector<std::string> warnings;
};

struct ValidationGrid {
    int theta_points = 128;
    /// Odd so that phi = 0 is on the grid.
    int phi_points = 65;
};

/// Structural checks only (radii, fit, pairwise disjointness); throws on failure.
inline void check_geometry(const TableConfig& cfg)
{
    const auto& d = cfg.domain;
    if (!(d.width > 0.0) || !(d.height > 0.0) || !std::isfinite(d.width) || !std::isfinite(d.height)) {
        throw ConfigError("domain width and height must be positive");
    }
    if (cfg.obstacles.empty()) {
        throw ConfigError("table needs at least one obstacle");
    }
    const double side = std::min(d.width, d.height);
    for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        const auto& o = cfg.obstacles[i];
        const std::string name = "obstacle " + std::to_string(i);
        if (!(o.radius > 0.0) || !std::isfinite(o.radius)) {
            throw ConfigError(name + ": radius must be positive");
        }
        if (o.is_horn() && !(std::get<TorricelliHorn>(o.kind).beta > 0.0)) {
            throw ConfigError(name + ": horn beta must be positive");
        }
        if (d.kind == DomainKind::torus) {
            if (!(2.0 * o.radius < side)) {
                throw OverlapError(name + " overlaps its own periodic image");
            }
        } else if (!(o.center.x - o.radius > 0.0 && o.center.x + o.radius < d.width && o.center.y - o.radius > 0.0 &&
                     o.center.y + o.radius < d.height)) {
            throw OverlapError(name + " touches or crosses a rectangle wall");
        }
    }
    for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.obstacles.size(); ++j) {
            const auto& a = cfg.obstacles[i];
            const auto& b = cfg.obstacles[j];
            Vec2 delta = a.center - b.center;
            if (d.kind == DomainKind::torus) {
                delta.x -= d.width * std::round(delta.x / d.width);
                delta.y -= d.height * std::round(delta.y / d.height);
            }
            if (!(norm(delta) > a.radius + b.radius)) {
                throw OverlapError("obstacles " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
            }
        }
    }
}

/**
 * @brief Geometry checks plus sampled estimates of tau_min and tau_max.
 *
 * Ray-casts every outgoing point of a theta x phi grid on each obstacle.
 * Sampling cannot prove a finite horizon; escapes are reported as warnings.
 */
[[nodiscard]] inline ValidationReport validate_table(const TableConfig& cfg, const ValidationGrid& grid = {})
{
    check_geometry(cfg);
    ValidationReport rep;
    rep.tau_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        for (int a = 0; a < grid.theta_points; ++a) {
            const double theta = two_pi * a / grid.theta_points;
            for (int b = 0; b < grid.phi_points; ++b) {
                const double phi = -horn::half_pi + std::numbers::pi * (b + 0.5) / grid.phi_points;
                ++rep.samples;
                try {
                    const auto f = flight(cfg, {i, theta, phi, Side::outgoing});
                    rep.tau_min = std::min(rep.tau_min, f.tau);
                    rep.tau_max = std::max(rep.tau_max, f.tau);
                } catch (const HorizonError&) {
                    ++rep.horizon_failures;
                }
            }
        }
    }
    if (rep.horizon_failures > 0) {
        rep.finite_horizon_suspect = true;
        rep.warnings.push_back(std::to_string(rep.horizon_failures) +
                               " sampled flights exceeded the length cap; horizon may be infinite");
    }
    return rep;
}

} // namespace hornbill::table
