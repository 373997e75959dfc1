#pragma once

#include <hornbill/errors.hpp>
#include <hornbill/quadrature.hpp>

#include <boost/math/tools/roots.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hornbill::horn {

inline constexpr double half_pi = std::numbers::pi / 2.0;
/// Entry angles below this are treated as head-on.
inline constexpr double head_on_tolerance = 1e-12;

/// Torricelli trumpet r(z) = z^-beta attached along the circle z = z0 of radius r0.
struct HornProfile {
    double beta = 1.0;
    double r0 = 1.0;
    double z0 = 1.0;

    [[nodiscard]] static HornProfile torricelli(double beta, double r0)
    {
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw DomainError("horn beta must be positive and finite, got " + std::to_string(beta));
        }
        if (!(r0 > 0.0) || !std::isfinite(r0)) {
            throw DomainError("horn radius must be positive and finite, got " + std::to_string(r0));
        }
        return {beta, r0, std::pow(r0, -1.0 / beta)};
    }

    /// Exponent b = (1+beta)/beta of the rotation function near head-on.
    [[nodiscard]] double rotation_exponent() const { return (1.0 + beta) / beta; }
};

struct ProfilePoint {
    double r;
    double r_prime;
    double r_second;
    double gauss_curvature;
};

[[nodiscard]] inline ProfilePoint profile_eval(const HornProfile& p, double z)
{
    if (!(z >= p.z0)) {
        throw DomainError("profile_eval: z = " + std::to_string(z) + " below z0 = " + std::to_string(p.z0));
    }
    const double r = std::pow(z, -p.beta);
    const double r1 = -p.beta * r / z;
    const double r2 = p.beta * (1.0 + p.beta) * r / (z * z);
    const double g = 1.0 + r1 * r1;
    return {r, r1, r2, -r2 / (r * g * g)};
}

/// Integral that may diverge; @c value holds the partial integral when it does.
struct MetricValue {
    double value = 0.0;
    bool infinite = false;
};

struct HornMetrics {
    MetricValue area;
    MetricValue volume;
};

namespace detail {

// Integrates f over [z0, z0*10^decades] decade by decade. The last increment
// ratio is the tail's geometric rate; a rate near 1 means divergence.
template <class F>
MetricValue power_tail_integral(F&& f, double z0, const QuadratureSettings& q, int decades = 12)
{
    double total = 0.0;
    double prev = 0.0;
    double last = 0.0;
    double lo = z0;
    for (int k = 0; k < decades; ++k) {
        const double hi = lo * 10.0;
        prev = last;
        last = integrate(f, lo, hi, q).value;
        total += last;
        lo = hi;
    }
    const double rate = last / prev;
    if (!(rate < 1.0 - 1e-6)) {
        return {total, true};
    }
    return {total + last * rate / (1.0 - rate), false};
}

} // namespace detail

/// Surface area 2*pi*int r sqrt(1+r'^2) dz and volume pi*int r^2 dz over [z0, inf).
[[nodiscard]] inline HornMetrics horn_metrics(const HornProfile& p, const QuadratureSettings& q = {})
{
    q.validate();
    const double b = p.beta;
    auto area = [b](double z) {
        const double r = std::pow(z, -b);
        const double r1 = b * r / z;
        return 2.0 * std::numbers::pi * r * std::sqrt(1.0 + r1 * r1);
    };
    auto volume = [b](double z) {
        const double r = std::pow(z, -b);
        return std::numbers::pi * r * r;
    };
    return {detail::power_tail_integral(area, p.z0, q), detail::power_tail_integral(volume, p.z0, q)};
}

/// Output of one horn excursion entered at angle phi0.
struct ExcursionSolution {
    double tmax = 0.0;
    double dtheta = 0.0;
    std::optional<double> kappa;
    double phi0 = 0.0;
};

namespace detail {

// Substitution u = sin(alpha) with u = r0*s/r; the apex sits at alpha0 = |phi0|.
struct Excursion {
    double beta;
    double p;
    double c;
    double rs;
    double alpha0;
    std::vector<double> breaks;

    Excursion(const HornProfile& prof, double phi0)
        : beta(prof.beta),
          p(prof.rotation_exponent()),
          c(0.0),
          rs(prof.r0 * std::sin(std::abs(phi0))),
          alpha0(std::abs(phi0)),
          breaks(dyadic_breakpoints(alpha0, 0.5))
    {
        c = beta * std::pow(rs, p);
    }

    [[nodiscard]] double hyp(double u) const { return std::hypot(std::pow(u, p), c); }
};

inline void check_angle(double phi0, const char* what)
{
    if (!std::isfinite(phi0) || std::abs(phi0) > half_pi) {
        throw DomainError(std::string(what) + ": phi0 = " + std::to_string(phi0) + " outside [-pi/2, pi/2]");
    }
    if (std::abs(phi0) < head_on_tolerance) {
        throw TrappedError(std::string(what) + ": head-on entry (phi0 = 0) never returns");
    }
}

inline double tmax_integral(const Excursion& e, const QuadratureSettings& q)
{
    auto f = [&e](double a) {
        const double u = std::sin(a);
        return e.hyp(u) / (u * u);
    };
    return integrate(f, e.alpha0, half_pi, q, e.breaks).value;
}

inline double dtheta_integral(const Excursion& e, const QuadratureSettings& q)
{
    auto f = [&e](double a) { return e.hyp(std::sin(a)); };
    return integrate(f, e.alpha0, half_pi, q, e.breaks).value;
}

inline double kappa_integral(const Excursion& e, const QuadratureSettings& q)
{
    auto f = [&e](double a) {
        const double up = std::pow(std::sin(a), e.p);
        return up * up / std::hypot(up, e.c);
    };
    return integrate(f, e.alpha0, half_pi, q, e.breaks).value;
}

} // namespace detail

/// Time from entry to apex.
[[nodiscard]] inline double tmax(const HornProfile& prof, double phi0, const QuadratureSettings& q = {})
{
    q.validate();
    detail::check_angle(phi0, "tmax");
    if (std::abs(phi0) == half_pi) {
        return 0.0;
    }
    const detail::Excursion e(prof, phi0);
    return std::pow(e.rs, -1.0 / e.beta) / e.beta * detail::tmax_integral(e, q);
}

/// Signed winding angle between entry and exit.
[[nodiscard]] inline double delta_theta(const HornProfile& prof, double phi0, const QuadratureSettings& q = {})
{
    q.validate();
    detail::check_angle(phi0, "delta_theta");
    if (std::abs(phi0) == half_pi) {
        return 0.0;
    }
    const detail::Excursion e(prof, phi0);
    const double mag = 2.0 / e.beta * std::pow(e.rs, -e.p) * detail::dtheta_integral(e, q);
    return phi0 > 0.0 ? mag : -mag;
}

/// d(delta_theta)/d(phi0); even in phi0 and always below -2.
[[nodiscard]] inline double kappa(const HornProfile& prof, double phi0, const QuadratureSettings& q = {})
{
    q.validate();
    if (std::abs(phi0) < head_on_tolerance) {
        throw DomainError("kappa: diverges to -infinity at phi0 = 0");
    }
    if (!std::isfinite(phi0) || std::abs(phi0) >= half_pi) {
        throw DomainError("kappa: phi0 = " + std::to_string(phi0) + " outside (-pi/2, pi/2)");
    }
    const detail::Excursion e(prof, phi0);
    const double grazing = -2.0 * std::sqrt(1.0 + std::pow(prof.r0, -2.0 * e.p) / (prof.beta * prof.beta));
    const double cot = 1.0 / std::tan(e.alpha0);
    const double scale = 2.0 * (1.0 + e.beta) / (e.beta * e.beta) * cot * std::pow(e.rs, -e.p);
    return grazing - scale * detail::kappa_integral(e, q);
}

/// T_max and delta_theta together, plus kappa when requested.
[[nodiscard]] inline ExcursionSolution excursion(const HornProfile& prof, double phi0, const QuadratureSettings& q = {},
                                                 bool with_kappa = false)
{
    ExcursionSolution out;
    out.phi0 = phi0;
    out.tmax = tmax(prof, phi0, q);
    out.dtheta = delta_theta(prof, phi0, q);
    if (with_kappa) {
        out.kappa = kappa(prof, phi0, q);
    }
    return out;
}

struct AsymptoticConstants {
    double i0;
    double j0;
    double kappa_grazing;
    double rotation_exponent;
};

/// int_0^{pi/2} sin(a)^x da for x > -1.
[[nodiscard]] inline double sine_power_integral(double x)
{
    if (!(x > -1.0)) {
        throw DomainError("sine_power_integral: exponent must exceed -1");
    }
    return 0.5 * std::sqrt(std::numbers::pi) * std::exp(std::lgamma(0.5 * (x + 1.0)) - std::lgamma(0.5 * x + 1.0));
}

[[nodiscard]] inline AsymptoticConstants asymptotic_constants(const HornProfile& prof)
{
    const double b = prof.beta;
    const double p = prof.rotation_exponent();
    AsymptoticConstants c{};
    c.i0 = std::pow(prof.r0, -1.0 / b) / b * sine_power_integral((1.0 - b) / b);
    c.j0 = std::pow(prof.r0, -p) / b * sine_power_integral(p);
    c.kappa_grazing = -2.0 * std::sqrt(1.0 + std::pow(prof.r0, -2.0 * p) / (b * b));
    c.rotation_exponent = p;
    return c;
}

namespace detail {

// Solves f(phi) = target on (0, pi/2) for f positive and decreasing, by bisection in log(phi).
template <class F>
double solve_decreasing(F&& f, double target, double guess, const char* what)
{
    if (!(target > 0.0) || !std::isfinite(target)) {
        throw RangeError(std::string(what) + ": target out of range");
    }
    if (!(guess > 1e-280)) {
        throw RangeError(std::string(what) + ": root underflows");
    }
    double lo = std::min(guess, half_pi) * 0.5;
    double hi = std::min(2.0 * guess, half_pi);
    while (!(f(lo) > target)) {
        lo *= 0.5;
        if (!(lo > 1e-290)) {
            throw RangeError(std::string(what) + ": root underflows");
        }
    }
    while (hi < half_pi && f(hi) > target) {
        hi = std::min(2.0 * hi, half_pi);
    }
    auto g = [&](double logphi) { return f(std::exp(logphi)) - target; };
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto [a, b] = boost::math::tools::bisect(g, std::log(lo), std::log(hi), tol);
    const double phi = std::exp(0.5 * (a + b));
    const double check = f(phi);
    if (!std::isfinite(check)) {
        throw RangeError(std::string(what) + ": root not representable");
    }
    return phi;
}

} // namespace detail

/// Positive-side angle interval on which |delta_theta| lies in (2*pi*k, 2*pi*(k+1)).
[[nodiscard]] inline std::pair<double, double> strip_boundaries(const HornProfile& prof, long long k,
                                                                const QuadratureSettings& q = {})
{
    if (k < 1) {
        throw DomainError("strip_boundaries: k must be >= 1");
    }
    const auto c = asymptotic_constants(prof);
    auto f = [&](double phi) { return delta_theta(prof, phi, q); };
    auto locate = [&](double target) {
        const double s = std::pow(2.0 * c.j0 / target, 1.0 / c.rotation_exponent);
        const double guess = s < 1.0 ? std::asin(s) : half_pi;
        return detail::solve_decreasing(f, target, guess, "strip_boundaries");
    };
    const double two_pi = 2.0 * std::numbers::pi;
    const double hi = locate(two_pi * static_cast<double>(k));
    const double lo = locate(two_pi * (static_cast<double>(k) + 1.0));
    return {lo, hi};
}

/// Integrated geodesic together with its conservation diagnostics.
struct OracleResult {
    ExcursionSolution solution;
    double clairaut_residual = 0.0;
    double speed_residual = 0.0;
    double exit_angle = 0.0;
    double elapsed = 0.0;
    std::size_t steps = 0;
};

/**
 * @brief Integrates the geodesic entering the horn at angle @p phi0 with
 * classical RK4 in arc length until it returns to z0.
 *
 * Independent of the quadrature path. @p time_cap defaults to ten times a
 * closed-form upper bound on T_max.
 */
[[nodiscard]] inline OracleResult geodesic_oracle(const HornProfile& prof, double phi0, double step,
                                                  std::optional<double> time_cap = std::nullopt)
{
    if (phi0 == 0.0) {
        throw TrappedError("geodesic_oracle: head-on entry never returns");
    }
    if (!std::isfinite(phi0) || std::abs(phi0) >= half_pi) {
        throw DomainError("geodesic_oracle: phi0 must lie in (-pi/2, pi/2)");
    }
    if (!(step > 0.0)) {
        throw DomainError("geodesic_oracle: step must be positive");
    }
    const double beta = prof.beta;
    const double s = std::abs(std::sin(phi0));
    const double cap = time_cap.value_or(10.0 * (asymptotic_constants(prof).i0 * std::pow(s, -1.0 / beta) + prof.r0));

    using State = std::array<double, 4>; // z, theta, zdot, thetadot
    auto rhs = [beta](const State& y) {
        const double z = y[0];
        const double r = std::pow(z, -beta);
        const double r1 = -beta * r / z;
        const double r2 = beta * (1.0 + beta) * r / (z * z);
        const double zd = y[2];
        const double td = y[3];
        return State{zd, td, (r * r1 * td * td - r1 * r2 * zd * zd) / (1.0 + r1 * r1), -2.0 * r1 * zd * td / r};
    };
    auto rk4 = [&rhs](const State& y, double h) {
        auto axpy = [](const State& a, double t, const State& b) {
            return State{a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2], a[3] + t * b[3]};
        };
        const State k1 = rhs(y);
        const State k2 = rhs(axpy(y, 0.5 * h, k1));
        const State k3 = rhs(axpy(y, 0.5 * h, k2));
        const State k4 = rhs(axpy(y, h, k3));
        State out;
        for (int i = 0; i < 4; ++i) {
            out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        return out;
    };

    const double r0 = prof.r0;
    const double z0 = prof.z0;
    const double r1_0 = -beta * r0 / z0;
    const double l0 = r0 * std::sin(phi0);
    State y{z0, 0.0, std::cos(phi0) / std::sqrt(1.0 + r1_0 * r1_0), std::sin(phi0) / r0};

    OracleResult out;
    auto diagnose = [&](const State& st) {
        const double r = std::pow(st[0], -beta);
        const double r1 = -beta * r / st[0];
        const double v = std::sqrt((1.0 + r1 * r1) * st[2] * st[2] + r * r * st[3] * st[3]);
        out.clairaut_residual = std::max(out.clairaut_residual, std::abs(r * r * st[3] / v - l0));
        out.speed_residual = std::max(out.speed_residual, std::abs(v - 1.0));
    };

    double t = 0.0;
    while (true) {
        if (t > cap) {
            throw TrappedError("geodesic_oracle: no return within time cap " + std::to_string(cap));
        }
        const State next = rk4(y, step);
        ++out.steps;
        if (next[0] < z0 && next[2] < 0.0) {
            double a = 0.0;
            double b = step;
            for (int it = 0; it < 200 && b - a > 0.0; ++it) {
                const double m = 0.5 * (a + b);
                if (m == a || m == b) {
                    break;
                }
                (rk4(y, m)[0] < z0 ? b : a) = m;
            }
            y = rk4(y, b);
            t += b;
            break;
        }
        y = next;
        t += step;
        diagnose(y);
    }
    diagnose(y);

    const double r = std::pow(y[0], -beta);
    const double r1 = -beta * r / y[0];
    out.elapsed = t;
    out.exit_angle = std::atan2(-r * y[3], -std::sqrt(1.0 + r1 * r1) * y[2]);
    out.solution.phi0 = phi0;
    out.solution.tmax = 0.5 * t;
    out.solution.dtheta = y[1];
    return out;
}

} // namespace hornbill::horn
