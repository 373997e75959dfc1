#include <hornbill/horn.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace hornbill;
using horn::HornProfile;
using horn::half_pi;

namespace {

constexpr double pi = std::numbers::pi;

// Composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int n)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    }
    return s * h / 3.0;
}

const std::vector<double> betas{0.8, 1.0, 1.5, 2.0};
const std::vector<double> angles{0.05, 0.1, 0.3, pi / 4, 1.0, 1.5};

} // namespace

TEST(Profile, TorricelliInvariants)
{
    const auto p = HornProfile::torricelli(1.5, 0.7);
    EXPECT_NEAR(p.z0, std::pow(0.7, -1.0 / 1.5), 1e-15);
    EXPECT_NEAR(horn::profile_eval(p, p.z0).r, 0.7, 1e-14);
    EXPECT_THROW((void)HornProfile::torricelli(0.0, 1.0), DomainError);
    EXPECT_THROW((void)HornProfile::torricelli(1.0, -1.0), DomainError);
}

TEST(Profile, BetaOneAtUnitHeight)
{
    const auto v = horn::profile_eval(HornProfile::torricelli(1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(v.r, 1.0);
    EXPECT_DOUBLE_EQ(v.r_prime, -1.0);
    EXPECT_DOUBLE_EQ(v.r_second, 2.0);
    EXPECT_DOUBLE_EQ(v.gauss_curvature, -0.5);
}

TEST(Profile, BetaTwoAtUnitHeight)
{
    const auto v = horn::profile_eval(HornProfile::torricelli(2.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(v.r, 1.0);
    EXPECT_DOUBLE_EQ(v.r_prime, -2.0);
    EXPECT_DOUBLE_EQ(v.r_second, 6.0);
}

TEST(Profile, DerivativesMatchFiniteDifferences)
{
    const auto p = HornProfile::torricelli(1.5, 1.0);
    const double z = 2.0;
    const double h = 1e-4;
    auto r = [&](double x) { return horn::profile_eval(p, x).r; };
    const auto v = horn::profile_eval(p, z);
    const double d1 = (r(z + h) - r(z - h)) / (2 * h);
    const double d2 = (r(z + h) - 2 * r(z) + r(z - h)) / (h * h);
    EXPECT_NEAR(v.r_prime / d1, 1.0, 1e-8);
    EXPECT_NEAR(v.r_second / d2, 1.0, 1e-6);
}

TEST(Profile, BelowBoundaryThrows)
{
    EXPECT_THROW((void)horn::profile_eval(HornProfile::torricelli(1.0, 1.0), 0.99), DomainError);
}

TEST(Metrics, PaintersParadoxAtBetaOne)
{
    const auto m = horn::horn_metrics(HornProfile::torricelli(1.0, 1.0));
    EXPECT_FALSE(m.volume.infinite);
    EXPECT_NEAR(m.volume.value, pi, 1e-8);
    EXPECT_TRUE(m.area.infinite);
}

TEST(Metrics, BothInfiniteForSmallBeta)
{
    const auto m = horn::horn_metrics(HornProfile::torricelli(0.4, 1.0));
    EXPECT_TRUE(m.area.infinite);
    EXPECT_TRUE(m.volume.infinite);
}

TEST(Metrics, BetaTwoFiniteAreaAndVolume)
{
    const auto m = horn::horn_metrics(HornProfile::torricelli(2.0, 1.0));
    ASSERT_FALSE(m.volume.infinite);
    ASSERT_FALSE(m.area.infinite);
    EXPECT_NEAR(m.volume.value, pi / 3.0, 1e-8);
    // u = 1/z maps the area integral to 2 pi int_0^1 sqrt(1 + 4 u^6) du.
    const double area = 2 * pi * simpson([](double u) { return std::sqrt(1 + 4 * std::pow(u, 6)); }, 0.0, 1.0, 4000);
    EXPECT_NEAR(m.area.value / area, 1.0, 1e-8);
}

TEST(Excursion, GrazingIsInstantaneous)
{
    const auto p = HornProfile::torricelli(1.0, 1.0);
    EXPECT_EQ(horn::tmax(p, half_pi), 0.0);
    EXPECT_EQ(horn::tmax(p, -half_pi), 0.0);
    EXPECT_EQ(horn::delta_theta(p, half_pi), 0.0);
    EXPECT_EQ(horn::delta_theta(p, -half_pi), 0.0);
}

TEST(Excursion, HeadOnIsTrapped)
{
    const auto p = HornProfile::torricelli(1.0, 1.0);
    EXPECT_THROW((void)horn::tmax(p, 0.0), TrappedError);
    EXPECT_THROW((void)horn::delta_theta(p, 0.0), TrappedError);
    EXPECT_THROW((void)horn::kappa(p, 0.0), DomainError);
    EXPECT_THROW((void)horn::tmax(p, 2.0), DomainError);
}

TEST(Excursion, SmallAngleLimitApproachesI0)
{
    const auto p = HornProfile::torricelli(1.0, 1.0);
    double prev_err = 1.0;
    for (double phi : {1e-2, 1e-4, 1e-6}) {
        const double err = std::abs(horn::tmax(p, phi) * std::sin(phi) - pi / 2);
        EXPECT_LT(err, prev_err);
        prev_err = err;
    }
    EXPECT_LT(prev_err, 1e-5);
}

TEST(Excursion, ParityInAngle)
{
    for (double beta : betas) {
        const auto p = HornProfile::torricelli(beta, 1.0);
        for (double phi : angles) {
            EXPECT_EQ(horn::tmax(p, -phi), horn::tmax(p, phi));
            EXPECT_EQ(horn::delta_theta(p, -phi), -horn::delta_theta(p, phi));
            EXPECT_GT(horn::delta_theta(p, phi), 0.0);
        }
    }
}

TEST(Excursion, MatchesGeodesicOracle)
{
    for (double beta : betas) {
        const auto p = HornProfile::torricelli(beta, 1.0);
        for (double phi : angles) {
            const auto o = horn::geodesic_oracle(p, phi, 2e-3);
            SCOPED_TRACE("beta=" + std::to_string(beta) + " phi=" + std::to_string(phi));
            EXPECT_LT(std::abs(horn::tmax(p, phi) / o.solution.tmax - 1.0), 1e-6);
            EXPECT_LT(std::abs(horn::delta_theta(p, phi) / o.solution.dtheta - 1.0), 1e-6);
        }
    }
}

TEST(Excursion, MatchesOracleOnNonUnitRadius)
{
    const auto p = HornProfile::torricelli(1.5, 0.6);
    for (double phi : {-0.7, 0.2, 1.2}) {
        const auto o = horn::geodesic_oracle(p, phi, 1e-3);
        EXPECT_LT(std::abs(horn::tmax(p, phi) / o.solution.tmax - 1.0), 1e-6);
        EXPECT_LT(std::abs(horn::delta_theta(p, phi) / o.solution.dtheta - 1.0), 1e-6);
    }
}

TEST(Oracle, ConservesClairautAndSpeed)
{
    for (double beta : {1.0, 1.5}) {
        const auto o = horn::geodesic_oracle(HornProfile::torricelli(beta, 1.0), pi / 4, 1e-4);
        EXPECT_LT(o.clairaut_residual, 1e-8);
        EXPECT_LT(o.speed_residual, 1e-8);
        EXPECT_NEAR(o.exit_angle, -pi / 4, 1e-6);
    }
}

TEST(Oracle, CapTriggersTrapped)
{
    const auto p = HornProfile::torricelli(1.0, 1.0);
    EXPECT_THROW((void)horn::geodesic_oracle(p, 0.3, 1e-3, 0.5), TrappedError);
    EXPECT_THROW((void)horn::geodesic_oracle(p, 0.0, 1e-3), TrappedError);
}

TEST(Kappa, GapBelowMinusTwo)
{
    for (double beta : {0.5, 0.8, 1.0, 1.5, 2.0, 3.0}) {
        const auto p = HornProfile::torricelli(beta, 1.0);
        for (int i = 1; i < 200; ++i) {
            const double phi = half_pi * i / 200.0;
            EXPECT_LT(horn::kappa(p, phi), -2.0);
            EXPECT_LT(horn::kappa(p, -phi), -2.0);
        }
    }
}

TEST(Kappa, GrazingLimit)
{
    const auto p = HornProfile::torricelli(1.0, 1.0);
    EXPECT_NEAR(horn::kappa(p, half_pi - 1e-9), -2 * std::sqrt(2.0), 1e-7);
}

TEST(Kappa, MatchesFiniteDifferenceOfRotation)
{
    const QuadratureSettings fine{1e-13, 400};
    for (double beta : {1.0, 1.5, 2.0}) {
        const auto p = HornProfile::torricelli(beta, 1.0);
        for (double phi : {0.05, 0.3, 0.8, 1.3, -0.5}) {
            const double h = 1e-5;
            const double fd =
                (horn::delta_theta(p, phi + h, fine) - horn::delta_theta(p, phi - h, fine)) / (2 * h);
            EXPECT_NEAR(horn::kappa(p, phi, fine) / fd, 1.0, 1e-4) << "beta=" << beta << " phi=" << phi;
        }
    }
}

TEST(Excursion, MonotoneDivergenceTowardHeadOn)
{
    for (double beta : betas) {
        const auto p = HornProfile::torricelli(beta, 1.0);
        double t_prev = INFINITY;
        double d_prev = INFINITY;
        for (int i = 1; i <= 300; ++i) {
            const double phi = half_pi * i / 301.0;
            const double t = horn::tmax(p, phi);
            const double d = horn::delta_theta(p, phi);
            EXPECT_LT(t, t_prev);
            EXPECT_LT(d, d_prev);
            t_prev = t;
            d_prev = d;
        }
    }
}

TEST(Asymptotics, ClosedFormsAtBetaOne)
{
    const auto c = horn::asymptotic_constants(HornProfile::torricelli(1.0, 1.0));
    EXPECT_NEAR(c.i0, pi / 2, 1e-14);
    EXPECT_NEAR(c.j0, pi / 4, 1e-14);
    EXPECT_NEAR(c.kappa_grazing, -2 * std::sqrt(2.0), 1e-14);
    EXPECT_DOUBLE_EQ(c.rotation_exponent, 2.0);
}

TEST(Asymptotics, ConstantsAgreeWithQuadratureLimits)
{
    for (double beta : {1.5, 2.0, 3.0}) {
        const auto p = HornProfile::torricelli(beta, 1.0);
        const auto c = horn::asymptotic_constants(p);
        const double s = 1e-7;
        const double phi = std::asin(s);
        // Leading correction is relative order s^(1/beta).
        EXPECT_NEAR(horn::tmax(p, phi) * std::pow(s, 1.0 / beta) / c.i0, 1.0, 2 * std::pow(s, 1.0 / beta));
        EXPECT_NEAR(horn::delta_theta(p, phi) * std::pow(s, c.rotation_exponent) / (2 * c.j0), 1.0, 1e-3);
    }
    // I0(beta=2) = (1/2) int_0^{pi/2} sin^{-1/2} a da; a = t^2 makes the integrand smooth.
    const auto c2 = horn::asymptotic_constants(HornProfile::torricelli(2.0, 1.0));
    auto g = [](double t) { return t == 0.0 ? 2.0 : 2 * t / std::sqrt(std::sin(t * t)); };
    const double direct = 0.5 * simpson(g, 0.0, std::sqrt(pi / 2), 2000);
    EXPECT_NEAR(c2.i0 / direct, 1.0, 1e-10);
}

TEST(Strips, BoundariesHitMultiplesOfTwoPi)
{
    const auto p = HornProfile::torricelli(1.5, 1.0);
    for (long long k : {1LL, 10LL, 1000LL}) {
        const auto [lo, hi] = horn::strip_boundaries(p, k);
        EXPECT_LT(lo, hi);
        EXPECT_NEAR(horn::delta_theta(p, hi), 2 * pi * k, 1e-8 * k);
        EXPECT_NEAR(horn::delta_theta(p, lo), 2 * pi * (k + 1), 1e-8 * k);
    }
    EXPECT_THROW((void)horn::strip_boundaries(p, 0), DomainError);
}

TEST(Strips, LeadingTermAtBetaOne)
{
    // Delta theta ~ 2 J0 sin^-2 phi = (pi/2) sin^-2 phi, so sin phi_k ~ 1 / (2 sqrt k).
    const auto p = HornProfile::torricelli(1.0, 1.0);
    double prev = 1.0;
    for (long long k : {100LL, 1000LL, 10000LL}) {
        const double hi = horn::strip_boundaries(p, k).second;
        const double err = std::abs(std::sin(hi) * 2 * std::sqrt(double(k)) - 1.0);
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(Strips, RelativeWidthVanishes)
{
    const auto p = HornProfile::torricelli(1.0, 1.0);
    double prev = INFINITY;
    for (long long k : {10LL, 100LL, 1000LL, 10000LL}) {
        const auto [lo, hi] = horn::strip_boundaries(p, k);
        const double rel = (hi - lo) / lo;
        EXPECT_LT(rel, prev);
        prev = rel;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Strips, WidthScalingExponent)
{
    for (double beta : {1.0, 2.0}) {
        const auto p = HornProfile::torricelli(beta, 1.0);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (int i = 0; i <= 8; ++i) {
            const long long k = std::llround(std::pow(10.0, 2.0 + i * 0.25));
            const auto [lo, hi] = horn::strip_boundaries(p, k);
            const double x = std::log(double(k));
            const double y = std::log(hi - lo);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        EXPECT_NEAR(slope, -(1.0 + beta / (1.0 + beta)), 0.05) << "beta=" << beta;
    }
}

TEST(Strips, HugeIndexStaysRepresentable)
{
    const auto [lo, hi] = horn::strip_boundaries(HornProfile::torricelli(0.2, 1.0), 1LL << 60);
    EXPECT_GT(lo, 0.0);
    EXPECT_LE(lo, hi);
    EXPECT_LT(hi, 1e-2);
}
