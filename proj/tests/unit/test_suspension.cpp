#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace hornbill;
using table::CollisionCoord;
using table::Side;

namespace {

constexpr double pi = std::numbers::pi;

struct Moments {
    double mean = 0.0;
    double se = 0.0;
};

Moments moments(const std::vector<double>& v)
{
    Moments m;
    for (double x : v) {
        m.mean += x;
    }
    m.mean /= double(v.size());
    double var = 0.0;
    for (double x : v) {
        var += (x - m.mean) * (x - m.mean);
    }
    m.se = std::sqrt(var / double(v.size() - 1) / double(v.size()));
    return m;
}

// Collinear pair where obstacle 1 is a horn.
table::TableConfig scatterer_and_horn(double beta)
{
    auto cfg = fixtures::collinear_scatterers();
    cfg.obstacles[1].kind = table::TorricelliHorn{beta};
    return cfg;
}

} // namespace

TEST(SampleMu, AngleMoments)
{
    const auto cfg = fixtures::reference(1.5);
    Rng rng(1);
    const int n = 200000;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = std::sin(suspension::sample_mu(cfg, rng).phi);
        s1 += s;
        s2 += s * s;
    }
    // Var(sin phi) = 1/3, Var(sin^2 phi) = 1/5 - 1/9.
    EXPECT_NEAR(s1 / n, 0.0, 4 * std::sqrt(1.0 / 3 / n));
    EXPECT_NEAR(s2 / n, 1.0 / 3, 4 * std::sqrt((0.2 - 1.0 / 9) / n));
}

TEST(SampleMu, AngleDistributionMatchesExactCdf)
{
    const auto cfg = fixtures::reference(1.5);
    Rng rng(2);
    const std::size_t n = 1000000;
    std::vector<double> phi(n);
    for (auto& p : phi) {
        p = suspension::sample_mu(cfg, rng).phi;
    }
    const double d = stats::ks_one_sample(phi, [](double x) { return 0.5 * (1 + std::sin(x)); });
    EXPECT_LT(d, 0.002);
}

TEST(SampleMu, ObstacleWeightsFollowRadii)
{
    const auto cfg = fixtures::facing_horns(1.5);
    Rng rng(3);
    const int n = 100000;
    int first = 0;
    for (int i = 0; i < n; ++i) {
        const auto x = suspension::sample_mu(cfg, rng);
        first += x.obstacle == 0;
        ASSERT_GE(x.theta, 0.0);
        ASSERT_LT(x.theta, 2 * pi);
    }
    const double p = 1.0 / 1.8;
    EXPECT_NEAR(double(first) / n, p, 4 * std::sqrt(p * (1 - p) / n));
}

TEST(Height, ScattererTargetHasNoSojourn)
{
    const auto cfg = fixtures::collinear_scatterers();
    const auto h = suspension::height(cfg, {0, 0.0, 0.1, Side::outgoing});
    EXPECT_EQ(h.sojourn, 0.0);
    EXPECT_EQ(h.h, h.tau);
}

TEST(Height, HornSojournMatchesOracle)
{
    const auto cfg = scatterer_and_horn(1.0);
    // Leave the horn at phi = pi/4, reverse at the landing point: the reversed flight arrives with phi = pi/4.
    const auto f = table::flight(cfg, {1, pi, pi / 4, Side::outgoing});
    const auto h = suspension::height(cfg, table::reversed(f.hit));
    const auto o = horn::geodesic_oracle(cfg.obstacles[1].profile(), pi / 4, 1e-3);
    EXPECT_NEAR(h.sojourn / (2 * o.solution.tmax), 1.0, 1e-6);
    EXPECT_NEAR(h.tau, f.tau, 1e-10);
}

TEST(Height, HeadOnIsTrapped)
{
    EXPECT_THROW((void)suspension::height(scatterer_and_horn(1.5), {0, 0.0, 0.0, Side::outgoing}), TrappedError);
}

TEST(Height, BoundedBelowByMinimalFlight)
{
    const auto cfg = fixtures::reference(1.5);
    Rng rng(4);
    for (int i = 0; i < 5000; ++i) {
        const auto x = suspension::sample_mu(cfg, rng);
        const auto h = suspension::height(cfg, x);
        const auto f = table::flight(cfg, x);
        EXPECT_GE(h.h, 0.2 - 1e-12);
        const bool horn = cfg.obstacles[f.hit.obstacle].is_horn() && std::abs(f.hit.phi) < pi / 2;
        EXPECT_EQ(h.sojourn > 0.0, horn);
    }
}

TEST(Tails, NormalizedTailLaw)
{
    for (double beta : {1.0, 1.5, 2.0}) {
        const auto rows = suspension::tail_profile(horn::HornProfile::torricelli(beta, 1.0), {1e3, 1e4, 1e5, 1e6});
        ASSERT_EQ(rows.size(), 4u);
        EXPECT_GE(rows.back().asymptote_ratio, 0.95);
        EXPECT_LE(rows.back().asymptote_ratio, 1.05);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            EXPECT_LT(std::abs(rows[i].asymptote_ratio - 1), std::abs(rows[i - 1].asymptote_ratio - 1));
        }
    }
}

TEST(Tails, BetaOneAsymptoteIsPiOverT)
{
    const auto rows = suspension::tail_profile(horn::HornProfile::torricelli(1.0, 1.0), {1e3, 1e6});
    EXPECT_NEAR(rows[0].asymptote, pi / 1e3, 1e-15);
    EXPECT_NEAR(rows[1].s_star * 1e6 / pi, 1.0, 1e-4);
}

TEST(Tails, NonpositiveTimesAreOutOfRange)
{
    const auto p = horn::HornProfile::torricelli(1.0, 1.0);
    EXPECT_THROW((void)suspension::tail_profile(p, {0.0}), RangeError);
    EXPECT_THROW((void)suspension::tail_profile(p, {-1.0}), RangeError);
    EXPECT_THROW((void)suspension::tail_profile(p, {std::nan("")}), RangeError);
}

TEST(Tails, AgreesWithMonteCarloSurvival)
{
    const auto prof = horn::HornProfile::torricelli(1.0, 1.0);
    const double t = 1e3;
    const double s_star = suspension::tail_profile(prof, {t})[0].s_star;
    Rng rng(5);
    const int n = 200000;
    int survive = 0;
    for (int i = 0; i < n; ++i) {
        const double phi = std::asin(2 * rng.uniform() - 1);
        if (phi != 0.0 && 2 * horn::tmax(prof, phi) > t) {
            ++survive;
        }
    }
    const double p = double(survive) / n;
    EXPECT_NEAR(p, s_star, 3 * std::sqrt(s_star * (1 - s_star) / n));
}

TEST(Orbit, PeriodTwoAccumulatesTime)
{
    const auto rec = suspension::orbit(fixtures::collinear_scatterers(), {0, 0.0, 0.0, Side::outgoing}, {10, {}});
    ASSERT_EQ(rec.points.size(), 11u);
    for (std::size_t k = 0; k < rec.points.size(); ++k) {
        EXPECT_NEAR(rec.points[k].time, 2.0 * double(k), 1e-12);
    }
    EXPECT_EQ(rec.termination, suspension::Termination::completed);
}

TEST(Orbit, TimeIsSumOfHeights)
{
    const auto cfg = fixtures::reference(1.5);
    Rng rng(6);
    const auto x0 = suspension::sample_mu(cfg, rng);
    const auto rec = suspension::orbit(cfg, x0, {2000, {}});
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < rec.points.size(); ++k) {
        const auto h = suspension::height(cfg, rec.points[k].coord);
        sum += h.h;
        ASSERT_NEAR(rec.points[k + 1].time, sum, 1e-12 * sum);
    }
}

TEST(Orbit, FlowTimeHorizon)
{
    const auto rec = suspension::orbit(fixtures::collinear_scatterers(), {0, 0.0, 0.0, Side::outgoing}, {{}, 7.0});
    EXPECT_GE(rec.points.back().time, 7.0);
    EXPECT_LT(rec.points[rec.points.size() - 2].time, 7.0);
    EXPECT_THROW((void)suspension::orbit(fixtures::collinear_scatterers(), {}, {}), PreconditionError);
}

TEST(Orbit, HeadOnBecomesTerminationFlag)
{
    const auto rec = suspension::orbit(scatterer_and_horn(1.5), {0, 0.0, 0.0, Side::outgoing}, {10, {}});
    EXPECT_EQ(rec.termination, suspension::Termination::trapped);
    EXPECT_EQ(rec.points.size(), 1u);
}

TEST(MeanHeight, ExactMeansMatchMonteCarlo)
{
    const auto cfg = fixtures::reference(3.0);
    const auto exact = suspension::mean_height(cfg);
    const auto mc = suspension::height_monte_carlo(cfg, 400000, 7, {}, 1);
    EXPECT_NEAR(mc.tau.mean, exact.tau, 4 * mc.tau.std_err);
    EXPECT_NEAR(mc.h.mean, exact.h, 4 * mc.h.std_err);
    EXPECT_NEAR(mc.sojourn[0].mean, exact.sojourn[0], 4 * mc.sojourn[0].std_err);
    EXPECT_EQ(mc.trapped, 0u);
}

TEST(MeanHeight, SantaloFlightMean)
{
    // pi |Q| / |boundary| with |Q| = W H - 2 pi, |boundary| = 4 pi.
    const auto m = suspension::mean_height(fixtures::reference(1.5));
    EXPECT_NEAR(m.tau, (2.2 * 2.2 * std::sqrt(3.0) - 2 * pi) / 4, 1e-14);
    EXPECT_EQ(m.sojourn[1], 0.0);
    EXPECT_TRUE(std::isinf(suspension::mean_visit_sojourn(horn::HornProfile::torricelli(1.0, 1.0))));
}

TEST(MeanHeight, OrbitAverageAgreesWithInvariantMean)
{
    const auto cfg = fixtures::reference(3.0);
    const auto exact = suspension::mean_height(cfg);
    Rng rng(8);
    const auto rec = suspension::orbit(cfg, suspension::sample_mu(cfg, rng), {200000, {}});
    ASSERT_EQ(rec.termination, suspension::Termination::completed);
    // Batch means over 50 blocks.
    std::vector<double> blocks;
    const std::size_t n = rec.points.size() - 1;
    for (std::size_t b = 0; b < 50; ++b) {
        const std::size_t lo = n * b / 50;
        const std::size_t hi = n * (b + 1) / 50;
        blocks.push_back((rec.points[hi].time - rec.points[lo].time) / double(hi - lo));
    }
    const auto m = moments(blocks);
    EXPECT_NEAR(m.mean, exact.h, 3.5 * m.se);
}

TEST(Occupation, ScattererIndexGivesZero)
{
    const auto cfg = fixtures::collinear_scatterers();
    const auto r = suspension::horn_occupation(cfg, {0, 0.0, 0.2, Side::outgoing}, 100.0, 1);
    EXPECT_EQ(r.occupation, 0.0);
}

TEST(Occupation, ShortHorizonGivesZero)
{
    const auto cfg = scatterer_and_horn(1.5);
    const auto r = suspension::horn_occupation(cfg, {0, 0.0, 0.2, Side::outgoing}, 1.0, 1);
    EXPECT_EQ(r.occupation, 0.0);
}

TEST(Occupation, RejectsHeavyHorns)
{
    const auto cfg = scatterer_and_horn(1.0);
    EXPECT_THROW((void)suspension::horn_occupation(cfg, {0, 0.0, 0.2, Side::outgoing}, 10.0, 1), PreconditionError);
}

TEST(Occupation, ClipsTheLastExcursion)
{
    const auto cfg = scatterer_and_horn(1.5);
    const CollisionCoord x{0, 0.0, 0.3, Side::outgoing};
    const auto step = table::billiard_map(cfg, x);
    ASSERT_EQ(step.next.obstacle, 1u);
    const double T = step.tau + 0.5 * step.sojourn;
    const auto r = suspension::horn_occupation(cfg, x, T, 1);
    EXPECT_NEAR(r.occupation, 0.5 * step.sojourn, 1e-12);
}

TEST(Occupation, LongRunFractionMatchesInvariantRatio)
{
    const auto cfg = fixtures::reference(3.0);
    const double want = suspension::mean_height(cfg).occupation_fraction(0);
    const double T = 20000.0;
    std::vector<double> frac(24);
    parallel_for(frac.size(), 1, [&](std::size_t r) {
        Rng rng(9, 0, r);
        frac[r] = suspension::horn_occupation(cfg, suspension::sample_mu(cfg, rng), T, 0).occupation / T;
    });
    const auto m = moments(frac);
    EXPECT_NEAR(m.mean, want, 3.5 * m.se);
}
