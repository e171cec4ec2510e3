#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <vector>

#include "meritluck/effort.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/meritprob.hpp"

using namespace meritluck;

namespace {

WorkerPopulation make_pop(std::vector<double> efforts) {
    WorkerPopulation pop;
    pop.label = "hand";
    for (std::size_t i = 0; i < efforts.size(); ++i)
        pop.workers.push_back({"w" + std::to_string(i + 1), efforts[i]});
    return pop;
}

}  // namespace

TEST_CASE("q to pi arithmetic is exact on the grid") {
    CHECK(pi_from_q(0.46) == 0.77);
    CHECK(q_from_pi(0.77) == 0.46);
    CHECK(pi_from_q(0.0) == 1.0);
    CHECK(pi_from_q(1.0) == 0.5);
    for (int k = 0; k <= 200; ++k) {
        double q = k / 200.0;
        CHECK(q_from_pi(pi_from_q(q)) == q);
    }
    CHECK_THROWS_AS(pi_from_q(-0.1), DomainError);
    CHECK_THROWS_AS(q_from_pi(0.4), DomainError);
}

TEST_CASE("analytic merit probability oracles") {
    EffortDistribution ln = EffortDistribution::log_normal(0.0, 0.3);
    CHECK(pi_analytic(ln, 1.5) == doctest::Approx(0.6021298518291954).epsilon(1e-12));
    CHECK(pi_analytic(ln, 1.0) == 1.0);
    CHECK(pi_analytic(ln, 0.5) == 1.0);  // the advantaged side is also the worse ratio side
    CHECK_THROWS_AS(pi_analytic(ln, 0.0), DomainError);
    CHECK_THROWS_AS(pi_analytic(default_calibration(), 1.5), UnsupportedError);
}

TEST_CASE("enumeration on hand-checkable populations") {
    // {1, 2} with m = 2.5: the advantaged side wins both orderings and only
    // the high-effort one is a merit win.
    PiEstimate e = pi_empirical(make_pop({1, 2}), 2.5);
    CHECK(e.n_pairings == 2);
    CHECK(e.pi == doctest::Approx(0.5).epsilon(1e-15));

    // m = 1.5: the advantaged low-effort worker loses outright, so the only
    // advantaged win is the merit one.
    CHECK(pi_empirical(make_pop({1, 2}), 1.5).pi == doctest::Approx(1.0).epsilon(1e-15));

    // {2, 4} with m = 2.0: the advantaged ordering ties (4 vs 4) and the tie
    // goes to the advantaged low-effort worker without merit; the other
    // ordering is a merit win.
    CHECK(pi_empirical(make_pop({2, 4}), 2.0).pi == doctest::Approx(0.5).epsilon(1e-15));

    // Strict merit drops ties between equal efforts.
    WorkerPopulation twins = make_pop({3, 3});
    CHECK(pi_empirical(twins, 1.0, MeritConvention::WeaklyMore).pi == doctest::Approx(1.0));
    CHECK(pi_empirical(twins, 1.0, MeritConvention::StrictlyMore).pi == doctest::Approx(0.0));

    CHECK_THROWS_AS(pi_empirical(make_pop({1, 2}), 0.9), DomainError);
    CHECK_THROWS_AS(pi_empirical(make_pop({1}), 1.5), ParameterError);
}

TEST_CASE("headstart enumeration") {
    // {10, 12} with b = 2: advantaged 10 ties 12 and takes the win without
    // merit; advantaged 12 wins with merit.
    CHECK(pi_headstart(make_pop({10, 12}), 2.0).pi == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pi_headstart(make_pop({10, 12}), 0.0).pi == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(pi_headstart(make_pop({10, 12}), -1.0), DomainError);
}

TEST_CASE("enumeration matches the closed form on a lognormal population") {
    EffortDistribution ln = EffortDistribution::log_normal(0.0, 0.3);
    WorkerPopulation pop = sample_population(ln, 400, 2024);
    for (double m : {1.5, 2.0, 3.0}) {
        PiEstimate e = pi_empirical(pop, m);
        CHECK(e.n_pairings == 400 * 399);
        CHECK(std::abs(e.pi - pi_analytic(ln, m)) < 0.05);
    }
}

TEST_CASE("curve enumeration is independent of the thread count") {
    WorkerPopulation pop = sample_population(default_calibration(), 120, 5);
    std::vector<double> grid = {1.0, 1.5, 2.0, 3.0, 4.0};
    setenv("MERITLUCK_THREADS", "1", 1);
    PiCurve one = pi_curve(pop, AdvantageKind::Multiplicative, grid);
    setenv("MERITLUCK_THREADS", "3", 1);
    PiCurve three = pi_curve(pop, AdvantageKind::Multiplicative, grid);
    unsetenv("MERITLUCK_THREADS");
    PiCurve deflt = pi_curve(pop, AdvantageKind::Multiplicative, grid);
    REQUIRE(one.points.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(one.points[i].pi_hat == three.points[i].pi_hat);
        CHECK(one.points[i].pi_hat == deflt.points[i].pi_hat);
        CHECK(one.points[i].n_pairings == 120 * 119);
    }
    CHECK(one.points.front().pi_hat == doctest::Approx(1.0));  // m = 1, weak merit
    CHECK_THROWS_AS(pi_curve(pop, AdvantageKind::Multiplicative, {2.0, 1.5}), DomainError);
    CHECK_THROWS_AS(pi_curve(pop, AdvantageKind::Multiplicative, {0.5, 1.5}), DomainError);
    CHECK_THROWS_AS(pi_curve(pop, AdvantageKind::Additive, {-1.0, 0.0}), DomainError);
}

TEST_CASE("nearest_pi prefers the smaller advantage on ties") {
    PiCurve curve;
    curve.kind = AdvantageKind::Multiplicative;
    curve.points = {{1.0, 1.0, 10}, {2.0, 0.75, 10}, {3.0, 0.25, 10}};
    CHECK(curve.nearest_pi(0.74).advantage == 2.0);
    // 0.75, 0.5 and 0.25 are exact binary fractions, so this is a true tie.
    CHECK(curve.nearest_pi(0.5).advantage == 2.0);
    CHECK(curve.nearest_pi(0.1).advantage == 3.0);
    PiCurve empty;
    CHECK_THROWS_AS(empty.nearest_pi(0.8), ContractError);
}

TEST_CASE("inversion lands on the multiplier grid and respects the cap") {
    WorkerPopulation pop = sample_population(default_calibration(), 150, 31);
    MultiplierModel model;
    std::vector<double> grid;
    for (int t = 10; t <= 40; ++t) grid.push_back(t / 10.0);
    PiCurve curve = pi_curve(pop, AdvantageKind::Multiplicative, grid);
    SeedStream ss(77);
    for (double target : {0.5, 0.6, 0.75, 0.9, 1.0}) {
        MultiplierInversion inv = invert_pi_to_multipliers(target, curve, model, ss);
        long long lo = std::llround(inv.m_low * 10);
        long long hi = std::llround(inv.m_high * 10);
        CHECK(std::abs(inv.m_low * 10 - lo) < 1e-9);
        CHECK(std::abs(inv.m_high * 10 - hi) < 1e-9);
        CHECK(lo >= 10);
        CHECK(hi <= 40);
        CHECK(hi >= lo);
        // m_high is m_low * grid_ratio rounded back to the tenths grid.
        CHECK(std::abs(inv.m_high - inv.m_low * inv.grid_ratio) < 0.05 + 1e-9);
        CHECK(inv.pi == curve.nearest_pi(target).pi_hat);
    }
    // A target of 1 maps to ratio 1: equal multipliers.
    MultiplierInversion certain = invert_pi_to_multipliers(1.0, curve, model, ss);
    CHECK(certain.m_low == certain.m_high);
    CHECK_THROWS_AS(invert_pi_to_multipliers(0.4, curve, model, ss), DomainError);

    // Shrinking the admissible band until nothing fits raises DesignError.
    MultiplierModel narrow;
    narrow.low = 3.9;
    narrow.high = 4.0;
    CHECK_THROWS_AS(invert_pi_to_multipliers(0.5, curve, narrow, ss), DesignError);
}

TEST_CASE("standard bins cover the percent grid") {
    PiBinning bins = standard_bins();
    REQUIRE(bins.bins.size() == 12);
    CHECK(assign_bin(bins, 0.50) == 0);
    CHECK(assign_bin(bins, 0.51) == 1);
    CHECK(assign_bin(bins, 0.54) == 1);
    CHECK(assign_bin(bins, 0.55) == 2);
    CHECK(assign_bin(bins, 0.99) == 10);
    CHECK(assign_bin(bins, 1.0) == 11);
    CHECK(assign_bin(bins, 0.7749999) == 6);  // rounds to 77, the 75-79 bin
    CHECK_THROWS_AS(assign_bin(bins, 0.4), DomainError);
    SeedStream ss(9);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> draws = draw_pi_per_bin(bins, ss);
        REQUIRE(draws.size() == 12);
        CHECK(draws.front() == 0.5);
        CHECK(draws.back() == 1.0);
        for (std::size_t b = 0; b < draws.size(); ++b) CHECK(assign_bin(bins, draws[b]) == b);
    }
}

TEST_CASE("convexity check accepts convex curves and flags concave ones") {
    EffortDistribution ln = EffortDistribution::log_normal(0.0, 0.3);
    std::vector<double> grid;
    for (int t = 10; t <= 40; ++t) grid.push_back(t / 10.0);
    CurvatureReport good = check_convexity(pi_curve_analytic(ln, grid));
    CHECK(good.pass);

    EffortDistribution uni = EffortDistribution::uniform(1.0);
    CHECK(check_convexity(pi_curve_analytic(uni, grid)).pass);

    PiCurve concave;
    concave.kind = AdvantageKind::Multiplicative;
    concave.points = {{1.0, 1.0, 0}, {2.0, 0.95, 0}, {3.0, 0.6, 0}};  // increasing drops
    CurvatureReport bad = check_convexity(concave);
    CHECK_FALSE(bad.pass);

    PiCurve rising;
    rising.points = {{1.0, 0.7, 0}, {2.0, 0.8, 0}, {3.0, 0.9, 0}};
    CHECK_FALSE(check_convexity(rising).pass);  // not weakly decreasing

    PiCurve tiny;
    tiny.points = {{1.0, 1.0, 0}, {2.0, 0.9, 0}};
    CHECK_THROWS_AS(check_convexity(tiny), DomainError);
}

TEST_CASE("log-concavity margin is positive for lognormal and uniform ratios") {
    std::vector<double> grid;
    for (int t = 10; t <= 40; ++t) grid.push_back(t / 10.0);
    LogConcavityReport ln = check_logconcavity(EffortDistribution::log_normal(0.0, 0.3), grid);
    CHECK(ln.pass);
    CHECK(ln.min_margin > 0.0);
    LogConcavityReport uni = check_logconcavity(EffortDistribution::uniform(1.0), grid);
    CHECK(uni.pass);
    CHECK_THROWS_AS(check_logconcavity(default_calibration(), grid), UnsupportedError);
}

TEST_CASE("log-concavity check flags a bimodal ratio model") {
    // Equal mixture of LN(0, 0.1) and LN(ln 3, 0.1) efforts: the ratio density
    // dips between the modes, so 2 f^2 - f' F goes negative there.
    auto mix_cdf = [](double z) {
        auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
        double s = std::sqrt(2.0) * 0.1;
        double mu = std::log(3.0);
        return 0.5 * phi(std::log(z) / s) + 0.25 * phi((std::log(z) - mu) / s) +
               0.25 * phi((std::log(z) + mu) / s);
    };
    auto mix_pdf = [&mix_cdf](double z) {
        double h = 1e-5 * z;
        return (mix_cdf(z + h) - mix_cdf(z - h)) / (2 * h);
    };
    std::vector<double> grid;
    for (int t = 10; t <= 40; ++t) grid.push_back(t / 10.0);
    LogConcavityReport rep = check_logconcavity(mix_cdf, mix_pdf, grid);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_margin < 0.0);
}

TEST_CASE("curve csv round trip") {
    WorkerPopulation pop = sample_population(default_calibration(), 60, 8);
    PiCurve curve = pi_curve(pop, AdvantageKind::Additive, {0.0, 1.0, 2.0, 3.0});
    auto path = std::filesystem::temp_directory_path() / "ml_curve_roundtrip.csv";
    write_pi_curve_csv(path, curve);
    PiCurve back = read_pi_curve_csv(path);
    CHECK(back.kind == curve.kind);
    REQUIRE(back.points.size() == curve.points.size());
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        CHECK(back.points[i].advantage == curve.points[i].advantage);
        CHECK(back.points[i].pi_hat == curve.points[i].pi_hat);
        CHECK(back.points[i].n_pairings == curve.points[i].n_pairings);
    }
    std::filesystem::remove(path);
}
