#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "meritluck/effort.hpp"
#include "meritluck/errors.hpp"

using namespace meritluck;

TEST_CASE("lognormal ratio closed forms") {
    EffortDistribution ln = EffortDistribution::log_normal(0.0, 0.3);
    // Phi(ln t / (sigma * sqrt(2))) evaluated independently.
    CHECK(ln.ratio_cdf(2.0) == doctest::Approx(0.9488457480324072).epsilon(1e-12));
    CHECK(ln.ratio_density(1.0) == doctest::Approx(0.9403159725795939).epsilon(1e-12));
    EffortDistribution tight = EffortDistribution::log_normal(0.0, 0.12);
    CHECK(tight.ratio_cdf(1.5) == doctest::Approx(0.9915580450918031).epsilon(1e-12));
    CHECK(ln.ratio_cdf(1.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lognormal diff cdf integrates to the right limits") {
    EffortDistribution ln = EffortDistribution::log_normal(0.0, 0.3);
    CHECK(ln.diff_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(ln.diff_cdf(50.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ln.diff_cdf(-50.0) == doctest::Approx(0.0).epsilon(1e-9));
    // Monotone in d, including across the negative-d integrand kink.
    double prev = 0.0;
    for (double d = -3.0; d <= 3.0; d += 0.25) {
        double v = ln.diff_cdf(d);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    // P(e2 - e1 <= d) + P(e2 - e1 <= -d) = 1 for a continuous symmetric difference.
    CHECK(ln.diff_cdf(0.7) + ln.diff_cdf(-0.7) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("truncated rounded normal table oracles") {
    EffortDistribution trn = default_calibration();
    CHECK(trn.param_mean() == 18.0);
    CHECK(trn.param_sd() == 5.5);
    CHECK(trn.param_min_effort() == 5.0);
    CHECK(trn.mean() == doctest::Approx(18.108960965967533).epsilon(1e-12));
    CHECK(trn.diff_cdf(0.0) == doctest::Approx(0.525968221814905).epsilon(1e-12));
    CHECK(trn.diff_cdf(1.0) == doctest::Approx(0.5774704642362131).epsilon(1e-12));
    CHECK(trn.ratio_cdf(1.5) == doctest::Approx(0.8288362697435494).epsilon(1e-12));
    CHECK(trn.ratio_cdf(2.0) == doctest::Approx(0.939571598325778).epsilon(1e-12));

    const auto& probs = trn.probabilities();
    const auto& values = trn.support();
    REQUIRE(!probs.empty());
    REQUIRE(values.size() == probs.size());
    CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(values.front() == 5.0);
    CHECK(std::is_sorted(values.begin(), values.end()));
}

TEST_CASE("uniform ratio closed forms") {
    EffortDistribution u = EffortDistribution::uniform(1.0);
    CHECK(u.ratio_cdf(0.5) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(u.ratio_cdf(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(u.ratio_cdf(2.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(u.ratio_density(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    // Triangular difference on (0, 1): P(e2 - e1 <= 0.5) = 1 - 0.25/2.
    CHECK(u.diff_cdf(0.5) == doctest::Approx(0.875).epsilon(1e-12));
    CHECK(u.diff_cdf(-0.5) == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("empirical tables are exact") {
    EffortDistribution emp = EffortDistribution::empirical({2, 2, 4, 6});
    CHECK(emp.mean() == doctest::Approx(3.5).epsilon(1e-15));
    // All 16 ordered sample pairs (e1, e2) are equally likely.
    // e2/e1 <= 1 holds for 11 of them: 4 + 3 + 4 grouped by e1 = 2, 4, 6.
    CHECK(emp.ratio_cdf(1.0) == doctest::Approx(11.0 / 16.0).epsilon(1e-15));
    CHECK(emp.ratio_cdf(0.5) == doctest::Approx(4.0 / 16.0).epsilon(1e-15));
    CHECK(emp.diff_cdf(0.0) == doctest::Approx(11.0 / 16.0).epsilon(1e-15));
    CHECK(emp.diff_cdf(-2.0) == doctest::Approx(5.0 / 16.0).epsilon(1e-15));
    CHECK_THROWS_AS(emp.ratio_density(1.0), UnsupportedError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(EffortDistribution::log_normal(0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(EffortDistribution::uniform(-1.0), ParameterError);
    CHECK_THROWS_AS(EffortDistribution::truncated_rounded_normal(18.0, 0.0, 5.0), ParameterError);
    CHECK_THROWS_AS(EffortDistribution::truncated_rounded_normal(18.0, 5.5, 4.5), ParameterError);
    CHECK_THROWS_AS(EffortDistribution::empirical({}), ParameterError);
    CHECK_THROWS_AS(EffortDistribution::empirical({1.0, -2.0}), ParameterError);
    EffortDistribution ln = EffortDistribution::log_normal(0.0, 0.3);
    CHECK_THROWS_AS(ln.ratio_cdf(0.0), DomainError);
    CHECK_THROWS_AS(ln.ratio_cdf(-1.0), DomainError);
    CHECK_THROWS_AS(ln.support(), UnsupportedError);
}

TEST_CASE("sampling stays in the support and tracks the mean") {
    SeedStream ss(123);
    EffortDistribution trn = default_calibration();
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        double e = trn.sample(ss);
        CHECK(e >= 5.0);
        CHECK(e == std::round(e));
        sum += e;
    }
    CHECK(sum / 20000 == doctest::Approx(trn.mean()).epsilon(0.01));
}

TEST_CASE("population sampling and csv round trip") {
    WorkerPopulation pop = sample_population(default_calibration(), 25, 99, "demo");
    REQUIRE(pop.size() == 25);
    CHECK(pop.workers.front().id == "w0001");
    CHECK(pop.workers.back().id == "w0025");
    auto path = std::filesystem::temp_directory_path() / "ml_pop_roundtrip.csv";
    write_population_csv(path, pop);
    WorkerPopulation back = read_population_csv(path);
    REQUIRE(back.size() == pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        CHECK(back.workers[i].id == pop.workers[i].id);
        CHECK(back.workers[i].effort == pop.workers[i].effort);
    }
    std::filesystem::remove(path);
}
