#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "meritluck/csvio.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/experiment.hpp"

using namespace meritluck;

namespace {

WorkerPopulation test_pop(std::size_t n, std::uint64_t seed) {
    return sample_population(default_calibration(), n, seed);
}

PiCurve tenths_curve(const WorkerPopulation& pop) {
    std::vector<double> grid;
    for (int t = 10; t <= 40; ++t) grid.push_back(t / 10.0);
    return pi_curve(pop, AdvantageKind::Multiplicative, grid);
}

}  // namespace

TEST_CASE("outcome designs cover the bins with consistent features") {
    WorkerPopulation pop = test_pop(80, 21);
    LuckEnvironment env = LuckEnvironment::outcomes(0.3);
    SessionDesign design = generate_design(env, pop, nullptr, 99);
    REQUIRE(design.decisions.size() == 12);
    PiBinning bins = standard_bins();
    std::set<std::size_t> seen;
    for (const auto& d : design.decisions) {
        seen.insert(assign_bin(bins, d.pi_target));
        REQUIRE(d.features.q.has_value());
        // q encodes the target exactly on the grid.
        CHECK(pi_from_q(*d.features.q) == d.pi_target);
        CHECK(d.pi_true == d.pi_target);
        CHECK(*d.match.pi_true == d.pi_true);
        CHECK_FALSE(d.features.m_w.has_value());
        CHECK(d.match.effort_w >= 5.0);
    }
    CHECK(seen.size() == 12);
    for (int r = 1; r <= 12; ++r) CHECK(design.decisions[r - 1].round == r);
    // Same seed, same design; different seed, different presentation.
    SessionDesign again = generate_design(env, pop, nullptr, 99);
    CHECK(again.decisions[3].match.winner_id == design.decisions[3].match.winner_id);
    CHECK(again.decisions[3].pi_target == design.decisions[3].pi_target);
}

TEST_CASE("opportunity designs require the advantaged side to win") {
    WorkerPopulation pop = test_pop(80, 22);
    PiCurve curve = tenths_curve(pop);
    LuckEnvironment env = LuckEnvironment::opportunities();
    SessionDesign design = generate_design(env, pop, &curve, 7);
    REQUIRE(design.decisions.size() == 12);
    for (const auto& d : design.decisions) {
        REQUIRE(d.features.m_w.has_value());
        REQUIRE(d.features.m_l.has_value());
        double m_w = *d.features.m_w, m_l = *d.features.m_l;
        // Unless multipliers are equal, the winner holds the larger one.
        if (m_w != m_l) CHECK(m_w > m_l);
        // pi_true is the curve value at the realized ratio, never below 1/2.
        CHECK(d.pi_true >= 0.5);
        CHECK(d.pi_true <= 1.0);
        // Scores are consistent with the declared winner.
        CHECK(m_w * d.match.effort_w >= m_l * d.match.effort_l - 1e-9);
    }
    // The certain bin realizes equal multipliers.
    bool has_equal = false;
    for (const auto& d : design.decisions) has_equal = has_equal || *d.features.m_w == *d.features.m_l;
    CHECK(has_equal);
    CHECK_THROWS_AS(generate_design(env, pop, nullptr, 7), ContractError);
}

TEST_CASE("design rejects environments it cannot stage") {
    WorkerPopulation pop = test_pop(40, 23);
    CHECK_THROWS_AS(generate_design(LuckEnvironment::headstarts({0, 1, 2}), pop, nullptr, 3),
                    ContractError);
}

TEST_CASE("design failures name the bin and target") {
    // A population with a single repeated effort makes every unequal-multiplier
    // match a win for the advantaged side, but the curve over a degenerate
    // one-point grid cannot reach low targets; instead, force failure with a
    // multiplier band too narrow to stage any ratio above 1.
    WorkerPopulation pop = test_pop(60, 24);
    PiCurve curve = tenths_curve(pop);
    MultiplierModel narrow;
    narrow.low = 3.9;
    narrow.high = 4.0;
    LuckEnvironment env = LuckEnvironment::opportunities(narrow);
    try {
        generate_design(env, pop, &curve, 5);
        CHECK(false);
    } catch (const DesignError& e) {
        std::string msg = e.what();
        CHECK(msg.find("bin") != std::string::npos);
        CHECK(msg.find("target") != std::string::npos);
    }
}

TEST_CASE("sessions apply the model rule round by round") {
    WorkerPopulation pop = test_pop(80, 25);
    LuckEnvironment env = LuckEnvironment::outcomes(0.3);
    SessionDesign design = generate_design(env, pop, nullptr, 12);

    SpectatorModel bayes;
    bayes.id = "sX";
    bayes.policy = SpectatorPolicy::Bayesian;
    auto records = run_session(bayes, design);
    REQUIRE(records.size() == 12);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        CHECK(rec.spectator_id == "sX");
        CHECK(rec.round == static_cast<int>(i) + 1);
        CHECK_FALSE(rec.informed);
        CHECK(rec.r == decide(bayes, design.decisions[i].features, design.decisions[i].pi_true));
    }

    // Informed bayesian coincides with uninformed on outcome arms: the
    // disclosed value equals pi(q).
    SpectatorModel informed = bayes;
    informed.informed = true;
    auto informed_records = run_session(informed, design);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(informed_records[i].informed);
        CHECK(informed_records[i].r == records[i].r);
    }
}

TEST_CASE("studies stack sorted sessions and honor the mixture") {
    WorkerPopulation pop = test_pop(80, 26);
    LuckEnvironment env = LuckEnvironment::outcomes(0.3);
    SpectatorMixture mix = SpectatorMixture::outcomes_default();
    auto dataset = run_study(mix, env, pop, 9, 1234);
    REQUIRE(dataset.size() == 9 * 12);
    for (std::size_t i = 1; i < dataset.size(); ++i) {
        bool ordered = dataset[i - 1].spectator_id < dataset[i].spectator_id ||
                       (dataset[i - 1].spectator_id == dataset[i].spectator_id &&
                        dataset[i - 1].round < dataset[i].round);
        CHECK(ordered);
    }
    for (const auto& rec : dataset) {
        CHECK(rec.env == LuckKind::Outcomes);
        CHECK(rec.q.has_value());
        CHECK(rec.r >= 0.0);
        CHECK(rec.r <= 1.0);
    }

    // Opportunity studies compute an internal curve when none is supplied.
    LuckEnvironment opp_env = LuckEnvironment::opportunities();
    SpectatorMixture opp_mix = SpectatorMixture::opportunities_default();
    auto opp_dataset = run_study(opp_mix, opp_env, pop, 4, 77);
    REQUIRE(opp_dataset.size() == 48);
    for (const auto& rec : opp_dataset) {
        CHECK(rec.m_w.has_value());
        CHECK_FALSE(rec.q.has_value());
    }

    // Heuristic env mismatch is rejected.
    CHECK_THROWS_AS(run_study(opp_mix, env, pop, 4, 77), ContractError);
}

TEST_CASE("dataset csv round trip is lossless") {
    WorkerPopulation pop = test_pop(60, 27);
    auto dataset = run_study(SpectatorMixture::outcomes_default(), LuckEnvironment::outcomes(0.3),
                             pop, 6, 555);
    auto path = std::filesystem::temp_directory_path() / "ml_dataset_roundtrip.csv";
    export_dataset(path, dataset);
    auto back = import_dataset(path);
    REQUIRE(back.size() == dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        CHECK(back[i].spectator_id == dataset[i].spectator_id);
        CHECK(back[i].round == dataset[i].round);
        CHECK(back[i].env == dataset[i].env);
        CHECK(back[i].timing == dataset[i].timing);
        CHECK(back[i].informed == dataset[i].informed);
        CHECK(back[i].q == dataset[i].q);
        CHECK(back[i].m_w == dataset[i].m_w);
        CHECK(back[i].m_l == dataset[i].m_l);
        CHECK(back[i].pi_true == dataset[i].pi_true);
        CHECK(back[i].effort_w == dataset[i].effort_w);
        CHECK(back[i].effort_l == dataset[i].effort_l);
        CHECK(back[i].r == dataset[i].r);
    }
    std::filesystem::remove(path);
}

TEST_CASE("design csv lists one row per round") {
    WorkerPopulation pop = test_pop(60, 28);
    SessionDesign design = generate_design(LuckEnvironment::outcomes(0.2), pop, nullptr, 8);
    auto path = std::filesystem::temp_directory_path() / "ml_design.csv";
    write_design_csv(path, design);
    std::string text = read_file(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 13);  // header + 12 rounds
    CHECK(text.rfind("round,", 0) == 0);
    std::filesystem::remove(path);
}
