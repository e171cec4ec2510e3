#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meritluck/config.hpp"
#include "meritluck/csvio.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/meritprob.hpp"
#include "meritluck/pipeline.hpp"

using namespace meritluck;

namespace {

// Scratch directory removed on scope exit; commands create it themselves.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("meritluck_test_" + tag + "_" + std::to_string(++counter));
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

std::size_t count_entries(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir)) return 0;
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir)) ++n;
    return n;
}

}  // namespace

TEST_CASE("run config defaults") {
    RunConfig config;
    CHECK(config.seed == 1);
    CHECK(config.n_workers == 800);
    CHECK(config.n_spectators == 390);
    CHECK(config.q == 0.275);
    CHECK(config.out_dir == "out");
    CHECK(config.arm.empty());
    CHECK(config.convention() == MeritConvention::WeaklyMore);
    config.strict_merit = true;
    CHECK(config.convention() == MeritConvention::StrictlyMore);

    auto mg = config.resolved_multiplier_grid();
    REQUIRE(mg.size() == 31);
    CHECK(mg.front() == 1.0);
    CHECK(mg.back() == 4.0);
    auto hg = config.resolved_headstart_grid();
    REQUIRE(hg.size() == 16);
    CHECK(hg.front() == 0.0);
    CHECK(hg.back() == 15.0);

    config.multiplier_grid = {1.0, 2.0};
    CHECK(config.resolved_multiplier_grid() == std::vector<double>{1.0, 2.0});
    config.validate();
}

TEST_CASE("config json round trip preserves every field") {
    RunConfig config;
    config.seed = 99;
    config.n_workers = 64;
    config.n_spectators = 7;
    config.out_dir = "alt_out";
    config.informed = true;
    config.strict_merit = true;
    config.arm = "expost";
    config.q = 0.46;
    config.effort.kind = EffortKind::LogNormal;
    config.effort.mu_log = 0.1;
    config.effort.sigma_log = 0.25;
    config.multipliers = MultiplierModel{1.5, 3.5, 0.2, 0.15};
    config.curve_kind = AdvantageKind::Additive;
    config.multiplier_grid = {1.0, 1.5, 2.0};
    config.headstart_grid = {0.0, 1.0, 2.0};
    config.mixture_outcomes.never_share = 0.2;
    config.mixture_outcomes.fair_share = ParamSpec{0.3, 0.02, 0.0, 0.5};
    config.mixture_opportunities.heuristic_share = 0.4;
    config.mixture_opportunities.c0 = 0.15;

    RunConfig back = config_from_json(config_to_json(config));
    CHECK(back.seed == config.seed);
    CHECK(back.n_workers == config.n_workers);
    CHECK(back.n_spectators == config.n_spectators);
    CHECK(back.out_dir == config.out_dir);
    CHECK(back.informed == config.informed);
    CHECK(back.strict_merit == config.strict_merit);
    CHECK(back.arm == config.arm);
    CHECK(back.q == config.q);
    CHECK(back.effort.kind == EffortKind::LogNormal);
    CHECK(back.effort.mu_log == config.effort.mu_log);
    CHECK(back.effort.sigma_log == config.effort.sigma_log);
    CHECK(back.multipliers.low == config.multipliers.low);
    CHECK(back.multipliers.high == config.multipliers.high);
    CHECK(back.multipliers.p_low == config.multipliers.p_low);
    CHECK(back.multipliers.p_high == config.multipliers.p_high);
    CHECK(back.curve_kind == AdvantageKind::Additive);
    CHECK(back.multiplier_grid == config.multiplier_grid);
    CHECK(back.headstart_grid == config.headstart_grid);
    CHECK(back.mixture_outcomes.never_share == 0.2);
    CHECK(back.mixture_outcomes.fair_share.mean == 0.3);
    CHECK(back.mixture_outcomes.fair_share.sd == 0.02);
    CHECK(back.mixture_opportunities.heuristic_share == 0.4);
    CHECK(back.mixture_opportunities.c0 == 0.15);
    CHECK(back.mixture_opportunities.heuristic_env == LuckKind::Opportunities);
}

TEST_CASE("empirical effort specs round trip through samples or a path") {
    RunConfig config;
    config.effort.kind = EffortKind::Empirical;
    config.effort.samples = {2, 2, 4, 6};
    RunConfig back = config_from_json(config_to_json(config));
    CHECK(back.effort.samples == std::vector<double>{2, 2, 4, 6});
    EffortDistribution dist = back.effort.build();
    CHECK(dist.mean() == doctest::Approx(3.5));

    config.effort.samples.clear();
    config.effort.samples_path = "workers.csv";
    back = config_from_json(config_to_json(config));
    CHECK(back.effort.samples_path == std::filesystem::path("workers.csv"));
}

TEST_CASE("strict parsing rejects unknown keys and malformed values") {
    CHECK_THROWS_WITH_AS(config_from_json("{\"zap\": 1}"), doctest::Contains("zap"), ParseError);
    CHECK_THROWS_WITH_AS(config_from_json("{\"effort\": {\"kine\": \"uniform\"}}"),
                         doctest::Contains("kine"), ParseError);
    CHECK_THROWS_AS(config_from_json("{\"effort\": {\"kind\": \"gamma\"}}"), ParseError);
    CHECK_THROWS_AS(config_from_json("not json"), ParseError);
    CHECK_THROWS_AS(config_from_json("{\"grids\": {\"multiplier\": [1.0, \"x\"]}}"), ParseError);
    CHECK_THROWS_AS(config_from_json("{\"q\": \"high\"}"), ParseError);
    CHECK_THROWS_AS(config_from_json("{\"mixtures\": {\"outcomes\": {\"sharen\": 0.1}}}"), ParseError);
}

TEST_CASE("load config reads files and reports missing ones") {
    TempDir td("load");
    std::filesystem::create_directories(td.path);
    std::filesystem::path p = td.path / "config.json";
    write_file(p, "{\"seed\": 7, \"n_workers\": 10}\n");
    RunConfig config = load_config(p);
    CHECK(config.seed == 7);
    CHECK(config.n_workers == 10);
    CHECK(config.n_spectators == 390);
    CHECK_THROWS_AS(load_config(td.path / "missing.json"), IoError);
}

TEST_CASE("config validation catches bad counts and probabilities") {
    RunConfig config;
    config.n_workers = 1;
    CHECK_THROWS_AS(config.validate(), ParameterError);
    config = RunConfig{};
    config.n_spectators = 0;
    CHECK_THROWS_AS(config.validate(), ParameterError);
    config = RunConfig{};
    config.q = 1.5;
    CHECK_THROWS_AS(config.validate(), ParameterError);
    config = RunConfig{};
    config.out_dir.clear();
    CHECK_THROWS_AS(config.validate(), ParameterError);
    config = RunConfig{};
    config.effort.samples_path = "no/such/file.csv";
    CHECK_THROWS_AS(config.validate(), ParameterError);
    config = RunConfig{};
    config.mixture_outcomes.never_share = 0.9;
    config.mixture_outcomes.heuristic_share = 0.9;
    CHECK_THROWS_AS(config.validate(), ParameterError);
}

TEST_CASE("the six default arms cross environments with information") {
    auto arms = default_arms();
    REQUIRE(arms.size() == 6);
    CHECK(arms[0].name == "outcomes");
    CHECK(arms[1].name == "outcomes_info");
    CHECK(arms[2].name == "opportunities");
    CHECK(arms[3].name == "opportunities_info");
    CHECK(arms[4].name == "expost");
    CHECK(arms[5].name == "expost_info");
    for (std::size_t i = 0; i < 6; ++i) CHECK(arms[i].informed == (i % 2 == 1));
    CHECK(arms[0].env_kind == LuckKind::Outcomes);
    CHECK(arms[2].env_kind == LuckKind::Opportunities);
    CHECK(arms[2].timing == Timing::ExAnte);
    CHECK(arms[4].env_kind == LuckKind::Opportunities);
    CHECK(arms[4].timing == Timing::ExPost);

    CHECK(arm_by_name("expost_info").informed);
    CHECK_THROWS_AS(arm_by_name("headstarts"), ParameterError);

    RunConfig config;
    // Arm seeds are decorrelated even under a shared run seed.
    CHECK(arms[0].seed(config) != arms[1].seed(config));
    CHECK(arms[0].seed(config) != arms[2].seed(config));

    // The informed flag flows into the sampled mixture; the heuristic family
    // always matches the arm's environment.
    CHECK(arms[1].mixture(config).informed);
    CHECK_FALSE(arms[0].mixture(config).informed);
    CHECK(arms[0].mixture(config).heuristic_env == LuckKind::Outcomes);
    CHECK(arms[4].mixture(config).heuristic_env == LuckKind::Opportunities);

    LuckEnvironment ex_post = arms[4].environment(config);
    CHECK(ex_post.timing == Timing::ExPost);
    ArmSpec headstart_arm;
    headstart_arm.env_kind = LuckKind::Headstarts;
    CHECK_THROWS_AS(headstart_arm.environment(config), ContractError);
}

TEST_CASE("pi curve command writes a curve and a curvature report") {
    TempDir td("picurve");
    RunConfig config;
    config.n_workers = 50;
    config.effort.kind = EffortKind::LogNormal;
    config.multiplier_grid = {1.0, 1.5, 2.0, 3.0};
    config.out_dir = td.path;
    cmd_pi_curve(config);

    PiCurve curve = read_pi_curve_csv(td.path / "pi_curve.csv");
    REQUIRE(curve.points.size() == 4);
    CHECK(curve.kind == AdvantageKind::Multiplicative);
    CHECK(curve.points.front().advantage == 1.0);
    CHECK(curve.points.front().pi_hat == 1.0);
    // The enumeration is exactly monotone in the advantage; convexity of a
    // small-sample curve is noisy, so only the report structure is checked.
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        CHECK(curve.points[i].pi_hat <= curve.points[i - 1].pi_hat + 1e-12);

    auto report = nlohmann::json::parse(read_file(td.path / "convexity_report.json"));
    CHECK(report.contains("pass"));
    CHECK(report.contains("second_diffs"));
}

TEST_CASE("pi curve command covers additive advantages") {
    TempDir td("headcurve");
    RunConfig config;
    config.n_workers = 50;
    config.curve_kind = AdvantageKind::Additive;
    config.headstart_grid = {0.0, 1.0, 2.0, 3.0};
    config.out_dir = td.path;
    cmd_pi_curve(config);

    PiCurve curve = read_pi_curve_csv(td.path / "pi_curve.csv");
    REQUIRE(curve.points.size() == 4);
    CHECK(curve.kind == AdvantageKind::Additive);
    CHECK(curve.points.front().pi_hat == 1.0);
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        CHECK(curve.points[i].pi_hat <= curve.points[i - 1].pi_hat + 1e-12);
}

TEST_CASE("design command writes one session design per arm") {
    TempDir td("design");
    RunConfig config;
    config.n_workers = 40;
    config.out_dir = td.path;
    cmd_design(config);  // empty arm defaults to outcomes

    CsvTable table = read_csv(td.path / "design.csv");
    CHECK(table.rows.size() == 12);
    CHECK(table.header.front() == "round");
}

TEST_CASE("failed studies leave no partial outputs behind") {
    TempDir td("partial");
    RunConfig config;
    config.n_workers = 40;
    config.n_spectators = 4;
    config.out_dir = td.path;
    // A multiplier range this narrow cannot reach any probability bin: the
    // curve only holds ratios 3.9 and 4.0 and no grid pair fits them.
    config.multipliers = MultiplierModel{3.9, 4.0, 0.05, 0.05};
    CHECK_THROWS_AS(cmd_run_study(config), DesignError);
    // The outcome arms were written before the failure and must be gone.
    CHECK(count_entries(td.path) == 0);

    try {
        cmd_reproduce(config);
        FAIL("expected the reproduce run to fail at the design stage");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("reproduce stage \"designs\"") != std::string::npos);
        CHECK(msg.find("bin") != std::string::npos);
    }
    CHECK(count_entries(td.path) == 0);
}

TEST_CASE("analysis requires decision files and writes summary tables") {
    TempDir td("analysis");
    RunConfig config;
    config.n_workers = 40;
    config.n_spectators = 8;
    config.arm = "outcomes";
    config.out_dir = td.path;
    CHECK_THROWS_AS(cmd_analyze(config), IoError);
    CHECK(count_entries(td.path) == 0);

    cmd_run_study(config);
    CHECK(std::filesystem::exists(td.path / "decisions_outcomes.csv"));
    cmd_analyze(config);
    CHECK(std::filesystem::exists(td.path / "bin_means_outcomes.csv"));
    CHECK(std::filesystem::exists(td.path / "elasticity_outcomes.json"));
    CsvTable elas = read_csv(td.path / "elasticities.csv");
    REQUIRE(elas.rows.size() == 1);
    CHECK(elas.rows[0][0] == "outcomes");
    CsvTable margins = read_csv(td.path / "margins.csv");
    REQUIRE(margins.rows.size() == 1);
    // Gap tables need both an outcomes and an opportunities dataset.
    CHECK_FALSE(std::filesystem::exists(td.path / "gap_by_bin.csv"));
}
