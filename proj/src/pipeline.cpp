#include "meritluck/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <system_error>
#include <utility>

#include <nlohmann/json.hpp>

#include "meritluck/csvio.hpp"
#include "meritluck/econometrics.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/experiment.hpp"
#include "meritluck/mathutil.hpp"

namespace meritluck {

namespace {

// Registers every file a command writes and removes all of them if the
// command does not reach keep().
class OutputTracker {
  public:
    explicit OutputTracker(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    OutputTracker(const OutputTracker&) = delete;
    OutputTracker& operator=(const OutputTracker&) = delete;

    std::filesystem::path file(const std::string& name) {
        std::filesystem::path p = dir_ / name;
        files_.push_back(p);
        return p;
    }

    void keep() { kept_ = true; }

    ~OutputTracker() {
        if (kept_) return;
        for (const auto& p : files_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }

    const std::vector<std::filesystem::path>& files() const { return files_; }

  private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
    bool kept_ = false;
};

std::string hash_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::vector<ArmSpec> arms_for(const RunConfig& config) {
    std::vector<ArmSpec> arms;
    if (config.arm.empty())
        arms = default_arms();
    else
        arms = {arm_by_name(config.arm)};
    if (config.informed)
        for (auto& arm : arms) arm.informed = true;
    return arms;
}

WorkerPopulation population_for(const RunConfig& config) {
    EffortDistribution dist = config.effort.build();
    return sample_population(dist, config.n_workers, mix_seed(config.seed, fnv1a64("workers")));
}

// Enumerated curve over the multiplier model's tenths grid, shared by design
// generation for every opportunity arm.
PiCurve model_curve(const WorkerPopulation& pop, const RunConfig& config) {
    std::vector<double> grid;
    for (int t = config.multipliers.low_tenths(); t <= config.multipliers.high_tenths(); ++t)
        grid.push_back(t / 10.0);
    return pi_curve(pop, AdvantageKind::Multiplicative, grid, config.convention());
}

void write_curve_outputs(OutputTracker& out, const RunConfig& config, const WorkerPopulation& pop) {
    std::vector<double> grid = config.curve_kind == AdvantageKind::Multiplicative
                                   ? config.resolved_multiplier_grid()
                                   : config.resolved_headstart_grid();
    PiCurve curve = pi_curve(pop, config.curve_kind, grid, config.convention());
    write_pi_curve_csv(out.file("pi_curve.csv"), curve);
    write_file(out.file("convexity_report.json"), curvature_report_json(check_convexity(curve)));
}

void write_design_outputs(OutputTracker& out, const RunConfig& config, const WorkerPopulation& pop,
                          const std::vector<ArmSpec>& arms, const PiCurve* curve,
                          const std::string& suffix_per_arm) {
    for (const auto& arm : arms) {
        LuckEnvironment env = arm.environment(config);
        const PiCurve* c = env.kind == LuckKind::Opportunities ? curve : nullptr;
        SessionDesign design = generate_design(env, pop, c, arm.seed(config));
        std::string name = suffix_per_arm.empty() ? "design.csv" : "design_" + arm.name + ".csv";
        write_design_csv(out.file(name), design);
    }
}

std::map<std::string, std::vector<DecisionRecord>> write_study_outputs(OutputTracker& out,
                                                                       const RunConfig& config,
                                                                       const WorkerPopulation& pop,
                                                                       const std::vector<ArmSpec>& arms,
                                                                       const PiCurve* curve) {
    std::map<std::string, std::vector<DecisionRecord>> datasets;
    for (const auto& arm : arms) {
        LuckEnvironment env = arm.environment(config);
        const PiCurve* c = env.kind == LuckKind::Opportunities ? curve : nullptr;
        std::vector<DecisionRecord> dataset = run_study(arm.mixture(config), env, pop, config.n_spectators,
                                                        arm.seed(config), c, config.convention());
        export_dataset(out.file("decisions_" + arm.name + ".csv"), dataset);
        datasets.emplace(arm.name, std::move(dataset));
    }
    return datasets;
}

void write_analysis_outputs(OutputTracker& out,
                            const std::map<std::string, std::vector<DecisionRecord>>& datasets) {
    PiBinning binning = standard_bins();
    CsvTable elasticities;
    elasticities.header = {"arm",      "intercept", "slope",      "se_intercept", "se_slope",
                           "p_slope",  "n_obs",     "n_clusters", "r_squared"};
    CsvTable margins;
    margins.header = {"arm",     "extensive_share",  "extensive_se",    "n_spectators",
                      "n_never", "intensive_mean_r", "intensive_slope", "n_kept"};
    for (const auto& [name, ds] : datasets) {
        write_bin_table_csv(out.file("bin_means_" + name + ".csv"), bin_means(ds, binning));
        RegressionFit fit = elasticity_fit(ds);
        write_file(out.file("elasticity_" + name + ".json"), fit_json(fit));
        elasticities.rows.push_back({name, format_double(fit.coefficients[0]),
                                     format_double(fit.coefficients[1]), format_double(fit.se(0)),
                                     format_double(fit.se(1)), format_double(fit.p_value(1)),
                                     std::to_string(fit.n_obs), std::to_string(fit.n_clusters),
                                     format_double(fit.r_squared)});
        ExtensiveMargin ext = extensive_margin(ds);
        IntensiveMargin inten = intensive_margin(ds);
        margins.rows.push_back({name, format_double(ext.share), format_double(ext.se),
                                std::to_string(ext.n_spectators), std::to_string(ext.n_never),
                                format_double(inten.mean_r), format_double(inten.fit.coefficients[1]),
                                std::to_string(inten.n_spectators_kept)});
    }
    write_csv(out.file("elasticities.csv"), elasticities);
    write_csv(out.file("margins.csv"), margins);

    auto outc = datasets.find("outcomes");
    auto opp = datasets.find("opportunities");
    if (outc != datasets.end() && opp != datasets.end()) {
        write_bin_table_csv(out.file("gap_by_bin.csv"),
                            redistribution_gap(outc->second, opp->second, binning));
        write_file(out.file("decomposition.json"),
                   decomposition_json(effort_gap_accounting(outc->second, opp->second, std::nullopt)));
    }
    auto outc_i = datasets.find("outcomes_info");
    auto opp_i = datasets.find("opportunities_info");
    if (outc_i != datasets.end() && opp_i != datasets.end()) {
        write_bin_table_csv(out.file("gap_by_bin_informed.csv"),
                            redistribution_gap(outc_i->second, opp_i->second, binning));
    }
}

}  // namespace

LuckEnvironment ArmSpec::environment(const RunConfig& config) const {
    switch (env_kind) {
        case LuckKind::Outcomes: return LuckEnvironment::outcomes(config.q);
        case LuckKind::Opportunities: return LuckEnvironment::opportunities(config.multipliers, timing);
        case LuckKind::Headstarts: break;
    }
    throw ContractError("no study arm is defined for headstart environments");
}

SpectatorMixture ArmSpec::mixture(const RunConfig& config) const {
    SpectatorMixture m =
        env_kind == LuckKind::Outcomes ? config.mixture_outcomes : config.mixture_opportunities;
    m.informed = informed;
    return m;
}

std::uint64_t ArmSpec::seed(const RunConfig& config) const { return mix_seed(config.seed, fnv1a64(name)); }

std::vector<ArmSpec> default_arms() {
    return {
        {"outcomes", LuckKind::Outcomes, Timing::ExAnte, false},
        {"outcomes_info", LuckKind::Outcomes, Timing::ExAnte, true},
        {"opportunities", LuckKind::Opportunities, Timing::ExAnte, false},
        {"opportunities_info", LuckKind::Opportunities, Timing::ExAnte, true},
        {"expost", LuckKind::Opportunities, Timing::ExPost, false},
        {"expost_info", LuckKind::Opportunities, Timing::ExPost, true},
    };
}

ArmSpec arm_by_name(const std::string& name) {
    for (const auto& arm : default_arms())
        if (arm.name == name) return arm;
    throw ParameterError("unknown arm \"" + name +
                         "\"; expected outcomes, outcomes_info, opportunities, opportunities_info, "
                         "expost or expost_info");
}

void cmd_pi_curve(const RunConfig& config) {
    config.validate();
    OutputTracker out(config.out_dir);
    WorkerPopulation pop = population_for(config);
    write_curve_outputs(out, config, pop);
    out.keep();
}

void cmd_design(const RunConfig& config) {
    config.validate();
    OutputTracker out(config.out_dir);
    ArmSpec arm = arm_by_name(config.arm.empty() ? "outcomes" : config.arm);
    if (config.informed) arm.informed = true;
    WorkerPopulation pop = population_for(config);
    PiCurve curve;
    const PiCurve* curve_ptr = nullptr;
    if (arm.env_kind == LuckKind::Opportunities) {
        curve = model_curve(pop, config);
        curve_ptr = &curve;
    }
    write_design_outputs(out, config, pop, {arm}, curve_ptr, "");
    out.keep();
}

void cmd_run_study(const RunConfig& config) {
    config.validate();
    OutputTracker out(config.out_dir);
    WorkerPopulation pop = population_for(config);
    std::vector<ArmSpec> arms = arms_for(config);
    PiCurve curve;
    const PiCurve* curve_ptr = nullptr;
    for (const auto& arm : arms) {
        if (arm.env_kind == LuckKind::Opportunities) {
            curve = model_curve(pop, config);
            curve_ptr = &curve;
            break;
        }
    }
    write_study_outputs(out, config, pop, arms, curve_ptr);
    out.keep();
}

void cmd_analyze(const RunConfig& config) {
    OutputTracker out(config.out_dir);
    std::map<std::string, std::vector<DecisionRecord>> datasets;
    for (const auto& arm : arms_for(config)) {
        std::filesystem::path p = config.out_dir / ("decisions_" + arm.name + ".csv");
        if (std::filesystem::exists(p)) datasets.emplace(arm.name, import_dataset(p));
    }
    if (datasets.empty())
        throw IoError("no decision files found under " + config.out_dir.string() +
                      "; run the study command first");
    write_analysis_outputs(out, datasets);
    out.keep();
}

void cmd_reproduce(const RunConfig& config) {
    config.validate();
    OutputTracker out(config.out_dir);
    std::string stage = "population";
    try {
        WorkerPopulation pop = population_for(config);
        write_population_csv(out.file("workers.csv"), pop);

        stage = "curves";
        write_curve_outputs(out, config, pop);

        std::vector<ArmSpec> arms = arms_for(config);
        PiCurve curve;
        const PiCurve* curve_ptr = nullptr;
        for (const auto& arm : arms) {
            if (arm.env_kind == LuckKind::Opportunities) {
                curve = model_curve(pop, config);
                curve_ptr = &curve;
                break;
            }
        }

        stage = "designs";
        write_design_outputs(out, config, pop, arms, curve_ptr, "per_arm");

        stage = "studies";
        auto datasets = write_study_outputs(out, config, pop, arms, curve_ptr);

        stage = "analysis";
        write_analysis_outputs(out, datasets);

        stage = "manifest";
        nlohmann::json manifest;
        manifest["command"] = "reproduce";
        manifest["config"] = nlohmann::json::parse(config_to_json(config));
        nlohmann::json outputs = nlohmann::json::object();
        for (const auto& p : out.files()) outputs[p.filename().string()] = hash_hex(read_file(p));
        manifest["outputs"] = outputs;
        write_file(out.file("manifest.json"), manifest.dump(2) + "\n");
    } catch (const Error& e) {
        throw Error("reproduce stage \"" + stage + "\": " + e.what());
    }
    out.keep();
}

void cmd_validate(const RunConfig& config) {
    auto check = [](bool ok, const std::string& label) {
        if (!ok) throw ContractError("validate failed: " + label);
        std::printf("ok: %s\n", label.c_str());
    };

    bool grid_ok = true;
    for (int k = 0; k <= 200 && grid_ok; ++k) {
        double q = k / 200.0;
        double pi = pi_from_q(q);
        grid_ok = q_from_pi(pi) == q && pi >= 0.5 && pi <= 1.0;
    }
    check(grid_ok, "q to pi round trip is exact on the half-percent grid");

    bool endpoint_ok = true;
    for (int i = 0; i <= 50 && endpoint_ok; ++i) {
        double f = i / 100.0;
        endpoint_ok = optimal_redistribution(f, 1.0) == f && optimal_redistribution(f, 0.5) == 0.5;
    }
    check(endpoint_ok, "optimal redistribution is exact at pi = 1 and pi = 0.5");

    check(snap_to_grid(0.04) == 0.0 && snap_to_grid(0.06) == 0.1 && snap_to_grid(0.25) == 0.3 &&
              snap_to_grid(0.75) == 0.7 && snap_to_grid(0.05) == 0.1,
          "grid snapping resolves midpoints toward the equal split");

    {
        std::vector<double> y = {1, 2, 2, 4, 3, 6};
        std::vector<std::vector<double>> x;
        for (int i = 0; i < 6; ++i) x.push_back({1.0, static_cast<double>(i)});
        std::vector<std::string> clusters = {"a", "a", "b", "b", "c", "c"};
        RegressionFit fit = ols_clustered(y, x, clusters, {"intercept", "x"});
        bool ols_ok = std::abs(fit.coefficients[0] - 6.0 / 7.0) < 1e-10 &&
                      std::abs(fit.coefficients[1] - 6.0 / 7.0) < 1e-10 &&
                      std::abs(fit.se(0) - 0.3086629278011063) < 1e-8 &&
                      std::abs(fit.se(1) - 0.07784584131739063) < 1e-8;
        check(ols_ok, "clustered least squares matches the hand-solved 3-cluster problem");
    }

    {
        EffortDistribution dist = EffortDistribution::log_normal(0.0, 0.3);
        std::vector<double> grid;
        for (int t = 10; t <= 40; ++t) grid.push_back(t / 10.0);
        check(check_convexity(pi_curve_analytic(dist, grid)).pass,
              "analytic merit curve is monotone decreasing and convex");

        WorkerPopulation pop = sample_population(dist, 600, mix_seed(config.seed, fnv1a64("validate")));
        double gap = std::abs(pi_empirical(pop, 2.0).pi - pi_analytic(dist, 2.0));
        check(gap < 0.05, "enumerated merit probability tracks the closed form");
    }

    {
        WorkerPopulation pop =
            sample_population(default_calibration(), 40, mix_seed(config.seed, fnv1a64("validate_pop")));
        LuckEnvironment env = LuckEnvironment::outcomes(config.q);
        SpectatorMixture mix = SpectatorMixture::outcomes_default();
        auto a = run_study(mix, env, pop, 5, config.seed);
        auto b = run_study(mix, env, pop, 5, config.seed);
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) {
            same = a[i].spectator_id == b[i].spectator_id && a[i].round == b[i].round &&
                   a[i].r == b[i].r && a[i].pi_true == b[i].pi_true;
        }
        check(same && a.size() == 60, "study runs are deterministic for a fixed seed");

        SessionDesign design = generate_design(env, pop, nullptr, config.seed);
        PiBinning binning = standard_bins();
        std::vector<bool> seen(binning.bins.size(), false);
        bool design_ok = design.decisions.size() == binning.bins.size();
        for (std::size_t i = 0; design_ok && i < design.decisions.size(); ++i) {
            design_ok = design.decisions[i].round == static_cast<int>(i) + 1;
            if (design_ok) {
                std::size_t bin = assign_bin(binning, design.decisions[i].pi_target);
                design_ok = !seen[bin];
                seen[bin] = true;
            }
        }
        check(design_ok, "session designs cover each probability bin exactly once");
    }
}

}  // namespace meritluck
