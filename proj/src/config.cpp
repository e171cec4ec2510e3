#include "meritluck/config.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "meritluck/csvio.hpp"
#include "meritluck/errors.hpp"

namespace meritluck {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ParseError("config: " + where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) throw ParseError("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

EffortKind effort_kind_from_string(const std::string& s) {
    if (s == "truncated_rounded_normal") return EffortKind::TruncatedRoundedNormal;
    if (s == "lognormal") return EffortKind::LogNormal;
    if (s == "uniform") return EffortKind::Uniform;
    if (s == "empirical") return EffortKind::Empirical;
    throw ParseError("config: unknown effort kind \"" + s + "\"");
}

std::string effort_kind_to_string(EffortKind kind) {
    switch (kind) {
        case EffortKind::TruncatedRoundedNormal: return "truncated_rounded_normal";
        case EffortKind::LogNormal: return "lognormal";
        case EffortKind::Uniform: return "uniform";
        case EffortKind::Empirical: return "empirical";
    }
    throw ParameterError("invalid effort kind");
}

EffortSpec effort_from_json(const json& j) {
    require_keys(j, "effort", {"kind", "mean", "sd", "min_effort", "mu_log", "sigma_log", "upper",
                               "samples", "samples_path"});
    EffortSpec spec;
    if (j.contains("kind")) spec.kind = effort_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("mean")) spec.mean = j.at("mean").get<double>();
    if (j.contains("sd")) spec.sd = j.at("sd").get<double>();
    if (j.contains("min_effort")) spec.min_effort = j.at("min_effort").get<double>();
    if (j.contains("mu_log")) spec.mu_log = j.at("mu_log").get<double>();
    if (j.contains("sigma_log")) spec.sigma_log = j.at("sigma_log").get<double>();
    if (j.contains("upper")) spec.upper = j.at("upper").get<double>();
    if (j.contains("samples")) spec.samples = j.at("samples").get<std::vector<double>>();
    if (j.contains("samples_path")) spec.samples_path = j.at("samples_path").get<std::string>();
    return spec;
}

json effort_to_json(const EffortSpec& spec) {
    json j;
    j["kind"] = effort_kind_to_string(spec.kind);
    switch (spec.kind) {
        case EffortKind::TruncatedRoundedNormal:
            j["mean"] = spec.mean;
            j["sd"] = spec.sd;
            j["min_effort"] = spec.min_effort;
            break;
        case EffortKind::LogNormal:
            j["mu_log"] = spec.mu_log;
            j["sigma_log"] = spec.sigma_log;
            break;
        case EffortKind::Uniform:
            j["upper"] = spec.upper;
            break;
        case EffortKind::Empirical:
            if (!spec.samples_path.empty())
                j["samples_path"] = spec.samples_path.string();
            else
                j["samples"] = spec.samples;
            break;
    }
    return j;
}

MultiplierModel multipliers_from_json(const json& j) {
    require_keys(j, "multipliers", {"low", "high", "p_low", "p_high"});
    MultiplierModel model;
    if (j.contains("low")) model.low = j.at("low").get<double>();
    if (j.contains("high")) model.high = j.at("high").get<double>();
    if (j.contains("p_low")) model.p_low = j.at("p_low").get<double>();
    if (j.contains("p_high")) model.p_high = j.at("p_high").get<double>();
    return model;
}

json multipliers_to_json(const MultiplierModel& model) {
    return json{{"low", model.low}, {"high", model.high}, {"p_low", model.p_low}, {"p_high", model.p_high}};
}

ParamSpec param_from_json(const json& j, const std::string& where) {
    ParamSpec spec;
    if (j.is_number()) {
        spec.mean = j.get<double>();
        spec.sd = 0.0;
        return spec;
    }
    require_keys(j, where, {"mean", "sd", "lo", "hi"});
    if (j.contains("mean")) spec.mean = j.at("mean").get<double>();
    if (j.contains("sd")) spec.sd = j.at("sd").get<double>();
    if (j.contains("lo")) spec.lo = j.at("lo").get<double>();
    if (j.contains("hi")) spec.hi = j.at("hi").get<double>();
    return spec;
}

json param_to_json(const ParamSpec& spec) {
    if (spec.sd == 0.0) return json(spec.mean);
    return json{{"mean", spec.mean}, {"sd", spec.sd}, {"lo", spec.lo}, {"hi", spec.hi}};
}

SpectatorMixture mixture_from_json(const json& j, const std::string& where, SpectatorMixture base) {
    require_keys(j, where, {"never_share", "heuristic_share", "heuristic_env", "informed", "fair_share",
                            "c0", "plateau", "q_kink", "a0", "a1"});
    SpectatorMixture m = base;
    if (j.contains("never_share")) m.never_share = j.at("never_share").get<double>();
    if (j.contains("heuristic_share")) m.heuristic_share = j.at("heuristic_share").get<double>();
    if (j.contains("heuristic_env")) m.heuristic_env = luck_kind_from_string(j.at("heuristic_env").get<std::string>());
    if (j.contains("informed")) m.informed = j.at("informed").get<bool>();
    if (j.contains("fair_share")) m.fair_share = param_from_json(j.at("fair_share"), where + ".fair_share");
    if (j.contains("c0")) m.c0 = j.at("c0").get<double>();
    if (j.contains("plateau")) m.plateau = j.at("plateau").get<double>();
    if (j.contains("q_kink")) m.q_kink = j.at("q_kink").get<double>();
    if (j.contains("a0")) m.a0 = j.at("a0").get<double>();
    if (j.contains("a1")) m.a1 = j.at("a1").get<double>();
    return m;
}

json mixture_to_json(const SpectatorMixture& m) {
    json j;
    j["never_share"] = m.never_share;
    j["heuristic_share"] = m.heuristic_share;
    j["heuristic_env"] = to_string(m.heuristic_env);
    j["informed"] = m.informed;
    j["fair_share"] = param_to_json(m.fair_share);
    j["c0"] = m.c0;
    j["plateau"] = m.plateau;
    j["q_kink"] = m.q_kink;
    j["a0"] = m.a0;
    j["a1"] = m.a1;
    return j;
}

std::vector<double> grid_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError("config: " + where + " must be an array of numbers");
    std::vector<double> grid;
    for (const auto& v : j) {
        if (!v.is_number()) throw ParseError("config: " + where + " must be an array of numbers");
        grid.push_back(v.get<double>());
    }
    return grid;
}

}  // namespace

EffortDistribution EffortSpec::build() const {
    switch (kind) {
        case EffortKind::TruncatedRoundedNormal:
            return EffortDistribution::truncated_rounded_normal(mean, sd, min_effort);
        case EffortKind::LogNormal:
            return EffortDistribution::log_normal(mu_log, sigma_log);
        case EffortKind::Uniform:
            return EffortDistribution::uniform(upper);
        case EffortKind::Empirical: {
            if (!samples_path.empty()) {
                WorkerPopulation pop = read_population_csv(samples_path);
                std::vector<double> efforts;
                efforts.reserve(pop.workers.size());
                for (const auto& w : pop.workers) efforts.push_back(w.effort);
                return EffortDistribution::empirical(std::move(efforts));
            }
            return EffortDistribution::empirical(samples);
        }
    }
    throw ParameterError("invalid effort kind");
}

std::vector<double> RunConfig::resolved_multiplier_grid() const {
    if (!multiplier_grid.empty()) return multiplier_grid;
    std::vector<double> grid;
    for (int t = 10; t <= 40; ++t) grid.push_back(t / 10.0);
    return grid;
}

std::vector<double> RunConfig::resolved_headstart_grid() const {
    if (!headstart_grid.empty()) return headstart_grid;
    std::vector<double> grid;
    for (int b = 0; b <= 15; ++b) grid.push_back(b);
    return grid;
}

void RunConfig::validate() const {
    if (n_workers < 2) throw ParameterError("config: n_workers must be at least 2");
    if (n_spectators < 1) throw ParameterError("config: n_spectators must be positive");
    if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("config: q must lie in [0, 1]");
    if (out_dir.empty()) throw ParameterError("config: out_dir must be set");
    if (!effort.samples_path.empty() && !std::filesystem::exists(effort.samples_path))
        throw ParameterError("config: effort samples_path does not exist: " + effort.samples_path.string());
    multipliers.validate();
    mixture_outcomes.validate();
    mixture_opportunities.validate();
}

RunConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
    try {
        require_keys(j, "config", {"seed", "n_workers", "n_spectators", "out_dir", "informed",
                                   "strict_merit", "arm", "q", "effort", "multipliers", "curve_kind",
                                   "grids", "mixtures"});
        RunConfig config;
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("n_workers")) config.n_workers = j.at("n_workers").get<std::size_t>();
        if (j.contains("n_spectators")) config.n_spectators = j.at("n_spectators").get<std::size_t>();
        if (j.contains("out_dir")) config.out_dir = j.at("out_dir").get<std::string>();
        if (j.contains("informed")) config.informed = j.at("informed").get<bool>();
        if (j.contains("strict_merit")) config.strict_merit = j.at("strict_merit").get<bool>();
        if (j.contains("arm")) config.arm = j.at("arm").get<std::string>();
        if (j.contains("q")) config.q = j.at("q").get<double>();
        if (j.contains("effort")) config.effort = effort_from_json(j.at("effort"));
        if (j.contains("multipliers")) config.multipliers = multipliers_from_json(j.at("multipliers"));
        if (j.contains("curve_kind"))
            config.curve_kind = advantage_kind_from_string(j.at("curve_kind").get<std::string>());
        if (j.contains("grids")) {
            const json& g = j.at("grids");
            require_keys(g, "grids", {"multiplier", "headstart"});
            if (g.contains("multiplier")) config.multiplier_grid = grid_from_json(g.at("multiplier"), "grids.multiplier");
            if (g.contains("headstart")) config.headstart_grid = grid_from_json(g.at("headstart"), "grids.headstart");
        }
        if (j.contains("mixtures")) {
            const json& m = j.at("mixtures");
            require_keys(m, "mixtures", {"outcomes", "opportunities"});
            if (m.contains("outcomes"))
                config.mixture_outcomes =
                    mixture_from_json(m.at("outcomes"), "mixtures.outcomes", SpectatorMixture::outcomes_default());
            if (m.contains("opportunities"))
                config.mixture_opportunities = mixture_from_json(m.at("opportunities"), "mixtures.opportunities",
                                                                 SpectatorMixture::opportunities_default());
        }
        return config;
    } catch (const json::exception& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
}

std::string config_to_json(const RunConfig& config) {
    json j;
    j["seed"] = config.seed;
    j["n_workers"] = config.n_workers;
    j["n_spectators"] = config.n_spectators;
    j["out_dir"] = config.out_dir.string();
    j["informed"] = config.informed;
    j["strict_merit"] = config.strict_merit;
    j["arm"] = config.arm;
    j["q"] = config.q;
    j["effort"] = effort_to_json(config.effort);
    j["multipliers"] = multipliers_to_json(config.multipliers);
    j["curve_kind"] = to_string(config.curve_kind);
    j["grids"] = json{{"multiplier", config.resolved_multiplier_grid()},
                      {"headstart", config.resolved_headstart_grid()}};
    j["mixtures"] = json{{"outcomes", mixture_to_json(config.mixture_outcomes)},
                         {"opportunities", mixture_to_json(config.mixture_opportunities)}};
    return j.dump(2) + "\n";
}

RunConfig load_config(const std::filesystem::path& path) {
    return config_from_json(read_file(path));
}

}  // namespace meritluck
