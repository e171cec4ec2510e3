#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "meritluck/agents.hpp"
#include "meritluck/effort.hpp"
#include "meritluck/environments.hpp"
#include "meritluck/meritprob.hpp"

namespace meritluck {

// Effort model selection for a run. Empirical efforts may be given inline or
// loaded from a worker CSV when the distribution is built.
struct EffortSpec {
    EffortKind kind = EffortKind::TruncatedRoundedNormal;
    double mean = 18.0;
    double sd = 5.5;
    double min_effort = 5.0;
    double mu_log = 0.0;
    double sigma_log = 0.3;
    double upper = 1.0;
    std::vector<double> samples;
    std::filesystem::path samples_path;

    EffortDistribution build() const;
};

// One JSON file drives every command; command-line flags override file values.
struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t n_workers = 800;
    std::size_t n_spectators = 390;
    std::filesystem::path out_dir = "out";
    bool informed = false;
    bool strict_merit = false;
    std::string arm;  // empty = every arm (study commands) or "outcomes" (design)
    double q = 0.275;  // outcome luck chance for single-environment commands
    EffortSpec effort{};
    MultiplierModel multipliers{};
    AdvantageKind curve_kind = AdvantageKind::Multiplicative;
    std::vector<double> multiplier_grid;  // empty = 1.0..4.0 in steps of 0.1
    std::vector<double> headstart_grid;   // empty = 0..15
    SpectatorMixture mixture_outcomes = SpectatorMixture::outcomes_default();
    SpectatorMixture mixture_opportunities = SpectatorMixture::opportunities_default();

    MeritConvention convention() const {
        return strict_merit ? MeritConvention::StrictlyMore : MeritConvention::WeaklyMore;
    }
    std::vector<double> resolved_multiplier_grid() const;
    std::vector<double> resolved_headstart_grid() const;
    void validate() const;
};

// Strict parsing: unknown keys and type mismatches raise ParseError naming the
// offending key.
RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace meritluck
