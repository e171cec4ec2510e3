#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "meritluck/agents.hpp"
#include "meritluck/effort.hpp"
#include "meritluck/environments.hpp"
#include "meritluck/meritprob.hpp"

namespace meritluck {

struct DesignDecision {
    int round = 0;  // 1-based presentation position
    double pi_target = 1.0;
    DecisionFeatures features;
    MatchRecord match;
    double pi_true = 1.0;  // curve/formula value for the features, not the realized merit flag
};

struct SessionDesign {
    std::string spectator_id;
    LuckKind env = LuckKind::Outcomes;
    Timing timing = Timing::ExAnte;
    std::vector<DesignDecision> decisions;  // exactly 12, sorted by round, one per design bin
};

// One 12-decision session: draws a pi target per bin, maps it to features
// (q for outcomes, a multiplier pair via curve inversion for opportunities),
// and attaches a concrete match whose resolved winner is consistent with the
// features (rejection sampling, 10^4 attempt cap). The presentation order is a
// uniform random permutation.
SessionDesign generate_design(const LuckEnvironment& env, const WorkerPopulation& pop,
                              const PiCurve* curve, std::uint64_t seed);

struct DecisionRecord {
    std::string spectator_id;
    int round = 0;
    LuckKind env = LuckKind::Outcomes;
    Timing timing = Timing::ExAnte;
    bool informed = false;
    std::optional<double> q;
    std::optional<double> m_w;
    std::optional<double> m_l;
    double pi_true = 1.0;
    double effort_w = 0.0;
    double effort_l = 0.0;
    double r = 0.0;
};

// Applies the model's decision rule round by round; informed models see
// pi_true as the disclosed probability.
std::vector<DecisionRecord> run_session(const SpectatorModel& model, const SessionDesign& design);

// Samples a spectator roster, generates an independent design per spectator,
// and stacks all sessions, sorted by (spectator_id, round). A null curve is
// computed internally for opportunity environments.
std::vector<DecisionRecord> run_study(const SpectatorMixture& mixture, const LuckEnvironment& env,
                                      const WorkerPopulation& pop, std::size_t n_spectators,
                                      std::uint64_t seed, const PiCurve* curve = nullptr,
                                      MeritConvention convention = MeritConvention::WeaklyMore);

// Lossless CSV round trip (numeric fields use shortest round-trip formatting).
void export_dataset(const std::filesystem::path& path, const std::vector<DecisionRecord>& dataset);
std::vector<DecisionRecord> import_dataset(const std::filesystem::path& path);

void write_design_csv(const std::filesystem::path& path, const SessionDesign& design);

}  // namespace meritluck
