#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meritluck/environments.hpp"
#include "meritluck/random.hpp"

namespace meritluck {

// The 11 allowed redistribution levels: fractions 0.0, 0.1, ..., 1.0 of the pie.
const std::vector<double>& redistribution_grid();

// Nearest grid level; exact midpoints round toward 0.5 (the equal split).
double snap_to_grid(double r);

// r* = pi * f + (1 - pi) * (1 - f), the loss-minimizing split for a spectator
// with fair share f facing merit probability pi. Exact at the endpoints
// (pi = 1 -> f, pi = 0.5 -> 0.5).
double optimal_redistribution(double f, double pi);

// Piecewise-linear response to the coin-flip chance: c0 + c1 * min(q, q_kink),
// clamped to [0, 0.5].
double heuristic_outcomes(double c0, double c1, double q_kink, double q);

// Linear response to the multiplier difference: a0 + a1 * (m_w - m_l), clamped
// to [0, 0.5].
double heuristic_opportunities(double a0, double a1, double m_w, double m_l);

enum class SpectatorPolicy { Bayesian, HeuristicOutcomes, HeuristicOpportunities, Never };

std::string to_string(SpectatorPolicy policy);
SpectatorPolicy spectator_policy_from_string(const std::string& s);

struct SpectatorModel {
    std::string id;
    SpectatorPolicy policy = SpectatorPolicy::Bayesian;
    bool informed = false;
    double fair_share = 0.131;  // bayesian
    double c0 = 0.131;          // heuristic outcomes
    double c1 = (0.345 - 0.131) / 0.55;
    double q_kink = 0.55;
    double a0 = 0.179;  // heuristic opportunities
    double a1 = 0.04;
};

struct DecisionFeatures {
    LuckKind env = LuckKind::Outcomes;
    std::optional<double> q;    // outcomes
    std::optional<double> m_w;  // opportunities: winner and loser multipliers
    std::optional<double> m_l;
    std::optional<double> pi_disclosed;  // present only for informed spectators
};

// One redistribution choice on the grid. Never-types return 0. Informed models
// apply the optimal rule at the disclosed pi, with heuristic types using their
// merit-certain intercept as the effective fair share. Uninformed Bayesians
// compute pi from q for outcomes and use pi_true (the curve value attached by
// design generation) for opportunities; uninformed heuristics apply their
// feature rule.
double decide(const SpectatorModel& model, const DecisionFeatures& features, double pi_true);

// Point value when sd = 0, otherwise a normal draw truncated to [lo, hi] by
// rejection.
struct ParamSpec {
    double mean = 0.0;
    double sd = 0.0;
    double lo = 0.0;
    double hi = 0.5;

    double draw(SeedStream& ss) const;
};

struct SpectatorMixture {
    double never_share = 0.0;
    double heuristic_share = 0.0;  // bayesian share is the remainder
    LuckKind heuristic_env = LuckKind::Outcomes;
    bool informed = false;
    ParamSpec fair_share{0.131, 0.0, 0.0, 0.5};
    double c0 = 0.131;
    double plateau = 0.345;
    double q_kink = 0.55;
    double a0 = 0.179;
    double a1 = 0.04;

    double heuristic_c1() const { return (plateau - c0) / q_kink; }
    void validate() const;

    // Calibrated defaults for the two session environments.
    static SpectatorMixture outcomes_default();
    static SpectatorMixture opportunities_default();
};

// n models with ids s0001, s0002, ... and types drawn by the mixture shares.
std::vector<SpectatorModel> sample_spectator_population(const SpectatorMixture& mixture, std::size_t n,
                                                        std::uint64_t seed);

std::string roster_json(const std::vector<SpectatorModel>& roster);
std::vector<SpectatorModel> roster_from_json(const std::string& text);

}  // namespace meritluck
