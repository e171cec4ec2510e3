#include "meritluck/agents.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "meritluck/errors.hpp"
#include "meritluck/mathutil.hpp"
#include "meritluck/meritprob.hpp"

namespace meritluck {

const std::vector<double>& redistribution_grid() {
    static const std::vector<double> levels = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    return levels;
}

double snap_to_grid(double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("redistribution fraction must lie in [0, 1]");
    long long lo = static_cast<long long>(std::floor(r * 10.0));
    lo = std::clamp(lo, 0LL, 10LL);
    long long hi = std::min(lo + 1, 10LL);
    double level_lo = static_cast<double>(lo) / 10.0;
    double level_hi = static_cast<double>(hi) / 10.0;
    double d_lo = r - level_lo;
    double d_hi = level_hi - r;
    if (std::abs(d_lo - d_hi) < 1e-12) {
        // Exact midpoint: round toward the equal split.
        return std::abs(level_lo - 0.5) <= std::abs(level_hi - 0.5) ? level_lo : level_hi;
    }
    return d_lo < d_hi ? level_lo : level_hi;
}

double optimal_redistribution(double f, double pi) {
    if (!(f >= 0.0 && f <= 0.5)) throw DomainError("fair share must lie in [0, 0.5]");
    if (!(pi >= 0.5 && pi <= 1.0)) throw DomainError("pi must lie in [0.5, 1]");
    // Exact branches at the endpoints keep the fixed points bit-exact.
    if (pi == 1.0) return f;
    if (pi == 0.5) return 0.5;
    return pi * f + (1.0 - pi) * (1.0 - f);
}

double heuristic_outcomes(double c0, double c1, double q_kink, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("q must lie in [0, 1]");
    if (!(q_kink > 0.0 && q_kink <= 1.0)) throw ParameterError("q_kink must lie in (0, 1]");
    double r = c0 + c1 * std::min(q, q_kink);
    return std::clamp(r, 0.0, 0.5);
}

double heuristic_opportunities(double a0, double a1, double m_w, double m_l) {
    double r = a0 + a1 * (m_w - m_l);
    return std::clamp(r, 0.0, 0.5);
}

std::string to_string(SpectatorPolicy policy) {
    switch (policy) {
        case SpectatorPolicy::Bayesian: return "bayesian";
        case SpectatorPolicy::HeuristicOutcomes: return "heuristic_outcomes";
        case SpectatorPolicy::HeuristicOpportunities: return "heuristic_opportunities";
        case SpectatorPolicy::Never: return "never";
    }
    throw ContractError("unreachable spectator policy");
}

SpectatorPolicy spectator_policy_from_string(const std::string& s) {
    if (s == "bayesian") return SpectatorPolicy::Bayesian;
    if (s == "heuristic_outcomes") return SpectatorPolicy::HeuristicOutcomes;
    if (s == "heuristic_opportunities") return SpectatorPolicy::HeuristicOpportunities;
    if (s == "never") return SpectatorPolicy::Never;
    throw ParseError("unknown spectator policy '" + s + "'");
}

namespace {

void check_features(const DecisionFeatures& features, bool informed) {
    switch (features.env) {
        case LuckKind::Outcomes:
            if (!features.q || features.m_w || features.m_l)
                throw ContractError("outcome features require q and no multipliers");
            if (!(*features.q >= 0.0 && *features.q <= 1.0)) throw DomainError("q must lie in [0, 1]");
            break;
        case LuckKind::Opportunities:
            if (features.q || !features.m_w || !features.m_l)
                throw ContractError("opportunity features require winner and loser multipliers");
            if (!(*features.m_w > 0.0 && *features.m_l > 0.0))
                throw DomainError("multipliers must be positive");
            break;
        case LuckKind::Headstarts:
            throw ContractError("spectator sessions cover outcome and opportunity environments only");
    }
    if (informed) {
        if (!features.pi_disclosed) throw ContractError("informed model requires pi_disclosed");
        if (!(*features.pi_disclosed >= 0.5 && *features.pi_disclosed <= 1.0))
            throw DomainError("pi_disclosed must lie in [0.5, 1]");
    } else if (features.pi_disclosed) {
        throw ContractError("pi_disclosed is present but the model is uninformed");
    }
}

}  // namespace

double decide(const SpectatorModel& model, const DecisionFeatures& features, double pi_true) {
    check_features(features, model.informed);
    if (!(pi_true >= 0.5 && pi_true <= 1.0)) throw DomainError("pi_true must lie in [0.5, 1]");
    if (model.policy == SpectatorPolicy::Never) return 0.0;
    if (model.informed) {
        double f_eff;
        switch (model.policy) {
            case SpectatorPolicy::Bayesian: f_eff = model.fair_share; break;
            case SpectatorPolicy::HeuristicOutcomes: f_eff = model.c0; break;
            case SpectatorPolicy::HeuristicOpportunities: f_eff = model.a0; break;
            default: throw ContractError("unreachable spectator policy");
        }
        return snap_to_grid(optimal_redistribution(f_eff, *features.pi_disclosed));
    }
    switch (model.policy) {
        case SpectatorPolicy::Bayesian: {
            // For outcomes pi follows from q exactly; for opportunities pi_true
            // already carries the curve lookup done by design generation.
            double pi = features.env == LuckKind::Outcomes ? pi_from_q(*features.q) : pi_true;
            return snap_to_grid(optimal_redistribution(model.fair_share, pi));
        }
        case SpectatorPolicy::HeuristicOutcomes:
            if (features.env != LuckKind::Outcomes)
                throw ContractError("heuristic_outcomes model faced non-outcome features");
            return snap_to_grid(heuristic_outcomes(model.c0, model.c1, model.q_kink, *features.q));
        case SpectatorPolicy::HeuristicOpportunities:
            if (features.env != LuckKind::Opportunities)
                throw ContractError("heuristic_opportunities model faced non-opportunity features");
            return snap_to_grid(heuristic_opportunities(model.a0, model.a1, *features.m_w, *features.m_l));
        default:
            throw ContractError("unreachable spectator policy");
    }
}

double ParamSpec::draw(SeedStream& ss) const {
    if (!(lo <= hi)) throw ParameterError("parameter bounds out of order");
    if (sd < 0.0) throw ParameterError("parameter sd must be nonnegative");
    if (sd == 0.0) return std::clamp(mean, lo, hi);
    for (;;) {
        double x = ss.normal(mean, sd);
        if (x >= lo && x <= hi) return x;
    }
}

void SpectatorMixture::validate() const {
    if (never_share < 0.0 || heuristic_share < 0.0 || never_share + heuristic_share > 1.0 + 1e-12)
        throw ParameterError("mixture shares must be nonnegative and sum to at most 1");
    if (heuristic_env == LuckKind::Headstarts)
        throw ParameterError("heuristic spectators exist for outcome and opportunity environments only");
    if (!(fair_share.mean >= 0.0 && fair_share.mean <= 0.5))
        throw ParameterError("fair share mean must lie in [0, 0.5]");
    if (!(q_kink > 0.0 && q_kink <= 1.0)) throw ParameterError("q_kink must lie in (0, 1]");
    if (!(c0 >= 0.0 && c0 <= 0.5) || plateau < c0) throw ParameterError("heuristic intercepts out of range");
    if (!(a0 >= 0.0 && a0 <= 0.5)) throw ParameterError("heuristic intercepts out of range");
}

SpectatorMixture SpectatorMixture::outcomes_default() {
    SpectatorMixture mix;
    mix.never_share = 0.096;
    mix.heuristic_share = 0.60;
    mix.heuristic_env = LuckKind::Outcomes;
    mix.fair_share = {0.22, 0.05, 0.0, 0.5};
    return mix;
}

SpectatorMixture SpectatorMixture::opportunities_default() {
    SpectatorMixture mix;
    mix.never_share = 0.159;
    mix.heuristic_share = 0.62;
    mix.heuristic_env = LuckKind::Opportunities;
    mix.fair_share = {0.28, 0.05, 0.0, 0.5};
    return mix;
}

std::vector<SpectatorModel> sample_spectator_population(const SpectatorMixture& mixture, std::size_t n,
                                                        std::uint64_t seed) {
    if (n == 0) throw ParameterError("spectator count must be positive");
    mixture.validate();
    SeedStream ss(seed);
    std::vector<SpectatorModel> roster;
    roster.reserve(n);
    std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
    for (std::size_t i = 1; i <= n; ++i) {
        SpectatorModel model;
        std::string digits = std::to_string(i);
        model.id = "s" + std::string(width - digits.size(), '0') + digits;
        model.informed = mixture.informed;
        double u = ss.uniform01();
        if (u < mixture.never_share) {
            model.policy = SpectatorPolicy::Never;
        } else if (u < mixture.never_share + mixture.heuristic_share) {
            model.policy = mixture.heuristic_env == LuckKind::Outcomes
                               ? SpectatorPolicy::HeuristicOutcomes
                               : SpectatorPolicy::HeuristicOpportunities;
        } else {
            model.policy = SpectatorPolicy::Bayesian;
            model.fair_share = mixture.fair_share.draw(ss);
        }
        model.c0 = mixture.c0;
        model.c1 = mixture.heuristic_c1();
        model.q_kink = mixture.q_kink;
        model.a0 = mixture.a0;
        model.a1 = mixture.a1;
        roster.push_back(std::move(model));
    }
    return roster;
}

std::string roster_json(const std::vector<SpectatorModel>& roster) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& m : roster) {
        nlohmann::json params;
        switch (m.policy) {
            case SpectatorPolicy::Bayesian: params["fair_share"] = m.fair_share; break;
            case SpectatorPolicy::HeuristicOutcomes:
                params["c0"] = m.c0;
                params["c1"] = m.c1;
                params["q_kink"] = m.q_kink;
                break;
            case SpectatorPolicy::HeuristicOpportunities:
                params["a0"] = m.a0;
                params["a1"] = m.a1;
                break;
            case SpectatorPolicy::Never: break;
        }
        j.push_back({{"id", m.id},
                     {"policy", to_string(m.policy)},
                     {"informed", m.informed},
                     {"params", params}});
    }
    return j.dump(2) + "\n";
}

std::vector<SpectatorModel> roster_from_json(const std::string& text) {
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        if (!j.is_array()) throw ParseError("roster JSON must be an array");
        std::vector<SpectatorModel> roster;
        roster.reserve(j.size());
        for (const auto& item : j) {
            SpectatorModel m;
            m.id = item.at("id").get<std::string>();
            m.policy = spectator_policy_from_string(item.at("policy").get<std::string>());
            m.informed = item.at("informed").get<bool>();
            const auto& params = item.at("params");
            switch (m.policy) {
                case SpectatorPolicy::Bayesian: m.fair_share = params.at("fair_share").get<double>(); break;
                case SpectatorPolicy::HeuristicOutcomes:
                    m.c0 = params.at("c0").get<double>();
                    m.c1 = params.at("c1").get<double>();
                    m.q_kink = params.at("q_kink").get<double>();
                    break;
                case SpectatorPolicy::HeuristicOpportunities:
                    m.a0 = params.at("a0").get<double>();
                    m.a1 = params.at("a1").get<double>();
                    break;
                case SpectatorPolicy::Never: break;
            }
            roster.push_back(std::move(m));
        }
        return roster;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("roster JSON: ") + e.what());
    }
}

}  // namespace meritluck
