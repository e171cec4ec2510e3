#include "meritluck/experiment.hpp"

#include <algorithm>
#include <numeric>

#include "meritluck/csvio.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/mathutil.hpp"

namespace meritluck {

namespace {

constexpr int kDesignAttemptCap = 10000;

std::pair<std::size_t, std::size_t> draw_distinct_pair(std::size_t n, SeedStream& ss) {
    std::size_t i = static_cast<std::size_t>(ss.uniform_int(0, n - 1));
    std::size_t j = i;
    while (j == i) j = static_cast<std::size_t>(ss.uniform_int(0, n - 1));
    return {i, j};
}

}  // namespace

SessionDesign generate_design(const LuckEnvironment& env, const WorkerPopulation& pop,
                              const PiCurve* curve, std::uint64_t seed) {
    env.validate();
    if (env.kind == LuckKind::Headstarts)
        throw ContractError("session designs cover outcome and opportunity environments only");
    if (pop.size() < 2) throw ParameterError("population must contain at least 2 workers");
    if (env.kind == LuckKind::Opportunities && curve == nullptr)
        throw ContractError("opportunity designs require a pi curve");

    SeedStream root(seed);
    SeedStream targets_stream = root.substream(0);
    PiBinning binning = standard_bins();
    std::vector<double> targets = draw_pi_per_bin(binning, targets_stream);

    SessionDesign design;
    design.env = env.kind;
    design.timing = env.timing;
    design.decisions.reserve(targets.size());

    for (std::size_t b = 0; b < targets.size(); ++b) {
        double target = targets[b];
        SeedStream bin_stream = root.substream(1 + b);
        DesignDecision decision;
        decision.pi_target = target;
        decision.features.env = env.kind;

        if (env.kind == LuckKind::Outcomes) {
            double q = q_from_pi(target);
            auto [i, j] = draw_distinct_pair(pop.size(), bin_stream);
            decision.match = resolve_outcome_match(pop.workers[i], pop.workers[j], q, bin_stream);
            decision.features.q = q;
            decision.pi_true = pi_from_q(q);  // equals the target exactly on the percent grid
        } else {
            MultiplierInversion inv;
            try {
                inv = invert_pi_to_multipliers(target, *curve, env.multipliers, bin_stream);
            } catch (const DesignError& e) {
                throw DesignError("design bin " + std::to_string(b + 1) + " (pi target " +
                                  format_double(target) + "): " + e.what());
            }
            bool equal_multipliers = inv.m_high == inv.m_low;
            bool accepted = false;
            for (int attempt = 0; attempt < kDesignAttemptCap && !accepted; ++attempt) {
                auto [i, j] = draw_distinct_pair(pop.size(), bin_stream);
                // The first-drawn worker holds the advantage; the match is
                // consistent with the features only if that worker wins (any
                // winner is consistent when the multipliers are equal).
                MatchRecord rec = resolve_opportunity_match(pop.workers[i], inv.m_high,
                                                            pop.workers[j], inv.m_low, bin_stream);
                if (equal_multipliers || rec.winner_id == pop.workers[i].id) {
                    decision.match = std::move(rec);
                    accepted = true;
                }
            }
            if (!accepted)
                throw DesignError("design bin " + std::to_string(b + 1) + " (pi target " +
                                  format_double(target) + "): no consistent match within " +
                                  std::to_string(kDesignAttemptCap) + " attempts");
            decision.features.m_w = decision.match.advantage_w;
            decision.features.m_l = decision.match.advantage_l;
            decision.pi_true = inv.pi;
        }
        decision.match.pi_true = decision.pi_true;
        design.decisions.push_back(std::move(decision));
    }

    // Uniform random presentation order over the 12 bins.
    SeedStream shuffle_stream = root.substream(100);
    std::vector<std::size_t> order(design.decisions.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_stream.shuffle(order);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        design.decisions[order[pos]].round = static_cast<int>(pos) + 1;
    std::sort(design.decisions.begin(), design.decisions.end(),
              [](const DesignDecision& a, const DesignDecision& b) { return a.round < b.round; });
    return design;
}

std::vector<DecisionRecord> run_session(const SpectatorModel& model, const SessionDesign& design) {
    std::vector<DecisionRecord> records;
    records.reserve(design.decisions.size());
    for (const auto& decision : design.decisions) {
        DecisionFeatures features = decision.features;
        if (model.informed) features.pi_disclosed = decision.pi_true;
        DecisionRecord rec;
        rec.spectator_id = model.id;
        rec.round = decision.round;
        rec.env = design.env;
        rec.timing = design.timing;
        rec.informed = model.informed;
        rec.q = features.q;
        rec.m_w = features.m_w;
        rec.m_l = features.m_l;
        rec.pi_true = decision.pi_true;
        rec.effort_w = decision.match.effort_w;
        rec.effort_l = decision.match.effort_l;
        rec.r = decide(model, features, decision.pi_true);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<DecisionRecord> run_study(const SpectatorMixture& mixture, const LuckEnvironment& env,
                                      const WorkerPopulation& pop, std::size_t n_spectators,
                                      std::uint64_t seed, const PiCurve* curve,
                                      MeritConvention convention) {
    if (n_spectators == 0) throw ParameterError("spectator count must be positive");
    env.validate();
    mixture.validate();
    if (env.kind == LuckKind::Headstarts)
        throw ContractError("studies cover outcome and opportunity environments only");
    if (mixture.heuristic_share > 0.0 && mixture.heuristic_env != env.kind)
        throw ContractError("mixture heuristic family does not match the environment");

    PiCurve internal_curve;
    if (env.kind == LuckKind::Opportunities && curve == nullptr) {
        std::vector<double> grid;
        for (int t = env.multipliers.low_tenths(); t <= env.multipliers.high_tenths(); ++t)
            grid.push_back(static_cast<double>(t) / 10.0);
        internal_curve = pi_curve(pop, AdvantageKind::Multiplicative, grid, convention);
        curve = &internal_curve;
    }

    std::vector<SpectatorModel> roster = sample_spectator_population(mixture, n_spectators, mix_seed(seed, 1));
    std::vector<DecisionRecord> dataset;
    dataset.reserve(n_spectators * 12);
    for (std::size_t k = 0; k < roster.size(); ++k) {
        SessionDesign design = generate_design(env, pop, curve, mix_seed(seed, 1000 + k));
        design.spectator_id = roster[k].id;
        std::vector<DecisionRecord> session = run_session(roster[k], design);
        dataset.insert(dataset.end(), session.begin(), session.end());
    }
    std::stable_sort(dataset.begin(), dataset.end(), [](const DecisionRecord& a, const DecisionRecord& b) {
        if (a.spectator_id != b.spectator_id) return a.spectator_id < b.spectator_id;
        return a.round < b.round;
    });
    return dataset;
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void export_dataset(const std::filesystem::path& path, const std::vector<DecisionRecord>& dataset) {
    CsvTable table;
    table.header = {"spectator_id", "round", "env",      "timing",   "informed", "q",
                    "m_w",          "m_l",   "pi_true",  "effort_w", "effort_l", "r"};
    table.rows.reserve(dataset.size());
    for (const auto& rec : dataset) {
        table.rows.push_back({rec.spectator_id, std::to_string(rec.round), to_string(rec.env),
                              to_string(rec.timing), rec.informed ? "true" : "false", opt_field(rec.q),
                              opt_field(rec.m_w), opt_field(rec.m_l), format_double(rec.pi_true),
                              format_double(rec.effort_w), format_double(rec.effort_l),
                              format_double(rec.r)});
    }
    write_csv(path, table);
}

std::vector<DecisionRecord> import_dataset(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    const std::string p = path.string();
    std::size_t sid = table.column("spectator_id", p), rnd = table.column("round", p);
    std::size_t env_c = table.column("env", p), tim = table.column("timing", p);
    std::size_t inf = table.column("informed", p), q_c = table.column("q", p);
    std::size_t mw = table.column("m_w", p), ml = table.column("m_l", p);
    std::size_t pit = table.column("pi_true", p), ew = table.column("effort_w", p);
    std::size_t el = table.column("effort_l", p), r_c = table.column("r", p);
    std::vector<DecisionRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t row_i = 0; row_i < table.rows.size(); ++row_i) {
        const auto& row = table.rows[row_i];
        auto bad = [&](const char* what) {
            return ParseError(p + ": record " + std::to_string(row_i + 2) + ": bad " + what);
        };
        DecisionRecord rec;
        rec.spectator_id = row[sid];
        std::uint64_t round;
        if (!parse_u64(row[rnd], round) || round == 0) throw bad("round");
        rec.round = static_cast<int>(round);
        rec.env = luck_kind_from_string(row[env_c]);
        rec.timing = timing_from_string(row[tim]);
        if (row[inf] != "true" && row[inf] != "false") throw bad("informed");
        rec.informed = row[inf] == "true";
        auto opt = [&](std::size_t col, const char* what) -> std::optional<double> {
            if (row[col].empty()) return std::nullopt;
            double v;
            if (!parse_double(row[col], v)) throw bad(what);
            return v;
        };
        rec.q = opt(q_c, "q");
        rec.m_w = opt(mw, "m_w");
        rec.m_l = opt(ml, "m_l");
        if (!parse_double(row[pit], rec.pi_true)) throw bad("pi_true");
        if (!parse_double(row[ew], rec.effort_w)) throw bad("effort_w");
        if (!parse_double(row[el], rec.effort_l)) throw bad("effort_l");
        if (!parse_double(row[r_c], rec.r)) throw bad("r");
        out.push_back(std::move(rec));
    }
    return out;
}

void write_design_csv(const std::filesystem::path& path, const SessionDesign& design) {
    CsvTable table;
    table.header = {"round",    "pi_target", "env",       "timing",   "q",
                    "m_w",      "m_l",       "pi_true",   "winner_id", "loser_id",
                    "effort_w", "effort_l",  "merit_flag"};
    for (const auto& d : design.decisions) {
        table.rows.push_back({std::to_string(d.round), format_double(d.pi_target), to_string(design.env),
                              to_string(design.timing), opt_field(d.features.q), opt_field(d.features.m_w),
                              opt_field(d.features.m_l), format_double(d.pi_true), d.match.winner_id,
                              d.match.loser_id, format_double(d.match.effort_w),
                              format_double(d.match.effort_l), d.match.merit_flag ? "true" : "false"});
    }
    write_csv(path, table);
}

}  // namespace meritluck
