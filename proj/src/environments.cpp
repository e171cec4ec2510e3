#include "meritluck/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "meritluck/csvio.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/mathutil.hpp"

namespace meritluck {

namespace {

// True if x sits on the tenths grid (within absolute 1e-9); fills the integer
// tenths count.
bool tenths_of(double x, long long& out) {
    double scaled = x * 10.0;
    out = std::llround(scaled);
    return std::abs(scaled - static_cast<double>(out)) < 1e-9;
}

std::string opt_to_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace

std::string to_string(LuckKind kind) {
    switch (kind) {
        case LuckKind::Outcomes: return "outcomes";
        case LuckKind::Opportunities: return "opportunities";
        case LuckKind::Headstarts: return "headstarts";
    }
    throw ContractError("unreachable luck kind");
}

std::string to_string(Timing timing) {
    return timing == Timing::ExAnte ? "ex_ante" : "ex_post";
}

LuckKind luck_kind_from_string(const std::string& s) {
    if (s == "outcomes") return LuckKind::Outcomes;
    if (s == "opportunities") return LuckKind::Opportunities;
    if (s == "headstarts") return LuckKind::Headstarts;
    throw ParseError("unknown luck kind '" + s + "'");
}

Timing timing_from_string(const std::string& s) {
    if (s == "ex_ante") return Timing::ExAnte;
    if (s == "ex_post") return Timing::ExPost;
    throw ParseError("unknown timing '" + s + "'");
}

void MultiplierModel::validate() const {
    long long lt, ht;
    if (!std::isfinite(low) || !std::isfinite(high) || !tenths_of(low, lt) || !tenths_of(high, ht))
        throw ParameterError("multiplier endpoints must sit on the 0.1 grid");
    if (!(low > 0.0) || !(high > low)) throw ParameterError("multiplier endpoints must satisfy 0 < low < high");
    if (p_low < 0.0 || p_high < 0.0 || p_low + p_high > 1.0)
        throw ParameterError("multiplier point masses must be nonnegative and sum to at most 1");
}

int MultiplierModel::low_tenths() const {
    long long t;
    tenths_of(low, t);
    return static_cast<int>(t);
}

int MultiplierModel::high_tenths() const {
    long long t;
    tenths_of(high, t);
    return static_cast<int>(t);
}

int MultiplierModel::sample_tenths(SeedStream& ss) const {
    double u = ss.uniform01();
    if (u < p_low) return low_tenths();
    if (u < p_low + p_high) return high_tenths();
    // Continuous component rounded half-up to the nearest tenth.
    double v = ss.uniform(low, high);
    long long t = round_half_up(v * 10.0);
    t = std::clamp(t, static_cast<long long>(low_tenths()), static_cast<long long>(high_tenths()));
    return static_cast<int>(t);
}

double MultiplierModel::sample(SeedStream& ss) const {
    return sample_tenths(ss) / 10.0;
}

std::vector<std::pair<int, double>> MultiplierModel::pmf_tenths() const {
    validate();
    int lt = low_tenths(), ht = high_tenths();
    double span = high - low;
    double pc = 1.0 - p_low - p_high;
    std::vector<std::pair<int, double>> pmf;
    pmf.reserve(static_cast<std::size_t>(ht - lt + 1));
    for (int t = lt; t <= ht; ++t) {
        double width;
        if (t == lt || t == ht) {
            // Endpoint rounding cells are half-open with width 0.05, keeping
            // the point masses exact.
            width = 0.05;
        } else {
            width = 0.1;
        }
        double p = pc * width / span;
        if (t == lt) p += p_low;
        if (t == ht) p += p_high;
        pmf.emplace_back(t, p);
    }
    return pmf;
}

LuckEnvironment LuckEnvironment::outcomes(double q) {
    LuckEnvironment env;
    env.kind = LuckKind::Outcomes;
    env.q = q;
    env.validate();
    return env;
}

LuckEnvironment LuckEnvironment::opportunities(MultiplierModel model, Timing timing) {
    LuckEnvironment env;
    env.kind = LuckKind::Opportunities;
    env.multipliers = model;
    env.timing = timing;
    env.disclosure = timing == Timing::ExPost ? Disclosure::After : Disclosure::Before;
    env.validate();
    return env;
}

LuckEnvironment LuckEnvironment::headstarts(std::vector<double> support) {
    LuckEnvironment env;
    env.kind = LuckKind::Headstarts;
    env.headstart_support = std::move(support);
    env.validate();
    return env;
}

void LuckEnvironment::validate() const {
    switch (kind) {
        case LuckKind::Outcomes:
            if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("coin-flip chance q must lie in [0, 1]");
            return;
        case LuckKind::Opportunities:
            multipliers.validate();
            return;
        case LuckKind::Headstarts:
            if (headstart_support.empty()) throw ParameterError("headstart support must be nonempty");
            for (double b : headstart_support) {
                if (!std::isfinite(b) || b < 0.0 || !near_integer(b))
                    throw ParameterError("headstarts must be nonnegative integers");
            }
            return;
    }
    throw ContractError("unreachable luck kind");
}

int compare_scores(double e_a, double m_a, double e_b, double m_b) {
    long long ta, tb;
    double sa, sb;
    if (tenths_of(m_a, ta) && tenths_of(m_b, tb)) {
        // Integer-tenths scaling keeps grid scores exact for integer efforts.
        sa = static_cast<double>(ta) * e_a;
        sb = static_cast<double>(tb) * e_b;
    } else {
        sa = m_a * e_a;
        sb = m_b * e_b;
    }
    if (sa > sb) return 1;
    if (sa < sb) return -1;
    return 0;
}

namespace {

MatchRecord make_record(const Worker& winner, const Worker& loser) {
    MatchRecord rec;
    rec.winner_id = winner.id;
    rec.loser_id = loser.id;
    rec.effort_w = winner.effort;
    rec.effort_l = loser.effort;
    rec.merit_flag = winner.effort >= loser.effort;
    return rec;
}

}  // namespace

MatchRecord resolve_outcome_match(const Worker& a, const Worker& b, double q, SeedStream& ss) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("coin-flip chance q must lie in [0, 1]");
    bool luck_coin = ss.bernoulli(q);
    bool coin_used = luck_coin;
    const Worker* winner;
    if (luck_coin) {
        winner = ss.coin() ? &a : &b;
    } else if (a.effort == b.effort) {
        winner = ss.coin() ? &a : &b;
        coin_used = true;
    } else {
        winner = a.effort > b.effort ? &a : &b;
    }
    MatchRecord rec = make_record(*winner, winner == &a ? b : a);
    rec.q_used = q;
    rec.coin_flip = coin_used;
    return rec;
}

MatchRecord resolve_opportunity_match(const Worker& a, double m_a, const Worker& b, double m_b,
                                      SeedStream& ss) {
    if (!(m_a > 0.0) || !(m_b > 0.0)) throw DomainError("multipliers must be positive");
    int cmp = compare_scores(a.effort, m_a, b.effort, m_b);
    bool a_wins = cmp > 0 || (cmp == 0 && ss.coin());
    MatchRecord rec = make_record(a_wins ? a : b, a_wins ? b : a);
    rec.advantage_w = a_wins ? m_a : m_b;
    rec.advantage_l = a_wins ? m_b : m_a;
    return rec;
}

MatchRecord resolve_headstart_match(const Worker& a, double b_a, const Worker& b, double b_b,
                                    SeedStream& ss) {
    if (b_a < 0.0 || b_b < 0.0) throw DomainError("headstarts must be nonnegative");
    double sa = a.effort + b_a;
    double sb = b.effort + b_b;
    bool a_wins = sa > sb || (sa == sb && ss.coin());
    MatchRecord rec = make_record(a_wins ? a : b, a_wins ? b : a);
    rec.advantage_w = a_wins ? b_a : b_b;
    rec.advantage_l = a_wins ? b_b : b_a;
    return rec;
}

std::vector<MatchRecord> pair_all(const WorkerPopulation& pop, const LuckEnvironment& env,
                                  std::uint64_t seed) {
    if (pop.size() < 2) throw ParameterError("population must contain at least 2 workers");
    env.validate();
    SeedStream root(seed);
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), 0);
    SeedStream shuffler = root.substream(0);
    shuffler.shuffle(idx);
    std::size_t n_pairs = pop.size() / 2;  // odd worker dropped
    std::vector<MatchRecord> out;
    out.reserve(n_pairs);
    for (std::size_t p = 0; p < n_pairs; ++p) {
        const Worker& a = pop.workers[idx[2 * p]];
        const Worker& b = pop.workers[idx[2 * p + 1]];
        SeedStream ps = root.substream(1 + p);
        switch (env.kind) {
            case LuckKind::Outcomes:
                out.push_back(resolve_outcome_match(a, b, env.q, ps));
                break;
            case LuckKind::Opportunities: {
                double m_a = env.multipliers.sample(ps);
                double m_b = env.multipliers.sample(ps);
                out.push_back(resolve_opportunity_match(a, m_a, b, m_b, ps));
                break;
            }
            case LuckKind::Headstarts: {
                auto pick = [&](SeedStream& s) {
                    return env.headstart_support[static_cast<std::size_t>(
                        s.uniform_int(0, env.headstart_support.size() - 1))];
                };
                double b_a = pick(ps);
                double b_b = pick(ps);
                out.push_back(resolve_headstart_match(a, b_a, b, b_b, ps));
                break;
            }
        }
    }
    return out;
}

void write_matches_csv(const std::filesystem::path& path, const std::vector<MatchRecord>& matches) {
    CsvTable table;
    table.header = {"match_id", "winner_id", "loser_id", "effort_w", "effort_l",
                    "adv_w",    "adv_l",     "q",        "coin_flip", "merit_flag"};
    std::size_t width = std::max<std::size_t>(4, std::to_string(matches.size()).size());
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const MatchRecord& m = matches[i];
        std::string digits = std::to_string(i + 1);
        std::string id = "m" + std::string(width - std::min(width, digits.size()), '0') + digits;
        table.rows.push_back({id, m.winner_id, m.loser_id, format_double(m.effort_w),
                              format_double(m.effort_l), opt_to_field(m.advantage_w),
                              opt_to_field(m.advantage_l), opt_to_field(m.q_used),
                              m.coin_flip ? (*m.coin_flip ? "true" : "false") : "",
                              m.merit_flag ? "true" : "false"});
    }
    write_csv(path, table);
}

std::vector<MatchRecord> read_matches_csv(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    const std::string p = path.string();
    std::size_t win = table.column("winner_id", p), los = table.column("loser_id", p);
    std::size_t ew = table.column("effort_w", p), el = table.column("effort_l", p);
    std::size_t aw = table.column("adv_w", p), al = table.column("adv_l", p);
    std::size_t qc = table.column("q", p), cf = table.column("coin_flip", p);
    std::size_t mf = table.column("merit_flag", p);
    std::vector<MatchRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto bad = [&](const char* what) {
            return ParseError(p + ": record " + std::to_string(r + 2) + ": bad " + what);
        };
        MatchRecord m;
        m.winner_id = row[win];
        m.loser_id = row[los];
        if (!parse_double(row[ew], m.effort_w)) throw bad("effort_w");
        if (!parse_double(row[el], m.effort_l)) throw bad("effort_l");
        auto opt = [&](std::size_t col, const char* what) -> std::optional<double> {
            if (row[col].empty()) return std::nullopt;
            double v;
            if (!parse_double(row[col], v)) throw bad(what);
            return v;
        };
        m.advantage_w = opt(aw, "adv_w");
        m.advantage_l = opt(al, "adv_l");
        m.q_used = opt(qc, "q");
        if (!row[cf].empty()) {
            if (row[cf] != "true" && row[cf] != "false") throw bad("coin_flip");
            m.coin_flip = row[cf] == "true";
        }
        if (row[mf] != "true" && row[mf] != "false") throw bad("merit_flag");
        m.merit_flag = row[mf] == "true";
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace meritluck
