#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "meritluck/effort.hpp"
#include "meritluck/random.hpp"

namespace meritluck {

enum class LuckKind { Outcomes, Opportunities, Headstarts };
enum class Timing { ExAnte, ExPost };
enum class Disclosure { Before, After };

std::string to_string(LuckKind kind);
std::string to_string(Timing timing);
LuckKind luck_kind_from_string(const std::string& s);
Timing timing_from_string(const std::string& s);

// Mixture of two point masses and a uniform component, rounded to the tenths
// grid. Defaults: 1.0 and 4.0 with probability 0.05 each, uniform(1,4) with
// probability 0.90.
struct MultiplierModel {
    double low = 1.0;
    double high = 4.0;
    double p_low = 0.05;
    double p_high = 0.05;

    void validate() const;
    int low_tenths() const;
    int high_tenths() const;

    // One multiplier draw, on the tenths grid.
    double sample(SeedStream& ss) const;
    int sample_tenths(SeedStream& ss) const;

    // Exact cell probabilities on the tenths grid. Interior rounding cells are
    // half-open of width 0.1; the endpoint cells have width 0.05 plus the point
    // mass, so the grid masses sum to 1 exactly up to float rounding.
    std::vector<std::pair<int, double>> pmf_tenths() const;
};

struct LuckEnvironment {
    LuckKind kind = LuckKind::Outcomes;
    double q = 0.0;                        // outcome luck
    MultiplierModel multipliers{};         // opportunity luck
    Timing timing = Timing::ExAnte;        // metadata label, no mechanical effect
    std::vector<double> headstart_support; // headstart luck
    Disclosure disclosure = Disclosure::Before;  // metadata label

    static LuckEnvironment outcomes(double q);
    static LuckEnvironment opportunities(MultiplierModel model = {}, Timing timing = Timing::ExAnte);
    static LuckEnvironment headstarts(std::vector<double> support);

    void validate() const;
};

struct MatchRecord {
    std::string winner_id;
    std::string loser_id;
    double effort_w = 0.0;
    double effort_l = 0.0;
    std::optional<double> advantage_w;  // multiplier or headstart
    std::optional<double> advantage_l;
    std::optional<double> q_used;       // outcome luck only
    std::optional<bool> coin_flip;      // outcome luck only: a coin decided the winner
    bool merit_flag = false;            // effort_w >= effort_l
    std::optional<double> pi_true;      // attached by downstream design generation
};

// Winner is a fair coin with probability q, otherwise the higher-effort worker
// (effort tie resolved by a fair coin).
MatchRecord resolve_outcome_match(const Worker& a, const Worker& b, double q, SeedStream& ss);

// Winner has the higher score m * e; exact score tie resolved by a fair coin.
MatchRecord resolve_opportunity_match(const Worker& a, double m_a, const Worker& b, double m_b,
                                      SeedStream& ss);

// Winner has the higher score e + b; exact score tie resolved by a fair coin.
MatchRecord resolve_headstart_match(const Worker& a, double b_a, const Worker& b, double b_b,
                                    SeedStream& ss);

// Random disjoint pairing of the population (odd worker dropped), each pair
// resolved under the environment with advantages sampled independently per
// worker. Output depends only on (population, env, seed).
std::vector<MatchRecord> pair_all(const WorkerPopulation& pop, const LuckEnvironment& env,
                                  std::uint64_t seed);

void write_matches_csv(const std::filesystem::path& path, const std::vector<MatchRecord>& matches);
std::vector<MatchRecord> read_matches_csv(const std::filesystem::path& path);

// -1, 0, +1 comparison of m_a * e_a vs m_b * e_b. Multipliers within 1e-9 of
// the tenths grid are scaled to exact integers first so grid score ties are
// detected exactly.
int compare_scores(double e_a, double m_a, double e_b, double m_b);

}  // namespace meritluck
