#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "meritluck/effort.hpp"
#include "meritluck/environments.hpp"
#include "meritluck/random.hpp"

namespace meritluck {

// Merit convention for the enumeration oracle: the winner counts as the top
// performer when effort_w >= effort_l (weak, the default) or > (strict).
enum class MeritConvention { WeaklyMore, StrictlyMore };

enum class AdvantageKind { Multiplicative, Additive };

std::string to_string(AdvantageKind kind);
AdvantageKind advantage_kind_from_string(const std::string& s);

struct PiCurvePoint {
    double advantage = 1.0;      // relative multiplier m >= 1 or headstart b >= 0
    double pi_hat = 1.0;
    std::uint64_t n_pairings = 0;
};

struct PiCurve {
    AdvantageKind kind = AdvantageKind::Multiplicative;
    std::vector<PiCurvePoint> points;  // sorted ascending by advantage

    // Point whose pi_hat is nearest to pi_target; exact ties resolve to the
    // smaller advantage.
    const PiCurvePoint& nearest_pi(double pi_target) const;
};

struct PiEstimate {
    double pi = 1.0;
    std::uint64_t n_pairings = 0;
};

// Exact inverses of each other on the percent grid: pi = 1 - q/2, q = 2(1 - pi).
double pi_from_q(double q);
double q_from_pi(double pi);

// Closed-form merit probability 0.5 / ratio_cdf(m) for continuous effort
// models; 1 for m <= 1.
double pi_analytic(const EffortDistribution& dist, double m);

// All-pairings enumeration: both orderings of every unordered pair, advantage
// m assigned to each worker in turn, winner by score with ties resolving to
// the advantaged side. pi is the merit fraction among observations where the
// advantaged side wins (the configuration behind every displayed match), so it
// estimates pi_analytic; n_pairings is the full enumeration size n*(n-1).
PiEstimate pi_empirical(const WorkerPopulation& pop, double m,
                        MeritConvention convention = MeritConvention::WeaklyMore);

// Same enumeration with additive advantage b.
PiEstimate pi_headstart(const WorkerPopulation& pop, double b,
                        MeritConvention convention = MeritConvention::WeaklyMore);

// Pointwise enumeration over a sorted grid. Grid points are evaluated in
// parallel (capped by MERITLUCK_THREADS); per-point integer tallies make the
// result independent of the thread count.
PiCurve pi_curve(const WorkerPopulation& pop, AdvantageKind kind, const std::vector<double>& grid,
                 MeritConvention convention = MeritConvention::WeaklyMore);

// Closed-form curve for continuous effort models, used by curvature checks.
PiCurve pi_curve_analytic(const EffortDistribution& dist, const std::vector<double>& grid);

struct MultiplierInversion {
    double m_high = 1.0;
    double m_low = 1.0;
    double grid_ratio = 1.0;  // curve advantage chosen for the target
    double pi = 1.0;          // curve value at grid_ratio
};

// Picks the curve ratio nearest pi_target (tie: smaller ratio), samples m_low
// uniformly from the admissible tenths grid with m_low * ratio <= model.high,
// and rounds m_low * ratio back to the tenths grid for m_high.
MultiplierInversion invert_pi_to_multipliers(double pi_target, const PiCurve& curve,
                                             const MultiplierModel& model, SeedStream& ss);

struct PiBin {
    int lo_percent = 50;
    int hi_percent = 50;
};

struct PiBinning {
    std::vector<PiBin> bins;
};

// The 12 design bins on the percent grid: {50}, {51-54}, {55-59}, ..., {95-99}, {100}.
PiBinning standard_bins();

// Zero-based bin index for a pi value; rounds to the nearest percent first.
std::size_t assign_bin(const PiBinning& binning, double pi);

// One uniform percent-grid draw per bin; singleton bins yield 0.50 and 1.00.
std::vector<double> draw_pi_per_bin(const PiBinning& binning, SeedStream& ss);

struct CurvatureReport {
    double tol = 1e-3;
    std::vector<double> first_diffs;   // pi_{i+1} - pi_i, expected <= tol
    std::vector<double> second_diffs;  // undivided second differences, expected >= -tol
    std::vector<bool> first_ok;
    std::vector<bool> second_ok;
    bool pass = false;
};

// Monotonicity and convexity of a curve via undivided differences on the
// supplied grid.
CurvatureReport check_convexity(const PiCurve& curve, double tol = 1e-3);

struct LogConcavityPoint {
    double m = 0.0;
    double cdf = 0.0;
    double density = 0.0;
    double density_slope = 0.0;  // central finite difference, relative step 1e-3
    double margin = 0.0;         // 2 f^2 - f' F
    bool ok = false;
};

struct LogConcavityReport {
    double tol = 1e-6;
    std::vector<LogConcavityPoint> points;
    double min_margin = 0.0;
    bool pass = false;
};

// Sufficient condition for convexity of the merit curve: 2 f(m)^2 - f'(m) F(m)
// >= -tol pointwise, where F/f are the ratio CDF and density.
LogConcavityReport check_logconcavity(const EffortDistribution& dist, const std::vector<double>& grid,
                                      double tol = 1e-6);

// Same check against caller-supplied CDF and density functions.
LogConcavityReport check_logconcavity(const std::function<double(double)>& cdf,
                                      const std::function<double(double)>& density,
                                      const std::vector<double>& grid, double tol = 1e-6);

void write_pi_curve_csv(const std::filesystem::path& path, const PiCurve& curve);
PiCurve read_pi_curve_csv(const std::filesystem::path& path);

std::string curvature_report_json(const CurvatureReport& report);
std::string logconcavity_report_json(const LogConcavityReport& report);

// Number of worker threads to use: MERITLUCK_THREADS if set to a positive
// integer, otherwise the hardware concurrency (at least 1).
std::size_t thread_cap();

}  // namespace meritluck
