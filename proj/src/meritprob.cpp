#include "meritluck/meritprob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "meritluck/csvio.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/mathutil.hpp"

namespace meritluck {

namespace {

// Snaps x to the 1/denom grid when within 1e-9, so the percent-grid mappings
// below are exact arithmetic inverses.
double snap_to_fraction(double x, double denom) {
    double scaled = x * denom;
    double k = std::round(scaled);
    if (std::abs(scaled - k) < 1e-9) return k / denom;
    return x;
}

bool on_tenths(double x, long long& out) {
    double scaled = x * 10.0;
    out = std::llround(scaled);
    return std::abs(scaled - static_cast<double>(out)) < 1e-9;
}

}  // namespace

std::string to_string(AdvantageKind kind) {
    return kind == AdvantageKind::Multiplicative ? "multiplicative" : "additive";
}

AdvantageKind advantage_kind_from_string(const std::string& s) {
    if (s == "multiplicative") return AdvantageKind::Multiplicative;
    if (s == "additive") return AdvantageKind::Additive;
    throw ParseError("unknown advantage kind '" + s + "'");
}

const PiCurvePoint& PiCurve::nearest_pi(double pi_target) const {
    if (points.empty()) throw ContractError("curve has no points");
    const PiCurvePoint* best = &points.front();
    double best_d = std::abs(best->pi_hat - pi_target);
    for (const auto& p : points) {
        double d = std::abs(p.pi_hat - pi_target);
        // Strict improvement keeps the earlier (smaller-advantage) point on ties.
        if (d < best_d) {
            best = &p;
            best_d = d;
        }
    }
    return *best;
}

double pi_from_q(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("q must lie in [0, 1]");
    double snapped = snap_to_fraction(q, 200.0);
    if (snapped != q) return 1.0 - q / 2.0;
    // q = k/200 exactly; return (400 - k)/400 so the round trip is exact.
    double k = std::round(q * 200.0);
    return (400.0 - k) / 400.0;
}

double q_from_pi(double pi) {
    if (!(pi >= 0.5 && pi <= 1.0)) throw DomainError("pi must lie in [0.5, 1]");
    double snapped = snap_to_fraction(pi, 400.0);
    if (snapped != pi) return 2.0 * (1.0 - pi);
    double k = std::round(pi * 400.0);
    return (400.0 - k) / 200.0;
}

double pi_analytic(const EffortDistribution& dist, double m) {
    if (!(m > 0.0)) throw DomainError("relative multiplier must be positive");
    if (dist.discrete())
        throw UnsupportedError("pi_analytic requires a continuous effort distribution; use pi_empirical");
    if (m <= 1.0) return 1.0;
    double pi = 0.5 / dist.ratio_cdf(m);
    return std::min(pi, 1.0);
}

namespace {

// Shared enumeration core. The estimate conditions on the advantaged side
// winning, because that is the configuration a viewer of an advantaged winner
// faces: the numerator counts advantaged wins where the winner also exerted
// weakly (or strictly) more effort, the denominator counts advantaged wins.
// Score ties resolve to the advantaged side, so on a continuous population the
// ratio converges to the closed form 0.5 / ratio_cdf(m). n_pairings reports
// the full enumeration size n*(n-1) regardless. Deterministic, no RNG.
PiEstimate enumerate_pairs(const std::vector<double>& efforts, bool multiplicative, double advantage,
                           MeritConvention convention) {
    std::size_t n = efforts.size();
    bool strict = convention == MeritConvention::StrictlyMore;
    auto merit = [&](double ew, double el) { return strict ? ew > el : ew >= el; };

    long long adv_tenths = 0;
    bool tenths = multiplicative && on_tenths(advantage, adv_tenths);

    std::uint64_t adv_wins = 0;
    std::uint64_t merit_wins = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double ei = efforts[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            double ej = efforts[j];
            // Observation 1: worker i holds the advantage; observation 2: worker j.
            for (int obs = 0; obs < 2; ++obs) {
                double ea = obs == 0 ? ei : ej;  // advantaged
                double eb = obs == 0 ? ej : ei;
                double sa, sb;
                if (multiplicative) {
                    if (tenths) {
                        // Integer-tenths scaling keeps grid scores exact.
                        sa = static_cast<double>(adv_tenths) * ea;
                        sb = 10.0 * eb;
                    } else {
                        sa = advantage * ea;
                        sb = eb;
                    }
                } else {
                    sa = ea + advantage;
                    sb = eb;
                }
                if (sa >= sb) {
                    ++adv_wins;
                    if (merit(ea, eb)) ++merit_wins;
                }
            }
        }
    }
    std::uint64_t n_obs = static_cast<std::uint64_t>(n) * (n - 1);
    // The ordering that gives the advantage to the weakly higher effort always
    // lands in the denominator, so adv_wins >= C(n, 2) > 0.
    return {static_cast<double>(merit_wins) / static_cast<double>(adv_wins), n_obs};
}

std::vector<double> efforts_of(const WorkerPopulation& pop) {
    std::vector<double> efforts;
    efforts.reserve(pop.size());
    for (const auto& w : pop.workers) efforts.push_back(w.effort);
    return efforts;
}

}  // namespace

PiEstimate pi_empirical(const WorkerPopulation& pop, double m, MeritConvention convention) {
    if (pop.size() < 2) throw ParameterError("population must contain at least 2 workers");
    if (!(m >= 1.0)) throw DomainError("relative multiplier must be >= 1 (normalize first)");
    return enumerate_pairs(efforts_of(pop), true, m, convention);
}

PiEstimate pi_headstart(const WorkerPopulation& pop, double b, MeritConvention convention) {
    if (pop.size() < 2) throw ParameterError("population must contain at least 2 workers");
    if (!(b >= 0.0)) throw DomainError("headstart must be nonnegative");
    return enumerate_pairs(efforts_of(pop), false, b, convention);
}

std::size_t thread_cap() {
    if (const char* env = std::getenv("MERITLUCK_THREADS")) {
        std::uint64_t n;
        if (parse_u64(env, n) && n >= 1) return static_cast<std::size_t>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

PiCurve pi_curve(const WorkerPopulation& pop, AdvantageKind kind, const std::vector<double>& grid,
                 MeritConvention convention) {
    if (grid.empty()) throw DomainError("grid must be nonempty");
    if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("grid must be sorted ascending");
    if (pop.size() < 2) throw ParameterError("population must contain at least 2 workers");
    bool mult = kind == AdvantageKind::Multiplicative;
    for (double g : grid) {
        if (mult && !(g >= 1.0)) throw DomainError("multiplicative grid values must be >= 1");
        if (!mult && !(g >= 0.0)) throw DomainError("additive grid values must be nonnegative");
    }
    std::vector<double> efforts = efforts_of(pop);
    PiCurve curve;
    curve.kind = kind;
    curve.points.resize(grid.size());

    std::size_t n_threads = std::min(thread_cap(), grid.size());
    auto work = [&](std::size_t t) {
        for (std::size_t i = t; i < grid.size(); i += n_threads) {
            PiEstimate est = enumerate_pairs(efforts, mult, grid[i], convention);
            curve.points[i] = {grid[i], est.pi, est.n_pairings};
        }
    };
    if (n_threads <= 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(work, t);
        for (auto& th : threads) th.join();
    }
    return curve;
}

PiCurve pi_curve_analytic(const EffortDistribution& dist, const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("grid must be nonempty");
    if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("grid must be sorted ascending");
    PiCurve curve;
    curve.kind = AdvantageKind::Multiplicative;
    curve.points.reserve(grid.size());
    for (double m : grid) curve.points.push_back({m, pi_analytic(dist, m), 0});
    return curve;
}

MultiplierInversion invert_pi_to_multipliers(double pi_target, const PiCurve& curve,
                                             const MultiplierModel& model, SeedStream& ss) {
    if (!(pi_target >= 0.5 && pi_target <= 1.0)) throw DomainError("pi target must lie in [0.5, 1]");
    if (curve.kind != AdvantageKind::Multiplicative)
        throw ContractError("inversion requires a multiplicative curve");
    model.validate();
    const PiCurvePoint& point = curve.nearest_pi(pi_target);
    long long ratio_tenths;
    if (!on_tenths(point.advantage, ratio_tenths))
        throw ContractError("inversion requires curve advantages on the tenths grid");

    // Admissible m_low values: tenths grid levels whose scaled-up partner stays
    // within the model's range.
    long long lo = model.low_tenths(), hi = model.high_tenths();
    std::vector<long long> lows;
    for (long long lt = lo; lt <= hi; ++lt) {
        if (lt * ratio_tenths <= hi * 10) lows.push_back(lt);
    }
    if (lows.empty())
        throw DesignError("no admissible multiplier pair for pi target " + format_double(pi_target));
    long long lt = lows[static_cast<std::size_t>(ss.uniform_int(0, lows.size() - 1))];
    long long ht = (lt * ratio_tenths + 5) / 10;  // round half up back to the grid
    MultiplierInversion inv;
    inv.m_low = static_cast<double>(lt) / 10.0;
    inv.m_high = static_cast<double>(ht) / 10.0;
    inv.grid_ratio = static_cast<double>(ratio_tenths) / 10.0;
    inv.pi = point.pi_hat;
    return inv;
}

PiBinning standard_bins() {
    PiBinning binning;
    binning.bins = {{50, 50}, {51, 54}, {55, 59}, {60, 64}, {65, 69},  {70, 74},
                    {75, 79}, {80, 84}, {85, 89}, {90, 94}, {95, 99}, {100, 100}};
    return binning;
}

std::size_t assign_bin(const PiBinning& binning, double pi) {
    long long pct = std::llround(pi * 100.0);
    for (std::size_t i = 0; i < binning.bins.size(); ++i) {
        if (pct >= binning.bins[i].lo_percent && pct <= binning.bins[i].hi_percent) return i;
    }
    throw DomainError("pi value " + format_double(pi) + " maps to no bin");
}

std::vector<double> draw_pi_per_bin(const PiBinning& binning, SeedStream& ss) {
    std::vector<double> out;
    out.reserve(binning.bins.size());
    for (const auto& bin : binning.bins) {
        std::uint64_t pct = ss.uniform_int(static_cast<std::uint64_t>(bin.lo_percent),
                                           static_cast<std::uint64_t>(bin.hi_percent));
        out.push_back(static_cast<double>(pct) / 100.0);
    }
    return out;
}

CurvatureReport check_convexity(const PiCurve& curve, double tol) {
    if (curve.points.size() < 3) throw DomainError("convexity check needs at least 3 points");
    CurvatureReport report;
    report.tol = tol;
    const auto& pts = curve.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double d = pts[i + 1].pi_hat - pts[i].pi_hat;
        report.first_diffs.push_back(d);
        report.first_ok.push_back(d <= tol);
    }
    for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
        double d2 = pts[i + 2].pi_hat - 2.0 * pts[i + 1].pi_hat + pts[i].pi_hat;
        report.second_diffs.push_back(d2);
        report.second_ok.push_back(d2 >= -tol);
    }
    report.pass = std::all_of(report.first_ok.begin(), report.first_ok.end(), [](bool b) { return b; }) &&
                  std::all_of(report.second_ok.begin(), report.second_ok.end(), [](bool b) { return b; });
    return report;
}

LogConcavityReport check_logconcavity(const std::function<double(double)>& cdf,
                                      const std::function<double(double)>& density,
                                      const std::vector<double>& grid, double tol) {
    if (grid.empty()) throw DomainError("grid must be nonempty");
    LogConcavityReport report;
    report.tol = tol;
    report.points.reserve(grid.size());
    for (double m : grid) {
        if (!(m > 0.0)) throw DomainError("grid values must be positive");
        LogConcavityPoint p;
        p.m = m;
        p.cdf = cdf(m);
        p.density = density(m);
        double h = 1e-3 * m;  // relative step
        p.density_slope = (density(m + h) - density(m - h)) / (2.0 * h);
        p.margin = 2.0 * p.density * p.density - p.density_slope * p.cdf;
        p.ok = p.margin >= -tol;
        report.points.push_back(p);
    }
    report.min_margin = report.points.front().margin;
    for (const auto& p : report.points) report.min_margin = std::min(report.min_margin, p.margin);
    report.pass = std::all_of(report.points.begin(), report.points.end(),
                              [](const LogConcavityPoint& p) { return p.ok; });
    return report;
}

LogConcavityReport check_logconcavity(const EffortDistribution& dist, const std::vector<double>& grid,
                                      double tol) {
    if (dist.discrete())
        throw UnsupportedError("log-concavity check requires a continuous effort distribution");
    return check_logconcavity([&dist](double t) { return dist.ratio_cdf(t); },
                              [&dist](double t) { return dist.ratio_density(t); }, grid, tol);
}

void write_pi_curve_csv(const std::filesystem::path& path, const PiCurve& curve) {
    CsvTable table;
    table.header = {"advantage", "pi_hat", "n_pairings", "kind"};
    for (const auto& p : curve.points) {
        table.rows.push_back({format_double(p.advantage), format_double(p.pi_hat),
                              std::to_string(p.n_pairings), to_string(curve.kind)});
    }
    write_csv(path, table);
}

PiCurve read_pi_curve_csv(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    const std::string p = path.string();
    std::size_t adv = table.column("advantage", p), pi = table.column("pi_hat", p);
    std::size_t np = table.column("n_pairings", p), kd = table.column("kind", p);
    PiCurve curve;
    if (table.rows.empty()) throw ParseError(p + ": curve has no points");
    curve.kind = advantage_kind_from_string(table.rows.front()[kd]);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        PiCurvePoint point;
        std::uint64_t n;
        if (!parse_double(table.rows[r][adv], point.advantage) ||
            !parse_double(table.rows[r][pi], point.pi_hat) || !parse_u64(table.rows[r][np], n))
            throw ParseError(p + ": record " + std::to_string(r + 2) + ": bad curve point");
        point.n_pairings = n;
        curve.points.push_back(point);
    }
    return curve;
}

std::string curvature_report_json(const CurvatureReport& report) {
    nlohmann::json j;
    j["tol"] = report.tol;
    j["pass"] = report.pass;
    j["first_diffs"] = report.first_diffs;
    j["second_diffs"] = report.second_diffs;
    j["first_ok"] = report.first_ok;
    j["second_ok"] = report.second_ok;
    return j.dump(2) + "\n";
}

std::string logconcavity_report_json(const LogConcavityReport& report) {
    nlohmann::json j;
    j["tol"] = report.tol;
    j["pass"] = report.pass;
    j["min_margin"] = report.min_margin;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : report.points) {
        pts.push_back({{"m", p.m},
                       {"cdf", p.cdf},
                       {"density", p.density},
                       {"density_slope", p.density_slope},
                       {"margin", p.margin},
                       {"ok", p.ok}});
    }
    j["points"] = pts;
    return j.dump(2) + "\n";
}

}  // namespace meritluck
