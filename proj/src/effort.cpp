#include "meritluck/effort.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "meritluck/csvio.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/mathutil.hpp"

namespace meritluck {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ParameterError(std::string(what) + " must be finite");
}

std::string padded_id(char prefix, std::size_t index, std::size_t width) {
    std::string digits = std::to_string(index);
    std::string id(1, prefix);
    if (digits.size() < width) id.append(width - digits.size(), '0');
    id += digits;
    return id;
}

}  // namespace

EffortDistribution EffortDistribution::truncated_rounded_normal(double mean, double sd, double min_effort) {
    require_finite(mean, "mean");
    require_finite(sd, "sd");
    require_finite(min_effort, "min_effort");
    if (sd <= 0.0) throw ParameterError("sd must be positive");
    if (min_effort < 0.0) throw ParameterError("min_effort must be nonnegative");
    if (!near_integer(min_effort)) throw ParameterError("min_effort must be an integer");
    EffortDistribution d;
    d.kind_ = EffortKind::TruncatedRoundedNormal;
    d.mean_ = mean;
    d.sd_ = sd;
    d.min_effort_ = std::round(min_effort);
    d.build_table();
    return d;
}

EffortDistribution EffortDistribution::log_normal(double mu_log, double sigma_log) {
    require_finite(mu_log, "mu_log");
    require_finite(sigma_log, "sigma_log");
    if (sigma_log <= 0.0) throw ParameterError("sigma_log must be positive");
    EffortDistribution d;
    d.kind_ = EffortKind::LogNormal;
    d.mu_log_ = mu_log;
    d.sigma_log_ = sigma_log;
    return d;
}

EffortDistribution EffortDistribution::uniform(double upper) {
    require_finite(upper, "upper");
    if (upper <= 0.0) throw ParameterError("upper must be positive");
    EffortDistribution d;
    d.kind_ = EffortKind::Uniform;
    d.upper_ = upper;
    return d;
}

EffortDistribution EffortDistribution::empirical(std::vector<double> efforts) {
    if (efforts.empty()) throw ParameterError("empirical efforts must be nonempty");
    for (double e : efforts) {
        if (!std::isfinite(e) || e < 0.0) throw ParameterError("empirical efforts must be finite and nonnegative");
    }
    EffortDistribution d;
    d.kind_ = EffortKind::Empirical;
    d.samples_ = std::move(efforts);
    d.build_table();
    return d;
}

void EffortDistribution::build_table() {
    values_.clear();
    probs_.clear();
    if (kind_ == EffortKind::TruncatedRoundedNormal) {
        // Integer cells k cover (k - 1/2, k + 1/2]; mass beyond mean + 12 sd is
        // below 1e-30 and dropped before normalization.
        long long kmin = static_cast<long long>(std::llround(min_effort_));
        long long kmax = static_cast<long long>(std::ceil(mean_ + 12.0 * sd_));
        if (kmax < kmin) kmax = kmin;
        double total = 0.0;
        for (long long k = kmin; k <= kmax; ++k) {
            double lo = (static_cast<double>(k) - 0.5 - mean_) / sd_;
            double hi = (static_cast<double>(k) + 0.5 - mean_) / sd_;
            double p = normal_cdf(hi) - normal_cdf(lo);
            values_.push_back(static_cast<double>(k));
            probs_.push_back(p);
            total += p;
        }
        if (total < 1e-12) throw ParameterError("truncation removes essentially all mass");
        for (double& p : probs_) p /= total;
    } else {
        // Empirical: collapse duplicates into an exact value -> frequency table.
        std::map<double, double> freq;
        for (double e : samples_) freq[e] += 1.0;
        double n = static_cast<double>(samples_.size());
        for (const auto& [v, c] : freq) {
            values_.push_back(v);
            probs_.push_back(c / n);
        }
    }
    table_mean_ = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) table_mean_ += values_[i] * probs_[i];
}

double EffortDistribution::mean() const {
    switch (kind_) {
        case EffortKind::TruncatedRoundedNormal:
        case EffortKind::Empirical:
            return table_mean_;
        case EffortKind::LogNormal:
            return std::exp(mu_log_ + 0.5 * sigma_log_ * sigma_log_);
        case EffortKind::Uniform:
            return 0.5 * upper_;
    }
    throw ContractError("unreachable effort kind");
}

double EffortDistribution::sample(SeedStream& ss) const {
    switch (kind_) {
        case EffortKind::TruncatedRoundedNormal: {
            for (;;) {
                double k = static_cast<double>(std::llround(ss.normal(mean_, sd_)));
                if (k >= min_effort_) return k;
            }
        }
        case EffortKind::LogNormal:
            return std::exp(ss.normal(mu_log_, sigma_log_));
        case EffortKind::Uniform:
            // uniform_pos keeps the draw strictly positive.
            return upper_ * ss.uniform_pos();
        case EffortKind::Empirical:
            return samples_[static_cast<std::size_t>(ss.uniform_int(0, samples_.size() - 1))];
    }
    throw ContractError("unreachable effort kind");
}

double EffortDistribution::ratio_cdf(double t) const {
    if (!(t > 0.0)) throw DomainError("ratio threshold must be positive");
    switch (kind_) {
        case EffortKind::LogNormal: {
            // e2/e1 is lognormal with log-sd sigma * sqrt(2).
            double s = sigma_log_ * 1.4142135623730950488016887242097;
            return normal_cdf(std::log(t) / s);
        }
        case EffortKind::Uniform:
            return t <= 1.0 ? 0.5 * t : 1.0 - 0.5 / t;
        case EffortKind::TruncatedRoundedNormal:
        case EffortKind::Empirical: {
            // Exact double sum over the table, conditioning the denominator
            // draw on e1 > 0.
            std::vector<double> prefix(probs_.size() + 1, 0.0);
            for (std::size_t i = 0; i < probs_.size(); ++i) prefix[i + 1] = prefix[i] + probs_[i];
            double denom = 0.0, total = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                double e1 = values_[i];
                if (e1 <= 0.0) continue;
                denom += probs_[i];
                auto it = std::upper_bound(values_.begin(), values_.end(), t * e1);
                total += probs_[i] * prefix[static_cast<std::size_t>(it - values_.begin())];
            }
            if (denom <= 0.0) throw DomainError("ratio undefined: no positive effort mass");
            return total / denom;
        }
    }
    throw ContractError("unreachable effort kind");
}

double EffortDistribution::ratio_density(double t) const {
    if (!(t > 0.0)) throw DomainError("ratio threshold must be positive");
    switch (kind_) {
        case EffortKind::LogNormal: {
            double s = sigma_log_ * 1.4142135623730950488016887242097;
            return normal_pdf(std::log(t) / s) / (t * s);
        }
        case EffortKind::Uniform:
            return t <= 1.0 ? 0.5 : 0.5 / (t * t);
        case EffortKind::TruncatedRoundedNormal:
        case EffortKind::Empirical:
            throw UnsupportedError("ratio density is undefined for discrete effort distributions");
    }
    throw ContractError("unreachable effort kind");
}

double EffortDistribution::diff_cdf(double d) const {
    if (!std::isfinite(d)) throw DomainError("difference threshold must be finite");
    switch (kind_) {
        case EffortKind::LogNormal: {
            // Integrate P(e2 <= x + d) against the density of e1 in z-space,
            // splitting at the kink where x + d crosses zero.
            auto inner_cdf = [&](double y) {
                return y <= 0.0 ? 0.0 : normal_cdf((std::log(y) - mu_log_) / sigma_log_);
            };
            std::vector<double> breaks{-10.0, 10.0};
            if (d < 0.0) {
                double zstar = (std::log(-d) - mu_log_) / sigma_log_;
                if (zstar > -10.0 && zstar < 10.0) breaks.insert(breaks.begin() + 1, zstar);
            }
            double total = 0.0;
            std::vector<double> nodes, weights;
            for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
                double lo = breaks[b], hi = breaks[b + 1];
                int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / 2.5)));
                for (int p = 0; p < panels; ++p) {
                    double a = lo + (hi - lo) * p / panels;
                    double bb = lo + (hi - lo) * (p + 1) / panels;
                    gauss_legendre(32, a, bb, nodes, weights);
                    for (int i = 0; i < 32; ++i) {
                        double x = std::exp(mu_log_ + sigma_log_ * nodes[i]);
                        total += weights[i] * normal_pdf(nodes[i]) * inner_cdf(x + d);
                    }
                }
            }
            return std::min(1.0, std::max(0.0, total));
        }
        case EffortKind::Uniform: {
            // Difference of two independent uniforms is triangular on [-upper, upper].
            double c = upper_;
            if (d <= -c) return 0.0;
            if (d >= c) return 1.0;
            if (d <= 0.0) return 0.5 * (c + d) * (c + d) / (c * c);
            return 1.0 - 0.5 * (c - d) * (c - d) / (c * c);
        }
        case EffortKind::TruncatedRoundedNormal:
        case EffortKind::Empirical: {
            std::vector<double> prefix(probs_.size() + 1, 0.0);
            for (std::size_t i = 0; i < probs_.size(); ++i) prefix[i + 1] = prefix[i] + probs_[i];
            double total = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                auto it = std::upper_bound(values_.begin(), values_.end(), values_[i] + d);
                total += probs_[i] * prefix[static_cast<std::size_t>(it - values_.begin())];
            }
            return total;
        }
    }
    throw ContractError("unreachable effort kind");
}

const std::vector<double>& EffortDistribution::support() const {
    if (!discrete()) throw UnsupportedError("support table exists only for discrete distributions");
    return values_;
}

const std::vector<double>& EffortDistribution::probabilities() const {
    if (!discrete()) throw UnsupportedError("support table exists only for discrete distributions");
    return probs_;
}

EffortDistribution default_calibration() {
    return EffortDistribution::truncated_rounded_normal(18.0, 5.5, 5.0);
}

WorkerPopulation sample_population(const EffortDistribution& dist, std::size_t n, std::uint64_t seed,
                                   const std::string& label) {
    if (n == 0) throw ParameterError("population size must be positive");
    SeedStream ss(seed);
    WorkerPopulation pop;
    pop.label = label;
    pop.workers.reserve(n);
    std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
    for (std::size_t i = 1; i <= n; ++i) pop.workers.push_back({padded_id('w', i, width), dist.sample(ss)});
    return pop;
}

void write_population_csv(const std::filesystem::path& path, const WorkerPopulation& pop) {
    CsvTable table;
    table.header = {"worker_id", "effort"};
    table.rows.reserve(pop.size());
    for (const auto& w : pop.workers) table.rows.push_back({w.id, format_double(w.effort)});
    write_csv(path, table);
}

WorkerPopulation read_population_csv(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    std::size_t id_col = table.column("worker_id", path.string());
    std::size_t eff_col = table.column("effort", path.string());
    WorkerPopulation pop;
    pop.label = path.stem().string();
    pop.workers.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        double effort;
        if (!parse_double(table.rows[r][eff_col], effort) || !(effort >= 0.0))
            throw ParseError(path.string() + ": record " + std::to_string(r + 2) + ": bad effort");
        pop.workers.push_back({table.rows[r][id_col], effort});
    }
    return pop;
}

}  // namespace meritluck
