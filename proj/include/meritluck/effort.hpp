#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "meritluck/random.hpp"

namespace meritluck {

enum class EffortKind { TruncatedRoundedNormal, LogNormal, Uniform, Empirical };

// Distribution of per-worker effort counts. Two families are discrete
// (TruncatedRoundedNormal, Empirical) and carry an exact probability table;
// two are continuous (LogNormal, Uniform on (0, upper)).
class EffortDistribution {
   public:
    // Normal(mean, sd) rounded to the nearest integer, truncated below at
    // min_effort (an integer floor on the rounded value).
    static EffortDistribution truncated_rounded_normal(double mean, double sd, double min_effort);
    static EffortDistribution log_normal(double mu_log, double sigma_log);
    static EffortDistribution uniform(double upper);
    static EffortDistribution empirical(std::vector<double> efforts);

    EffortKind kind() const { return kind_; }
    bool discrete() const { return kind_ == EffortKind::TruncatedRoundedNormal || kind_ == EffortKind::Empirical; }

    double mean() const;
    double sample(SeedStream& ss) const;

    // P(e2/e1 <= t) for independent draws e1, e2. Discrete families condition
    // on e1 > 0; t must be positive.
    double ratio_cdf(double t) const;

    // Density of the effort ratio at t; continuous families only.
    double ratio_density(double t) const;

    // P(e2 - e1 <= d) for independent draws, no conditioning.
    double diff_cdf(double d) const;

    // Exact probability table of a discrete family, sorted by value.
    const std::vector<double>& support() const;
    const std::vector<double>& probabilities() const;

    double param_mean() const { return mean_; }
    double param_sd() const { return sd_; }
    double param_min_effort() const { return min_effort_; }
    double param_mu_log() const { return mu_log_; }
    double param_sigma_log() const { return sigma_log_; }
    double param_upper() const { return upper_; }
    const std::vector<double>& param_samples() const { return samples_; }

   private:
    EffortDistribution() = default;
    void build_table();

    EffortKind kind_ = EffortKind::Uniform;
    double mean_ = 0.0, sd_ = 0.0, min_effort_ = 0.0;
    double mu_log_ = 0.0, sigma_log_ = 0.0;
    double upper_ = 0.0;
    std::vector<double> samples_;

    std::vector<double> values_;  // discrete table
    std::vector<double> probs_;
    double table_mean_ = 0.0;
};

// The default synthetic effort model used across the toolkit.
EffortDistribution default_calibration();

struct Worker {
    std::string id;
    double effort = 0.0;
};

struct WorkerPopulation {
    std::string label;
    std::vector<Worker> workers;

    std::size_t size() const { return workers.size(); }
};

// Draws n workers with ids w0001, w0002, ... and efforts from dist.
WorkerPopulation sample_population(const EffortDistribution& dist, std::size_t n, std::uint64_t seed,
                                   const std::string& label = "synthetic");

void write_population_csv(const std::filesystem::path& path, const WorkerPopulation& pop);
WorkerPopulation read_population_csv(const std::filesystem::path& path);

}  // namespace meritluck
