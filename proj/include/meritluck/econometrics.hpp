#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "meritluck/experiment.hpp"
#include "meritluck/meritprob.hpp"

namespace meritluck {

struct RegressionFit {
    std::vector<std::string> names;
    std::vector<double> coefficients;
    std::vector<std::vector<double>> vcov;  // cluster-robust (CR1), symmetric PSD
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
    double r_squared = 0.0;

    double se(std::size_t i) const;
    // Two-sided p-value from a t statistic with n_clusters - 1 degrees of freedom.
    double p_value(std::size_t i) const;
};

// OLS with cluster-robust covariance: sandwich over per-cluster score sums,
// scaled by the CR1 factor G/(G-1) * (N-1)/(N-K). X is row-major.
RegressionFit ols_clustered(const std::vector<double>& y, const std::vector<std::vector<double>>& X,
                            const std::vector<std::string>& cluster_ids,
                            const std::vector<std::string>& names);

using RecordFilter = std::function<bool(const DecisionRecord&)>;

// r regressed on (1 - pi_true) with intercept, clustered by spectator.
RegressionFit elasticity_fit(const std::vector<DecisionRecord>& dataset,
                             const RecordFilter& filter = nullptr);

struct BinEstimate {
    std::size_t bin = 0;     // 1-based design bin index
    double low = 0.0;        // pi bounds of the bin, as fractions
    double high = 0.0;
    double estimate = 0.0;   // NaN when the bin is empty
    double se = 0.0;
    std::size_t n = 0;
};

// Per-bin mean r via a full dummy regression (no intercept), clustered by
// spectator. Bins with no records report n = 0 and NaN estimates.
std::vector<BinEstimate> bin_means(const std::vector<DecisionRecord>& dataset, const PiBinning& binning);

// Per-bin difference in mean r (first minus second dataset) from one interacted
// regression, clustered by spectator within dataset. Bins populated in only one
// dataset report NaN.
std::vector<BinEstimate> redistribution_gap(const std::vector<DecisionRecord>& ds_first,
                                            const std::vector<DecisionRecord>& ds_second,
                                            const PiBinning& binning);

struct ExtensiveMargin {
    double share = 0.0;  // fraction of spectators with r = 0 in all 12 rounds
    double se = 0.0;     // binomial
    std::size_t n_spectators = 0;
    std::size_t n_never = 0;
};

ExtensiveMargin extensive_margin(const std::vector<DecisionRecord>& dataset);

struct IntensiveMargin {
    RegressionFit fit;   // elasticity fit excluding all-zero spectators
    double mean_r = 0.0; // mean decision among the kept spectators
    std::size_t n_spectators_kept = 0;
};

IntensiveMargin intensive_margin(const std::vector<DecisionRecord>& dataset);

// Residuals of r on (1 - pi_true), plus the unconditional mean of r; aligned
// with the dataset order.
std::vector<double> residualize_on_pi(const std::vector<DecisionRecord>& dataset);

struct GapDecomposition {
    double total_gap = 0.0;                    // mean r difference, first minus second
    double accounted_by_effort_gap = 0.0;      // elasticity * mean gap difference
    double elasticity_per_encryption = 0.0;    // slope of r on (effort_w - effort_l)
    double mean_effort_gap_difference = 0.0;   // in encryptions
};

// Decomposes the redistribution gap into the part attributable to differing
// winner-loser effort gaps. The pooled elasticity is estimated unless a fixed
// value is supplied.
GapDecomposition effort_gap_accounting(const std::vector<DecisionRecord>& ds_first,
                                       const std::vector<DecisionRecord>& ds_second,
                                       std::optional<double> elasticity_override = std::nullopt);

std::string fit_json(const RegressionFit& fit);
std::string decomposition_json(const GapDecomposition& decomposition);

// CSV `bin,low,high,estimate,se,n`.
void write_bin_table_csv(const std::filesystem::path& path, const std::vector<BinEstimate>& bins);

}  // namespace meritluck
