#include "meritluck/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "meritluck/csvio.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/mathutil.hpp"

namespace meritluck {

double RegressionFit::se(std::size_t i) const { return std::sqrt(vcov[i][i]); }

double RegressionFit::p_value(std::size_t i) const {
    double s = se(i);
    if (!(s > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return student_t_two_sided_p(coefficients[i] / s, static_cast<double>(n_clusters) - 1.0);
}

RegressionFit ols_clustered(const std::vector<double>& y, const std::vector<std::vector<double>>& X,
                            const std::vector<std::string>& cluster_ids,
                            const std::vector<std::string>& names) {
    std::size_t n = y.size();
    if (n == 0) throw EstimationError("empty estimation sample");
    if (X.size() != n || cluster_ids.size() != n)
        throw ContractError("y, X and cluster ids must have equal length");
    std::size_t k = X.front().size();
    if (k == 0 || names.size() != k) throw ContractError("design matrix and names disagree on width");
    for (const auto& row : X)
        if (row.size() != k) throw ContractError("ragged design matrix");
    if (n <= k) throw EstimationError("degrees of freedom exhausted: n_obs <= n_params");

    Eigen::MatrixXd mx(n, k);
    Eigen::VectorXd vy(n);
    for (std::size_t i = 0; i < n; ++i) {
        vy(static_cast<Eigen::Index>(i)) = y[i];
        for (std::size_t j = 0; j < k; ++j) mx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = X[i][j];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mx);
    qr.setThreshold(1e-10);  // relative to the largest pivot
    if (static_cast<std::size_t>(qr.rank()) < k) throw EstimationError("singular design matrix");
    Eigen::VectorXd beta = qr.solve(vy);
    Eigen::VectorXd resid = vy - mx * beta;

    // Per-cluster score sums s_g = X_g' u_g.
    std::map<std::string, Eigen::VectorXd> scores;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, inserted] = scores.try_emplace(cluster_ids[i], Eigen::VectorXd::Zero(k));
        it->second += mx.row(static_cast<Eigen::Index>(i)).transpose() * resid(static_cast<Eigen::Index>(i));
    }
    std::size_t g = scores.size();
    if (g < 2) throw EstimationError("clustered covariance needs at least 2 clusters");

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [id, s] : scores) meat += s * s.transpose();

    Eigen::MatrixXd xtx = mx.transpose() * mx;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    Eigen::MatrixXd bread_meat = ldlt.solve(meat);                    // (X'X)^-1 meat
    Eigen::MatrixXd v = ldlt.solve(bread_meat.transpose());           // (X'X)^-1 meat (X'X)^-1
    double dn = static_cast<double>(n), dk = static_cast<double>(k), dg = static_cast<double>(g);
    v *= dg / (dg - 1.0) * (dn - 1.0) / (dn - dk);
    v = 0.5 * (v + v.transpose()).eval();  // enforce symmetry against solve round-off

    RegressionFit fit;
    fit.names = names;
    fit.coefficients.assign(beta.data(), beta.data() + k);
    fit.vcov.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            fit.vcov[i][j] = v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    fit.n_obs = n;
    fit.n_clusters = g;
    double mean_y = vy.mean();
    double sst = (vy.array() - mean_y).square().sum();
    double ssr = resid.squaredNorm();
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : std::numeric_limits<double>::quiet_NaN();
    return fit;
}

RegressionFit elasticity_fit(const std::vector<DecisionRecord>& dataset, const RecordFilter& filter) {
    std::vector<double> y;
    std::vector<std::vector<double>> x;
    std::vector<std::string> clusters;
    for (const auto& rec : dataset) {
        if (filter && !filter(rec)) continue;
        y.push_back(rec.r);
        x.push_back({1.0, 1.0 - rec.pi_true});
        clusters.push_back(rec.spectator_id);
    }
    if (y.empty()) throw EstimationError("no records left after filtering");
    return ols_clustered(y, x, clusters, {"intercept", "one_minus_pi"});
}

namespace {

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

std::vector<std::size_t> bins_of(const std::vector<DecisionRecord>& dataset, const PiBinning& binning) {
    std::vector<std::size_t> out;
    out.reserve(dataset.size());
    for (const auto& rec : dataset) out.push_back(assign_bin(binning, rec.pi_true));
    return out;
}

}  // namespace

std::vector<BinEstimate> bin_means(const std::vector<DecisionRecord>& dataset, const PiBinning& binning) {
    if (dataset.empty()) throw EstimationError("empty dataset");
    std::vector<std::size_t> bin_of = bins_of(dataset, binning);
    std::size_t n_bins = binning.bins.size();
    std::vector<std::size_t> counts(n_bins, 0);
    for (std::size_t b : bin_of) ++counts[b];

    // Dummy columns only for populated bins keeps the design full rank.
    std::vector<std::size_t> col_of(n_bins, SIZE_MAX);
    std::vector<std::string> names;
    std::size_t n_cols = 0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (counts[b] > 0) {
            col_of[b] = n_cols++;
            names.push_back("bin" + std::to_string(b + 1));
        }
    }
    std::vector<double> y;
    std::vector<std::vector<double>> x;
    std::vector<std::string> clusters;
    y.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        y.push_back(dataset[i].r);
        std::vector<double> row(n_cols, 0.0);
        row[col_of[bin_of[i]]] = 1.0;
        x.push_back(std::move(row));
        clusters.push_back(dataset[i].spectator_id);
    }
    RegressionFit fit = ols_clustered(y, x, clusters, names);

    std::vector<BinEstimate> out;
    out.reserve(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        BinEstimate est;
        est.bin = b + 1;
        est.low = binning.bins[b].lo_percent / 100.0;
        est.high = binning.bins[b].hi_percent / 100.0;
        est.n = counts[b];
        if (counts[b] > 0) {
            est.estimate = fit.coefficients[col_of[b]];
            est.se = fit.se(col_of[b]);
        } else {
            est.estimate = nan_value();
            est.se = nan_value();
        }
        out.push_back(est);
    }
    return out;
}

std::vector<BinEstimate> redistribution_gap(const std::vector<DecisionRecord>& ds_first,
                                            const std::vector<DecisionRecord>& ds_second,
                                            const PiBinning& binning) {
    if (ds_first.empty() || ds_second.empty()) throw EstimationError("both datasets must be nonempty");
    std::vector<std::size_t> bins_first = bins_of(ds_first, binning);
    std::vector<std::size_t> bins_second = bins_of(ds_second, binning);
    std::size_t n_bins = binning.bins.size();
    std::vector<std::size_t> count_first(n_bins, 0), count_second(n_bins, 0);
    for (std::size_t b : bins_first) ++count_first[b];
    for (std::size_t b : bins_second) ++count_second[b];

    // Level dummies span every populated bin; interaction dummies (first
    // dataset only) exist where both datasets have mass, so the gap is
    // identified and the design stays full rank.
    std::vector<std::size_t> level_col(n_bins, SIZE_MAX), gap_col(n_bins, SIZE_MAX);
    std::vector<std::string> names;
    std::size_t n_cols = 0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (count_first[b] + count_second[b] > 0) {
            level_col[b] = n_cols++;
            names.push_back("level_bin" + std::to_string(b + 1));
        }
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (count_first[b] > 0 && count_second[b] > 0) {
            gap_col[b] = n_cols++;
            names.push_back("gap_bin" + std::to_string(b + 1));
        }
    }

    std::vector<double> y;
    std::vector<std::vector<double>> x;
    std::vector<std::string> clusters;
    auto add = [&](const DecisionRecord& rec, std::size_t bin, bool first) {
        y.push_back(rec.r);
        std::vector<double> row(n_cols, 0.0);
        row[level_col[bin]] = 1.0;
        if (first && gap_col[bin] != SIZE_MAX) row[gap_col[bin]] = 1.0;
        x.push_back(std::move(row));
        // Distinct cluster namespaces: the two datasets are independent samples.
        clusters.push_back((first ? "a:" : "b:") + rec.spectator_id);
    };
    for (std::size_t i = 0; i < ds_first.size(); ++i) add(ds_first[i], bins_first[i], true);
    for (std::size_t i = 0; i < ds_second.size(); ++i) add(ds_second[i], bins_second[i], false);
    RegressionFit fit = ols_clustered(y, x, clusters, names);

    std::vector<BinEstimate> out;
    out.reserve(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        BinEstimate est;
        est.bin = b + 1;
        est.low = binning.bins[b].lo_percent / 100.0;
        est.high = binning.bins[b].hi_percent / 100.0;
        est.n = count_first[b] + count_second[b];
        if (gap_col[b] != SIZE_MAX) {
            est.estimate = fit.coefficients[gap_col[b]];
            est.se = fit.se(gap_col[b]);
        } else {
            est.estimate = nan_value();
            est.se = nan_value();
        }
        out.push_back(est);
    }
    return out;
}

namespace {

struct SpectatorSummary {
    std::size_t n_rounds = 0;
    bool any_positive = false;
};

std::map<std::string, SpectatorSummary> summarize_sessions(const std::vector<DecisionRecord>& dataset) {
    std::map<std::string, SpectatorSummary> by_spectator;
    for (const auto& rec : dataset) {
        auto& s = by_spectator[rec.spectator_id];
        ++s.n_rounds;
        if (rec.r > 0.0) s.any_positive = true;
    }
    for (const auto& [id, s] : by_spectator) {
        if (s.n_rounds != 12)
            throw ContractError("incomplete session for spectator " + id + ": " +
                                std::to_string(s.n_rounds) + " rounds");
    }
    return by_spectator;
}

}  // namespace

ExtensiveMargin extensive_margin(const std::vector<DecisionRecord>& dataset) {
    if (dataset.empty()) throw EstimationError("empty dataset");
    auto by_spectator = summarize_sessions(dataset);
    ExtensiveMargin margin;
    margin.n_spectators = by_spectator.size();
    for (const auto& [id, s] : by_spectator)
        if (!s.any_positive) ++margin.n_never;
    margin.share = static_cast<double>(margin.n_never) / static_cast<double>(margin.n_spectators);
    margin.se = std::sqrt(margin.share * (1.0 - margin.share) / static_cast<double>(margin.n_spectators));
    return margin;
}

IntensiveMargin intensive_margin(const std::vector<DecisionRecord>& dataset) {
    if (dataset.empty()) throw EstimationError("empty dataset");
    auto by_spectator = summarize_sessions(dataset);
    IntensiveMargin margin;
    double sum_r = 0.0;
    std::size_t n_records = 0;
    for (const auto& [id, s] : by_spectator)
        if (s.any_positive) ++margin.n_spectators_kept;
    if (margin.n_spectators_kept == 0)
        throw ContractError("no spectator redistributes a positive amount");
    margin.fit = elasticity_fit(dataset, [&by_spectator](const DecisionRecord& rec) {
        return by_spectator.at(rec.spectator_id).any_positive;
    });
    for (const auto& rec : dataset) {
        if (by_spectator.at(rec.spectator_id).any_positive) {
            sum_r += rec.r;
            ++n_records;
        }
    }
    margin.mean_r = sum_r / static_cast<double>(n_records);
    return margin;
}

std::vector<double> residualize_on_pi(const std::vector<DecisionRecord>& dataset) {
    RegressionFit fit = elasticity_fit(dataset);
    double mean_r = 0.0;
    for (const auto& rec : dataset) mean_r += rec.r;
    mean_r /= static_cast<double>(dataset.size());
    std::vector<double> out;
    out.reserve(dataset.size());
    for (const auto& rec : dataset) {
        double fitted = fit.coefficients[0] + fit.coefficients[1] * (1.0 - rec.pi_true);
        out.push_back(rec.r - fitted + mean_r);
    }
    return out;
}

GapDecomposition effort_gap_accounting(const std::vector<DecisionRecord>& ds_first,
                                       const std::vector<DecisionRecord>& ds_second,
                                       std::optional<double> elasticity_override) {
    if (ds_first.empty() || ds_second.empty()) throw EstimationError("both datasets must be nonempty");
    GapDecomposition dec;

    double mean_r_first = 0.0, mean_gap_first = 0.0;
    for (const auto& rec : ds_first) {
        mean_r_first += rec.r;
        mean_gap_first += rec.effort_w - rec.effort_l;
    }
    mean_r_first /= static_cast<double>(ds_first.size());
    mean_gap_first /= static_cast<double>(ds_first.size());

    double mean_r_second = 0.0, mean_gap_second = 0.0;
    for (const auto& rec : ds_second) {
        mean_r_second += rec.r;
        mean_gap_second += rec.effort_w - rec.effort_l;
    }
    mean_r_second /= static_cast<double>(ds_second.size());
    mean_gap_second /= static_cast<double>(ds_second.size());

    if (elasticity_override) {
        dec.elasticity_per_encryption = *elasticity_override;
    } else {
        std::vector<double> y;
        std::vector<std::vector<double>> x;
        std::vector<std::string> clusters;
        for (const auto& rec : ds_first) {
            y.push_back(rec.r);
            x.push_back({1.0, rec.effort_w - rec.effort_l});
            clusters.push_back("a:" + rec.spectator_id);
        }
        for (const auto& rec : ds_second) {
            y.push_back(rec.r);
            x.push_back({1.0, rec.effort_w - rec.effort_l});
            clusters.push_back("b:" + rec.spectator_id);
        }
        RegressionFit fit = ols_clustered(y, x, clusters, {"intercept", "effort_gap"});
        dec.elasticity_per_encryption = fit.coefficients[1];
    }
    dec.total_gap = mean_r_first - mean_r_second;
    dec.mean_effort_gap_difference = mean_gap_first - mean_gap_second;
    dec.accounted_by_effort_gap = dec.elasticity_per_encryption * dec.mean_effort_gap_difference;
    return dec;
}

std::string fit_json(const RegressionFit& fit) {
    nlohmann::json j;
    j["names"] = fit.names;
    j["coefficients"] = fit.coefficients;
    std::vector<double> ses, pvalues;
    for (std::size_t i = 0; i < fit.coefficients.size(); ++i) {
        ses.push_back(fit.se(i));
        pvalues.push_back(fit.p_value(i));
    }
    j["ses"] = ses;
    j["p_values"] = pvalues;
    j["n_obs"] = fit.n_obs;
    j["n_clusters"] = fit.n_clusters;
    j["r_squared"] = fit.r_squared;
    return j.dump(2) + "\n";
}

std::string decomposition_json(const GapDecomposition& decomposition) {
    nlohmann::json j;
    j["total_gap"] = decomposition.total_gap;
    j["accounted_by_effort_gap"] = decomposition.accounted_by_effort_gap;
    j["elasticity_per_encryption"] = decomposition.elasticity_per_encryption;
    j["mean_effort_gap_difference"] = decomposition.mean_effort_gap_difference;
    return j.dump(2) + "\n";
}

void write_bin_table_csv(const std::filesystem::path& path, const std::vector<BinEstimate>& bins) {
    CsvTable table;
    table.header = {"bin", "low", "high", "estimate", "se", "n"};
    for (const auto& b : bins) {
        table.rows.push_back({std::to_string(b.bin), format_double(b.low), format_double(b.high),
                              format_double(b.estimate), format_double(b.se), std::to_string(b.n)});
    }
    write_csv(path, table);
}

}  // namespace meritluck
