#pragma once

#include <span>
#include <string>
#include <vector>

#include "jndbench/dataset.hpp"
#include "jndbench/transform.hpp"

namespace jndbench {

/// Pearson linear correlation. Requires n >= 3 and two non-constant series.
double plcc(std::span<const double> x, std::span<const double> y);

/// Spearman rank-order correlation: Pearson over fractional (tie-averaged) ranks.
double srocc(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b (tie corrected), O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

double rmse(std::span<const double> pred, std::span<const double> target);

/// RMSE of residuals standardised by the per-stimulus subjective std.
double z_rmse(std::span<const double> pred, std::span<const double> target,
              std::span<const double> sigma);

/// Gaussian log-likelihood ratio against the perfect predictor,
/// 0.5 * sum(((pred - target)/sigma)^2), computed directly (not via z_rmse).
double llr(std::span<const double> pred, std::span<const double> target,
           std::span<const double> sigma);

/// Fraction of stimuli with |pred - target| > z * sigma_i.
double outlier_ratio(std::span<const double> pred, std::span<const double> target,
                     std::span<const double> sigma, double z = 1.96);

/// Tie-averaged (fractional) ranks, 1-based.
std::vector<double> fractional_ranks(std::span<const double> x);

/// Sorting accuracy swept over sensory thresholds.
struct SaStCurve {
    std::vector<double> thresholds;
    std::vector<double> sa;
};

inline constexpr double kPwrcLambda = 2.0;  // JND units, weight decay constant
inline constexpr int kStGridSteps = 64;

/// SA(T) over pairs with |target_i - target_j| > T, weighted by
/// w_ij = exp(-min(target_i, target_j)/lambda) so pairs containing
/// higher-quality stimuli count more. Empty activation set gives SA = 0.
SaStCurve pwrc_curve(std::span<const double> pred, std::span<const double> target,
                     std::span<const double> st_grid, double lambda = kPwrcLambda);

/// Uniform grid of kStGridSteps+1 thresholds from 0 to max(target).
std::vector<double> default_st_grid(std::span<const double> target);

/// Trapezoidal area under the SA-ST curve.
double pwrc_auc(const SaStCurve& curve);

/// Flips higher-is-better (quality oriented) scores so that the oriented
/// series increases with perceived impairment; lower-is-better metrics
/// already do. All rank correlations against jnd_mean then come out positive
/// for well-behaved metrics.
std::vector<double> orient_to_impairment(std::span<const double> scores, Polarity polarity);

/// Everything derived once per (metric, variant): the joined series over the
/// whole dataset, sentinel-clamped scores, the global logistic fit and the
/// transformed predictions.
struct MetricEvaluation {
    std::string metric;
    std::string variant;
    Polarity polarity = Polarity::HigherIsBetter;
    PairedSeries joined;
    std::vector<double> clamped_scores;
    LogisticParams params;
    std::vector<double> transformed;
};

MetricEvaluation evaluate_metric(const SubjectiveDataset& ds, const MetricScoreTable& table,
                                 const std::string& metric, const std::string& variant);

struct CriteriaReport {
    std::string metric;
    FidelityTag range = FidelityTag::All;
    double plcc = 0.0;
    double srocc = 0.0;
    double kt = 0.0;
    double rmse = 0.0;
    double z_rmse = 0.0;
    double llr = 0.0;
    double outlier_ratio = 0.0;
    double pwrc_auc = 0.0;
    std::size_t n = 0;
};

/// The transform is always fitted on the full dataset and reused for the
/// HF/MF slices. Rank criteria (SROCC/KT) run on impairment-oriented raw
/// scores; PLCC/RMSE/Z-RMSE/OR/PWRC run on the transformed scores.
CriteriaReport criteria_report(const MetricEvaluation& ev, const SubjectiveDataset& ds,
                               const FidelityRange& range);
CriteriaReport criteria_report(const SubjectiveDataset& ds, const MetricScoreTable& table,
                               const std::string& metric, const std::string& variant,
                               const FidelityRange& range);

/// SA-ST curve for one fidelity slice (same inputs the report's pwrc_auc uses).
SaStCurve sa_st_curve(const MetricEvaluation& ev, const SubjectiveDataset& ds,
                      const FidelityRange& range);

}  // namespace jndbench
