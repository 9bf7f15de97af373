#pragma once

#include <span>
#include <string>
#include <vector>

#include "jndbench/criteria.hpp"
#include "jndbench/dataset.hpp"
#include "jndbench/transform.hpp"

namespace jndbench {

/// Standard normal CDF.
double normal_cdf(double x);
/// Two-sided p for a standard normal statistic, 2*(1 - Phi(|z|)).
double two_sided_p(double z);

/// Comparison of two dependent rank correlations sharing the subjective
/// scores. decision: +1 metric A significantly better, -1 worse, 0 neither.
struct MrrResult {
    double r1s = 0.0;   // SROCC(A, subjective)
    double r2s = 0.0;   // SROCC(B, subjective)
    double r12 = 0.0;   // SROCC(A, B)
    double z1 = 0.0;
    double z2 = 0.0;
    double rbar_sq = 0.0;
    double f = 0.0;
    double h = 0.0;
    double z_stat = 0.0;
    double p_value = 1.0;
    int decision = 0;
    double alpha = 0.05;
};

/// Closed-form statistic from already-known correlations.
MrrResult mrr_from_correlations(double r1s, double r2s, double r12, std::size_t n,
                                double alpha = 0.05);

/// scores_a / scores_b should already be oriented consistently (higher =
/// more impaired) so that the correlation signs are comparable.
MrrResult mrr_test(std::span<const double> scores_a, std::span<const double> scores_b,
                   std::span<const double> subjective, double alpha = 0.05);

/// Paired signed-rank test on absolute prediction residuals.
struct WilcoxonResult {
    std::size_t n_nonzero = 0;   // pairs left after dropping zero differences
    std::size_t n_total = 0;     // N used in the effect size
    double w_stat = 0.0;         // sum of positive signed ranks
    double mu_w = 0.0;           // n(n+1)/4
    double sigma_w = 0.0;        // sqrt(n(n+1)(2n+1)/24)
    double z_stat = 0.0;
    double p_value = 1.0;
    double effect_size_r = 0.0;  // z / sqrt(N)
    double median_resid_a = 0.0;
    double median_resid_b = 0.0;
    int decision = 0;
    bool degenerate = false;          // every difference was zero
    bool paper_threshold_policy = false;  // which decision threshold produced this
};

/// use_paper_threshold = false compares p against alpha; true compares p
/// against the effect size r (the nonstandard rule printed in the source
/// method description). The winner is the metric with the smaller median
/// absolute residual.
WilcoxonResult wilcoxon_test(std::span<const double> resid_a, std::span<const double> resid_b,
                             bool use_paper_threshold = false, double alpha = 0.05);

enum class PairwiseTest { Mrr, Wilcoxon };

/// Pairwise decisions, rows/columns sorted by descending SROCC. cells[i][j]
/// is the decision for "column metric j vs row metric i": +1 when j is
/// significantly better than i. Antisymmetric with zero diagonal; both
/// orderings of every pair are computed independently.
struct SignificanceMatrix {
    std::vector<std::string> metric_order;
    std::vector<std::vector<int>> cells;
};

SignificanceMatrix significance_matrix(const SubjectiveDataset& ds, const MetricScoreTable& table,
                                       const std::vector<std::string>& metrics, PairwiseTest test,
                                       const std::string& variant = "full", double alpha = 0.05,
                                       bool use_paper_threshold = false);

/// Throws if the matrix violates the zero-diagonal/antisymmetry contract.
void validate_matrix(const SignificanceMatrix& m);

/// Text rendering: '+' column better, '.' no significant difference,
/// '-' column worse.
std::string render_matrix_text(const SignificanceMatrix& m);

/// Crop-vs-full comparison for one metric: joint logistic fit over both
/// variants, MRR on rank correlations and Wilcoxon on transformed residuals,
/// with crop playing the role of metric A.
struct VariantComparison {
    std::string metric;
    LogisticParams joint_params;
    MrrResult mrr;
    WilcoxonResult wilcoxon;
};

VariantComparison compare_variants(const SubjectiveDataset& ds, const MetricScoreTable& table,
                                   const std::string& metric, double alpha = 0.05,
                                   bool use_paper_threshold = false);

}  // namespace jndbench
