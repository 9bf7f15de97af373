#include "jndbench/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "jndbench/errors.hpp"

namespace jndbench {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) throw SampleTooSmallError("median of empty series");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

MrrResult mrr_from_correlations(double r1s, double r2s, double r12, std::size_t n, double alpha) {
    if (n <= 3) throw SampleTooSmallError("MRR test needs n > 3");
    if (!(std::fabs(r1s) < 1.0) || !(std::fabs(r2s) < 1.0))
        throw DegenerateCorrelationError("MRR: |correlation| = 1 has an infinite Fisher transform");

    MrrResult res;
    res.alpha = alpha;
    res.r1s = r1s;
    res.r2s = r2s;
    res.r12 = r12;
    res.z1 = std::atanh(r1s);
    res.z2 = std::atanh(r2s);
    res.rbar_sq = 0.5 * (r1s * r1s + r2s * r2s);
    res.f = (1.0 - r12) / (2.0 * (1.0 - res.rbar_sq));
    res.h = (1.0 - res.f * res.rbar_sq) / (1.0 - res.rbar_sq);

    if (res.z1 == res.z2) {
        res.z_stat = 0.0;  // also covers the r12 == 1 case of identical rankings
    } else {
        double var = 2.0 * (1.0 - r12) * res.h / static_cast<double>(n - 3);
        if (!(var > 0.0))
            throw DegenerateCorrelationError("MRR: nonpositive variance term (r12 too close to 1)");
        res.z_stat = (res.z1 - res.z2) / std::sqrt(var);
    }
    res.p_value = two_sided_p(res.z_stat);
    if (res.p_value < alpha && res.z_stat > 0.0)
        res.decision = 1;
    else if (res.p_value < alpha && res.z_stat < 0.0)
        res.decision = -1;
    else
        res.decision = 0;
    return res;
}

MrrResult mrr_test(std::span<const double> scores_a, std::span<const double> scores_b,
                   std::span<const double> subjective, double alpha) {
    if (scores_a.size() != scores_b.size() || scores_a.size() != subjective.size())
        throw LengthMismatchError("mrr_test: series lengths differ");
    if (scores_a.size() <= 3) throw SampleTooSmallError("MRR test needs n > 3");
    double r1s = srocc(scores_a, subjective);
    double r2s = srocc(scores_b, subjective);
    double r12 = srocc(scores_a, scores_b);
    return mrr_from_correlations(r1s, r2s, r12, scores_a.size(), alpha);
}

WilcoxonResult wilcoxon_test(std::span<const double> resid_a, std::span<const double> resid_b,
                             bool use_paper_threshold, double alpha) {
    if (resid_a.size() != resid_b.size())
        throw LengthMismatchError("wilcoxon_test: series lengths differ");
    if (resid_a.empty()) throw SampleTooSmallError("wilcoxon_test of empty series");

    WilcoxonResult res;
    res.paper_threshold_policy = use_paper_threshold;
    res.n_total = resid_a.size();
    res.median_resid_a = median_of({resid_a.begin(), resid_a.end()});
    res.median_resid_b = median_of({resid_b.begin(), resid_b.end()});

    std::vector<double> diffs;
    diffs.reserve(resid_a.size());
    for (std::size_t i = 0; i < resid_a.size(); ++i) {
        double d = resid_a[i] - resid_b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    res.n_nonzero = diffs.size();
    if (diffs.empty()) {
        res.degenerate = true;
        res.p_value = 1.0;
        res.decision = 0;
        return res;
    }

    std::vector<double> abs_d(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) abs_d[i] = std::fabs(diffs[i]);
    auto ranks = fractional_ranks(abs_d);

    const double n = static_cast<double>(diffs.size());
    double w = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i)
        if (diffs[i] > 0.0) w += ranks[i];
    res.w_stat = w;
    res.mu_w = n * (n + 1.0) / 4.0;  // mean of W under H0 (half the total rank sum)
    res.sigma_w = std::sqrt(n * (n + 1.0) * (2.0 * n + 1.0) / 24.0);
    res.z_stat = (w - res.mu_w) / res.sigma_w;
    res.p_value = two_sided_p(res.z_stat);
    res.effect_size_r = res.z_stat / std::sqrt(static_cast<double>(res.n_total));

    double threshold = use_paper_threshold ? res.effect_size_r : alpha;
    if (res.p_value < threshold) {
        if (res.median_resid_a < res.median_resid_b)
            res.decision = 1;
        else if (res.median_resid_a > res.median_resid_b)
            res.decision = -1;
        else
            res.decision = 0;  // equal medians carry no direction
    } else {
        res.decision = 0;
    }
    return res;
}

SignificanceMatrix significance_matrix(const SubjectiveDataset& ds, const MetricScoreTable& table,
                                       const std::vector<std::string>& metrics, PairwiseTest test,
                                       const std::string& variant, double alpha,
                                       bool use_paper_threshold) {
    if (metrics.empty()) throw EvalError("significance_matrix: no metrics given");

    struct Prepared {
        std::string name;
        std::vector<double> oriented;
        std::vector<double> residuals;
        double srocc_vs_subj = 0.0;
    };
    std::vector<Prepared> prep;
    prep.reserve(metrics.size());
    std::vector<double> mu;
    for (const auto& name : metrics) {
        MetricEvaluation ev = evaluate_metric(ds, table, name, variant);
        Prepared p;
        p.name = name;
        p.oriented = orient_to_impairment(ev.clamped_scores, ev.polarity);
        p.residuals.reserve(ev.transformed.size());
        for (std::size_t i = 0; i < ev.transformed.size(); ++i)
            p.residuals.push_back(std::fabs(ev.transformed[i] - ev.joined.jnd_mean[i]));
        p.srocc_vs_subj = srocc(p.oriented, ev.joined.jnd_mean);
        if (mu.empty()) mu = ev.joined.jnd_mean;
        prep.push_back(std::move(p));
    }
    std::stable_sort(prep.begin(), prep.end(), [](const Prepared& a, const Prepared& b) {
        return a.srocc_vs_subj > b.srocc_vs_subj;
    });

    const std::size_t m = prep.size();
    SignificanceMatrix out;
    out.metric_order.reserve(m);
    for (const auto& p : prep) out.metric_order.push_back(p.name);
    out.cells.assign(m, std::vector<int>(m, 0));
    for (std::size_t row = 0; row < m; ++row) {
        for (std::size_t col = 0; col < m; ++col) {
            if (row == col) continue;
            int decision = 0;
            if (test == PairwiseTest::Mrr) {
                decision = mrr_test(prep[col].oriented, prep[row].oriented, mu, alpha).decision;
            } else {
                decision = wilcoxon_test(prep[col].residuals, prep[row].residuals,
                                         use_paper_threshold, alpha)
                               .decision;
            }
            out.cells[row][col] = decision;
        }
    }
    validate_matrix(out);
    return out;
}

void validate_matrix(const SignificanceMatrix& m) {
    const std::size_t n = m.metric_order.size();
    if (m.cells.size() != n) throw EvalError("significance matrix: bad shape");
    for (std::size_t i = 0; i < n; ++i) {
        if (m.cells[i].size() != n) throw EvalError("significance matrix: bad shape");
        if (m.cells[i][i] != 0) throw EvalError("significance matrix: nonzero diagonal");
        for (std::size_t j = 0; j < n; ++j)
            if (m.cells[i][j] != -m.cells[j][i])
                throw EvalError("significance matrix: antisymmetry violated at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
    }
}

std::string render_matrix_text(const SignificanceMatrix& m) {
    std::size_t width = 0;
    for (const auto& name : m.metric_order) width = std::max(width, name.size());
    std::ostringstream out;
    for (std::size_t i = 0; i < m.metric_order.size(); ++i) {
        out << m.metric_order[i];
        out << std::string(width - m.metric_order[i].size() + 1, ' ');
        for (std::size_t j = 0; j < m.cells[i].size(); ++j) {
            char c = m.cells[i][j] > 0 ? '+' : (m.cells[i][j] < 0 ? '-' : '.');
            out << c;
        }
        out << '\n';
    }
    return out.str();
}

VariantComparison compare_variants(const SubjectiveDataset& ds, const MetricScoreTable& table,
                                   const std::string& metric, double alpha,
                                   bool use_paper_threshold) {
    PairedSeries full = join(ds, table, metric, "full");
    PairedSeries crop = join(ds, table, metric, "crop");
    Polarity pol = table.polarity(metric);

    // Clamp sentinels against the union of both variants so the joint fit and
    // the residuals see identical values.
    std::vector<double> united = crop.scores;
    united.insert(united.end(), full.scores.begin(), full.scores.end());
    united = clamp_infinite_scores(std::move(united));
    std::vector<double> crop_scores(united.begin(), united.begin() + crop.size());
    std::vector<double> full_scores(united.begin() + crop.size(), united.end());
    crop.scores = crop_scores;
    full.scores = full_scores;

    VariantComparison cmp;
    cmp.metric = metric;
    cmp.joint_params = fit_logistic_joint(crop, full);
    auto crop_oriented = orient_to_impairment(crop_scores, pol);
    auto full_oriented = orient_to_impairment(full_scores, pol);
    cmp.mrr = mrr_test(crop_oriented, full_oriented, crop.jnd_mean, alpha);

    std::vector<double> resid_crop(crop.size());
    std::vector<double> resid_full(full.size());
    for (std::size_t i = 0; i < crop.size(); ++i) {
        resid_crop[i] = std::fabs(apply_logistic(cmp.joint_params, crop_scores[i]) - crop.jnd_mean[i]);
        resid_full[i] = std::fabs(apply_logistic(cmp.joint_params, full_scores[i]) - full.jnd_mean[i]);
    }
    cmp.wilcoxon = wilcoxon_test(resid_crop, resid_full, use_paper_threshold, alpha);
    return cmp;
}

}  // namespace jndbench
