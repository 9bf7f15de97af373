#include "jndbench/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "jndbench/errors.hpp"

namespace jndbench {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* who) {
    if (a.size() != b.size()) throw LengthMismatchError(std::string(who) + ": series lengths differ");
}

void require_positive_sigma(std::span<const double> sigma) {
    for (double s : sigma)
        if (!(s > 0.0)) throw NonPositiveSigmaError("sigma values must be strictly positive");
}

// Counts pairs (i < j) with y[i] > y[j] via merge sort; y is consumed.
std::uint64_t count_inversions(std::vector<double>& y) {
    std::vector<double> tmp(y.size());
    std::uint64_t count = 0;
    for (std::size_t width = 1; width < y.size(); width *= 2) {
        for (std::size_t lo = 0; lo + width < y.size(); lo += 2 * width) {
            std::size_t mid = lo + width;
            std::size_t hi = std::min(lo + 2 * width, y.size());
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (y[j] < y[i]) {
                    count += mid - i;
                    tmp[k++] = y[j++];
                } else {
                    tmp[k++] = y[i++];
                }
            }
            while (i < mid) tmp[k++] = y[i++];
            while (j < hi) tmp[k++] = y[j++];
            std::copy(tmp.begin() + lo, tmp.begin() + hi, y.begin() + lo);
        }
    }
    return count;
}

std::uint64_t tie_pair_count(std::vector<double> sorted) {
    std::uint64_t total = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        std::uint64_t t = j - i + 1;
        total += t * (t - 1) / 2;
        i = j + 1;
    }
    return total;
}

}  // namespace

double plcc(std::span<const double> x, std::span<const double> y) {
    require_same_length(x, y, "plcc");
    const std::size_t n = x.size();
    if (n < 3) throw SampleTooSmallError("plcc needs at least 3 points");
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ConstantSeriesError("plcc: constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> fractional_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double srocc(std::span<const double> x, std::span<const double> y) {
    require_same_length(x, y, "srocc");
    if (x.size() < 3) throw SampleTooSmallError("srocc needs at least 3 points");
    auto rx = fractional_ranks(x);
    auto ry = fractional_ranks(y);
    return plcc(rx, ry);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    require_same_length(x, y, "kendall_tau");
    const std::size_t n = x.size();
    if (n < 3) throw SampleTooSmallError("kendall_tau needs at least 3 points");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t n1 = 0;  // pairs tied in x
    std::uint64_t n3 = 0;  // pairs tied in both
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
            std::uint64_t t = j - i + 1;
            n1 += t * (t - 1) / 2;
            std::size_t a = i;
            while (a <= j) {
                std::size_t b = a;
                while (b + 1 <= j && y[order[b + 1]] == y[order[a]]) ++b;
                std::uint64_t u = b - a + 1;
                n3 += u * (u - 1) / 2;
                a = b + 1;
            }
            i = j + 1;
        }
    }
    std::vector<double> y_in_x_order(n);
    for (std::size_t i = 0; i < n; ++i) y_in_x_order[i] = y[order[i]];
    std::uint64_t discordant = count_inversions(y_in_x_order);

    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    std::uint64_t n2 = tie_pair_count(std::move(ys));

    double denom = std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
    if (denom == 0.0) throw ConstantSeriesError("kendall_tau: all pairs tied");
    double num = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
                 static_cast<double>(n3) - 2.0 * static_cast<double>(discordant);
    return std::clamp(num / denom, -1.0, 1.0);
}

double rmse(std::span<const double> pred, std::span<const double> target) {
    require_same_length(pred, target, "rmse");
    if (pred.empty()) throw SampleTooSmallError("rmse of empty series");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - target[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double z_rmse(std::span<const double> pred, std::span<const double> target,
              std::span<const double> sigma) {
    require_same_length(pred, target, "z_rmse");
    require_same_length(pred, sigma, "z_rmse");
    if (pred.empty()) throw SampleTooSmallError("z_rmse of empty series");
    require_positive_sigma(sigma);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = (pred[i] - target[i]) / sigma[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double llr(std::span<const double> pred, std::span<const double> target,
           std::span<const double> sigma) {
    require_same_length(pred, target, "llr");
    require_same_length(pred, sigma, "llr");
    require_positive_sigma(sigma);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = (pred[i] - target[i]) / sigma[i];
        acc += d * d;
    }
    return 0.5 * acc;
}

double outlier_ratio(std::span<const double> pred, std::span<const double> target,
                     std::span<const double> sigma, double z) {
    require_same_length(pred, target, "outlier_ratio");
    require_same_length(pred, sigma, "outlier_ratio");
    if (pred.empty()) throw SampleTooSmallError("outlier_ratio of empty series");
    require_positive_sigma(sigma);
    std::size_t outliers = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (std::fabs(pred[i] - target[i]) > z * sigma[i]) ++outliers;
    return static_cast<double>(outliers) / static_cast<double>(pred.size());
}

std::vector<double> default_st_grid(std::span<const double> target) {
    if (target.empty()) throw DegenerateGridError("default_st_grid: empty target");
    double hi = *std::max_element(target.begin(), target.end());
    if (!(hi > 0.0)) hi = 1.0;
    std::vector<double> grid(kStGridSteps + 1);
    for (int i = 0; i <= kStGridSteps; ++i)
        grid[i] = hi * static_cast<double>(i) / static_cast<double>(kStGridSteps);
    return grid;
}

SaStCurve pwrc_curve(std::span<const double> pred, std::span<const double> target,
                     std::span<const double> st_grid, double lambda) {
    require_same_length(pred, target, "pwrc_curve");
    const std::size_t n = pred.size();
    if (n < 3) throw SampleTooSmallError("pwrc_curve needs at least 3 points");
    if (st_grid.empty() || st_grid.front() != 0.0) throw DegenerateGridError("ST grid must start at 0");
    for (std::size_t i = 1; i < st_grid.size(); ++i)
        if (!(st_grid[i] > st_grid[i - 1]))
            throw DegenerateGridError("ST grid must be strictly increasing");

    SaStCurve curve;
    curve.thresholds.assign(st_grid.begin(), st_grid.end());
    curve.sa.resize(st_grid.size(), 0.0);
    for (std::size_t t = 0; t < st_grid.size(); ++t) {
        double thr = st_grid[t];
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double gap = std::fabs(target[i] - target[j]);
                if (!(gap > thr)) continue;
                double w = std::exp(-std::min(target[i], target[j]) / lambda);
                den += w;
                double dp = pred[i] - pred[j];
                double dt = target[i] - target[j];
                if (dp == 0.0) continue;  // predictor tie: weight counts, no credit
                num += (dp > 0.0) == (dt > 0.0) ? w : -w;
            }
        }
        curve.sa[t] = den > 0.0 ? num / den : 0.0;
    }
    return curve;
}

double pwrc_auc(const SaStCurve& curve) {
    if (curve.thresholds.size() != curve.sa.size())
        throw LengthMismatchError("pwrc_auc: malformed curve");
    double area = 0.0;
    for (std::size_t i = 1; i < curve.thresholds.size(); ++i)
        area += 0.5 * (curve.sa[i] + curve.sa[i - 1]) * (curve.thresholds[i] - curve.thresholds[i - 1]);
    return area;
}

std::vector<double> orient_to_impairment(std::span<const double> scores, Polarity polarity) {
    std::vector<double> out(scores.begin(), scores.end());
    if (polarity == Polarity::HigherIsBetter)
        for (double& v : out) v = -v;
    return out;
}

MetricEvaluation evaluate_metric(const SubjectiveDataset& ds, const MetricScoreTable& table,
                                 const std::string& metric, const std::string& variant) {
    MetricEvaluation ev;
    ev.metric = metric;
    ev.variant = variant;
    ev.polarity = table.polarity(metric);
    ev.joined = join(ds, table, metric, variant);
    ev.clamped_scores = clamp_infinite_scores(ev.joined.scores);
    ev.params = fit_logistic(ev.clamped_scores, ev.joined.jnd_mean);
    ev.transformed.reserve(ev.clamped_scores.size());
    for (double s : ev.clamped_scores) ev.transformed.push_back(apply_logistic(ev.params, s));
    return ev;
}

namespace {

struct Slice {
    std::vector<double> raw;
    std::vector<double> transformed;
    std::vector<double> mu;
    std::vector<double> sigma;
};

Slice slice_evaluation(const MetricEvaluation& ev, const SubjectiveDataset& ds,
                       const FidelityRange& range) {
    Slice s;
    const auto& recs = ds.records();
    if (recs.size() != ev.joined.size())
        throw LengthMismatchError("evaluation and dataset are out of step");
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (!in_fidelity_range(recs[i], range)) continue;
        s.raw.push_back(ev.clamped_scores[i]);
        s.transformed.push_back(ev.transformed[i]);
        s.mu.push_back(ev.joined.jnd_mean[i]);
        s.sigma.push_back(ev.joined.jnd_std[i]);
    }
    if (s.raw.empty())
        throw EmptySliceError("fidelity range '" + to_string(range.tag) + "' selects no records");
    return s;
}

}  // namespace

CriteriaReport criteria_report(const MetricEvaluation& ev, const SubjectiveDataset& ds,
                               const FidelityRange& range) {
    Slice s = slice_evaluation(ev, ds, range);
    auto oriented = orient_to_impairment(s.raw, ev.polarity);

    CriteriaReport rep;
    rep.metric = ev.metric;
    rep.range = range.tag;
    rep.n = s.raw.size();
    rep.srocc = srocc(oriented, s.mu);
    rep.kt = kendall_tau(oriented, s.mu);
    rep.plcc = plcc(s.transformed, s.mu);
    rep.rmse = rmse(s.transformed, s.mu);
    rep.z_rmse = z_rmse(s.transformed, s.mu, s.sigma);
    rep.llr = llr(s.transformed, s.mu, s.sigma);
    rep.outlier_ratio = outlier_ratio(s.transformed, s.mu, s.sigma);
    auto grid = default_st_grid(s.mu);
    rep.pwrc_auc = pwrc_auc(pwrc_curve(s.transformed, s.mu, grid));
    return rep;
}

CriteriaReport criteria_report(const SubjectiveDataset& ds, const MetricScoreTable& table,
                               const std::string& metric, const std::string& variant,
                               const FidelityRange& range) {
    return criteria_report(evaluate_metric(ds, table, metric, variant), ds, range);
}

SaStCurve sa_st_curve(const MetricEvaluation& ev, const SubjectiveDataset& ds,
                      const FidelityRange& range) {
    Slice s = slice_evaluation(ev, ds, range);
    return pwrc_curve(s.transformed, s.mu, default_st_grid(s.mu));
}

}  // namespace jndbench
