#include "jndbench/transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "jndbench/criteria.hpp"
#include "jndbench/errors.hpp"

namespace jndbench {

namespace {

constexpr int kMaxIterations = 2000;
constexpr double kRelTol = 1e-10;

using Params = std::array<double, 4>;

double eval_logistic(const Params& p, double s) {
    return apply_logistic(LogisticParams{p[0], p[1], p[2], p[3], 0.0, false}, s);
}

double sse(const Params& p, std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = eval_logistic(p, x[i]) - y[i];
        acc += r * r;
    }
    return acc;
}

// Solves the 4x4 system a*dx = b in place by Gaussian elimination with
// partial pivoting. Returns false on a (numerically) singular matrix.
bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b, Params& dx) {
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 4; ++r) {
            double m = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= m * a[col][c];
            b[r] -= m * b[col];
        }
    }
    for (int r = 3; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < 4; ++c) acc -= a[r][c] * dx[c];
        dx[r] = acc / a[r][r];
    }
    for (double v : dx)
        if (!std::isfinite(v)) return false;
    return true;
}

struct LmResult {
    Params p;
    double cost;
    bool converged;
};

LmResult levenberg_marquardt(Params p, std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double cost = sse(p, x, y);
    double lambda = 1e-3;
    bool converged = false;

    for (int iter = 0; iter < kMaxIterations && !converged; ++iter) {
        // Central-difference Jacobian.
        std::array<std::vector<double>, 4> jac;
        for (int j = 0; j < 4; ++j) {
            jac[j].resize(n);
            double h = 1e-6 * std::max(std::fabs(p[j]), 1e-3);
            Params hi = p, lo = p;
            hi[j] += h;
            lo[j] -= h;
            for (std::size_t i = 0; i < n; ++i)
                jac[j][i] = (eval_logistic(hi, x[i]) - eval_logistic(lo, x[i])) / (2.0 * h);
        }
        std::vector<double> resid(n);
        for (std::size_t i = 0; i < n; ++i) resid[i] = eval_logistic(p, x[i]) - y[i];

        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (int a = 0; a < 4; ++a) {
            for (int b = a; b < 4; ++b) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += jac[a][i] * jac[b][i];
                jtj[a][b] = jtj[b][a] = acc;
            }
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += jac[a][i] * resid[i];
            jtr[a] = -acc;
        }

        bool stepped = false;
        while (lambda <= 1e12) {
            auto damped = jtj;
            for (int d = 0; d < 4; ++d) damped[d][d] += lambda * std::max(jtj[d][d], 1e-12);
            Params dx{};
            if (solve4(damped, jtr, dx)) {
                Params cand{p[0] + dx[0], p[1] + dx[1], p[2] + dx[2], p[3] + dx[3]};
                double cand_cost = sse(cand, x, y);
                if (std::isfinite(cand_cost) && cand_cost <= cost) {
                    double drop = cost - cand_cost;
                    p = cand;
                    bool small_change = drop <= kRelTol * std::max(cost, 1e-30);
                    cost = cand_cost;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    stepped = true;
                    if (small_change) converged = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            // Damping exhausted without an acceptable step: local minimum.
            converged = true;
        }
    }
    return {p, cost, converged};
}

LmResult nelder_mead(Params start, std::span<const double> x, std::span<const double> y) {
    constexpr int kMaxEvals = 4000;
    constexpr double kTol = 1e-12;
    std::array<Params, 5> simplex;
    std::array<double, 5> fval;
    simplex[0] = start;
    for (int j = 1; j <= 4; ++j) {
        simplex[j] = start;
        double step = 0.05 * std::fabs(start[j - 1]);
        if (step == 0.0) step = 0.05;
        simplex[j][j - 1] += step;
    }
    for (int j = 0; j < 5; ++j) fval[j] = sse(simplex[j], x, y);
    int evals = 5;
    bool converged = false;

    auto order = [&] {
        std::array<int, 5> idx{0, 1, 2, 3, 4};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fval[a] < fval[b]; });
        std::array<Params, 5> sp;
        std::array<double, 5> sf;
        for (int k = 0; k < 5; ++k) {
            sp[k] = simplex[idx[k]];
            sf[k] = fval[idx[k]];
        }
        simplex = sp;
        fval = sf;
    };

    while (evals < kMaxEvals) {
        order();
        if (fval[4] - fval[0] <= kTol * std::max(std::fabs(fval[0]), 1e-30)) {
            converged = true;
            break;
        }
        Params centroid{};
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) centroid[j] += simplex[k][j] / 4.0;
        auto blend = [&](double t) {
            Params q;
            for (int j = 0; j < 4; ++j) q[j] = centroid[j] + t * (simplex[4][j] - centroid[j]);
            return q;
        };
        Params refl = blend(-1.0);
        double f_refl = sse(refl, x, y);
        ++evals;
        if (f_refl < fval[0]) {
            Params expa = blend(-2.0);
            double f_expa = sse(expa, x, y);
            ++evals;
            if (f_expa < f_refl) {
                simplex[4] = expa;
                fval[4] = f_expa;
            } else {
                simplex[4] = refl;
                fval[4] = f_refl;
            }
        } else if (f_refl < fval[3]) {
            simplex[4] = refl;
            fval[4] = f_refl;
        } else {
            Params contr = blend(0.5);
            double f_contr = sse(contr, x, y);
            ++evals;
            if (f_contr < fval[4]) {
                simplex[4] = contr;
                fval[4] = f_contr;
            } else {
                for (int k = 1; k < 5; ++k) {
                    for (int j = 0; j < 4; ++j)
                        simplex[k][j] = simplex[0][j] + 0.5 * (simplex[k][j] - simplex[0][j]);
                    fval[k] = sse(simplex[k], x, y);
                }
                evals += 4;
            }
        }
    }
    order();
    return {simplex[0], fval[0], converged};
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double apply_logistic(const LogisticParams& p, double s_obj) {
    if (std::isinf(s_obj)) {
        bool towards_b1 = (s_obj > 0) == (p.b4 >= 0.0);
        return towards_b1 ? p.b1 : p.b2;
    }
    if (p.b4 == 0.0) {
        if (s_obj > p.b3) return p.b1;
        if (s_obj < p.b3) return p.b2;
        return 0.5 * (p.b1 + p.b2);
    }
    double e = std::exp(-(s_obj - p.b3) / p.b4);
    return p.b2 + (p.b1 - p.b2) / (1.0 + e);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw EvalError("quantile of empty series");
    std::sort(values.begin(), values.end());
    double pos = q * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> clamp_infinite_scores(std::vector<double> scores) {
    std::vector<double> finite;
    finite.reserve(scores.size());
    for (double s : scores)
        if (std::isfinite(s)) finite.push_back(s);
    if (finite.size() == scores.size()) return scores;
    if (finite.empty()) throw EvalError("all scores are infinite, nothing to clamp against");
    double hi = *std::max_element(finite.begin(), finite.end());
    double spread = quantile(finite, 0.75) - quantile(finite, 0.25);
    for (double& s : scores)
        if (s == std::numeric_limits<double>::infinity()) s = hi + spread;
    return scores;
}

LogisticParams fit_logistic(std::span<const double> s_obj, std::span<const double> s_subj) {
    if (s_obj.size() != s_subj.size())
        throw LengthMismatchError("fit_logistic: series lengths differ");
    const std::size_t n = s_obj.size();
    if (n < 5) throw SampleTooSmallError("fit_logistic needs at least 5 points");
    for (double v : s_obj)
        if (!std::isfinite(v)) throw EvalError("fit_logistic: non-finite objective score (clamp sentinels first)");

    auto [x_min_it, x_max_it] = std::minmax_element(s_obj.begin(), s_obj.end());
    if (*x_min_it == *x_max_it)
        throw ConstantPredictorError("fit_logistic: objective scores are all equal");
    auto [y_min_it, y_max_it] = std::minmax_element(s_subj.begin(), s_subj.end());

    if (*y_min_it == *y_max_it) {
        // All targets equal: the flat map b1 = b2 = c fits exactly.
        LogisticParams p;
        p.b1 = p.b2 = *y_min_it;
        p.b3 = median_of({s_obj.begin(), s_obj.end()});
        p.b4 = (*x_max_it - *x_min_it) / 8.0;
        p.fit_rmse = 0.0;
        p.converged = true;
        return p;
    }

    double rank_corr = srocc(s_obj, s_subj);
    double b4_sign = rank_corr < 0.0 ? -1.0 : 1.0;
    Params init{*y_max_it, *y_min_it, median_of({s_obj.begin(), s_obj.end()}),
                b4_sign * (*x_max_it - *x_min_it) / 8.0};

    LmResult lm = levenberg_marquardt(init, s_obj, s_subj);
    if (!lm.converged) {
        LmResult polished = nelder_mead(lm.p, s_obj, s_subj);
        if (polished.cost <= lm.cost) lm = polished;
    }

    LogisticParams out;
    out.b1 = lm.p[0];
    out.b2 = lm.p[1];
    out.b3 = lm.p[2];
    out.b4 = lm.p[3];
    out.fit_rmse = std::sqrt(lm.cost / static_cast<double>(n));
    out.converged = lm.converged;
    return out;
}

LogisticParams fit_logistic_joint(const PairedSeries& variant_a, const PairedSeries& variant_b) {
    if (variant_a.stimulus_ids != variant_b.stimulus_ids)
        throw MisalignedVariantsError("joint fit requires both variants over the same stimuli");
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(variant_a.size() * 2);
    y.reserve(variant_a.size() * 2);
    x.insert(x.end(), variant_a.scores.begin(), variant_a.scores.end());
    y.insert(y.end(), variant_a.jnd_mean.begin(), variant_a.jnd_mean.end());
    x.insert(x.end(), variant_b.scores.begin(), variant_b.scores.end());
    y.insert(y.end(), variant_b.jnd_mean.begin(), variant_b.jnd_mean.end());
    x = clamp_infinite_scores(std::move(x));
    return fit_logistic(x, y);
}

}  // namespace jndbench
