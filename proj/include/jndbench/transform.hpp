#pragma once

#include <span>
#include <vector>

#include "jndbench/dataset.hpp"

namespace jndbench {

/// Coefficients of the four-parameter logistic map
///   s -> b2 + (b1 - b2) / (1 + exp(-(s - b3)/b4)).
/// With b4 > 0 the curve runs from b2 (s -> -inf) up to b1 (s -> +inf);
/// b4 < 0 flips the orientation.
struct LogisticParams {
    double b1 = 0.0;
    double b2 = 0.0;
    double b3 = 0.0;
    double b4 = 1.0;
    double fit_rmse = 0.0;
    bool converged = false;
};

/// Total on the reals plus the +-inf sentinels (maps them to the matching
/// asymptote). b4 == 0 is evaluated as the limit from above: a step at b3.
double apply_logistic(const LogisticParams& p, double s_obj);

/// Nonlinear least squares over (s_obj, s_subj). Deterministic: fixed
/// initialisation, damped least-squares with a numerically differenced
/// Jacobian (relative tolerance 1e-10, at most 2000 iterations), then one
/// Nelder-Mead polish if the damped stage did not converge.
LogisticParams fit_logistic(std::span<const double> s_obj, std::span<const double> s_subj);

/// One parameter set fitted on the concatenation of the two variants'
/// (score, jnd_mean) pairs. Both series must cover the same stimuli in the
/// same order.
LogisticParams fit_logistic_joint(const PairedSeries& variant_a, const PairedSeries& variant_b);

/// Replaces +inf sentinel scores by max(finite) plus one inter-quartile
/// spread of the finite scores, so reference-grade stimuli can enter the fit.
std::vector<double> clamp_infinite_scores(std::vector<double> scores);

/// Linear-interpolation quantile of the values (q in [0,1]).
double quantile(std::vector<double> values, double q);

}  // namespace jndbench
