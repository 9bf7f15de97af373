#include "jndbench/kernelreg.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "jndbench/errors.hpp"

namespace jndbench {

namespace {

double gauss_kernel(double u) { return std::exp(-0.5 * u * u); }

}  // namespace

RegressionCurve nw_regress(std::span<const double> x, std::span<const double> y, double bandwidth,
                           std::span<const double> grid) {
    if (x.size() != y.size()) throw LengthMismatchError("nw_regress: series lengths differ");
    if (x.size() < 2) throw SampleTooSmallError("nw_regress needs at least 2 points");
    if (!(bandwidth > 0.0)) throw BandwidthError("bandwidth must be positive");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DegenerateGridError("grid must be strictly increasing");

    RegressionCurve curve;
    curve.bandwidth = bandwidth;
    curve.grid_x.assign(grid.begin(), grid.end());
    curve.estimate_y.resize(grid.size(), std::numeric_limits<double>::quiet_NaN());
    curve.defined.resize(grid.size(), false);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double wsum = 0.0, wysum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double w = gauss_kernel((grid[g] - x[i]) / bandwidth);
            wsum += w;
            wysum += w * y[i];
        }
        if (wsum > kKernelMassGuard) {
            curve.estimate_y[g] = wysum / wsum;
            curve.defined[g] = true;
        }
    }
    return curve;
}

std::optional<double> loo_cv_objective(std::span<const double> x, std::span<const double> y,
                                       double bandwidth) {
    if (x.size() != y.size()) throw LengthMismatchError("loo_cv_objective: series lengths differ");
    if (!(bandwidth > 0.0)) throw BandwidthError("bandwidth must be positive");
    const std::size_t n = x.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Incremental form: subtract the held-out point's own contribution
        // (kernel weight at zero distance is exactly 1).
        double wsum = 0.0, wysum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double w = gauss_kernel((x[i] - x[j]) / bandwidth);
            wsum += w;
            wysum += w * y[j];
        }
        double wsum_loo = wsum - 1.0;
        double wysum_loo = wysum - y[i];
        if (!(wsum_loo > kKernelMassGuard)) return std::nullopt;
        double resid = y[i] - wysum_loo / wsum_loo;
        total += resid * resid;
    }
    return total;
}

double loo_cv_bandwidth(std::span<const double> x, std::span<const double> y,
                        std::span<const double> candidates) {
    if (x.size() < 3) throw SampleTooSmallError("loo_cv_bandwidth needs at least 3 points");
    if (candidates.empty()) throw BandwidthError("no bandwidth candidates");
    std::set<double> unique(candidates.begin(), candidates.end());
    for (double h : unique)
        if (!(h > 0.0)) throw BandwidthError("bandwidth candidates must be positive");

    double best_h = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    bool found = false;
    for (double h : unique) {  // ascending: ties keep the smallest bandwidth
        auto score = loo_cv_objective(x, y, h);
        if (score && *score < best_score) {
            best_score = *score;
            best_h = h;
            found = true;
        }
    }
    if (!found) throw BandwidthError("every candidate leaves undefined leave-one-out estimates");
    return best_h;
}

std::vector<double> default_bandwidth_grid(std::span<const double> x, int count) {
    if (x.empty()) throw SampleTooSmallError("default_bandwidth_grid: empty series");
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    double range = *hi - *lo;
    if (!(range > 0.0)) throw ConstantSeriesError("default_bandwidth_grid: constant x");
    double h_min = 0.01 * range;
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) {
        double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out[i] = h_min * std::pow(range / h_min, t);
    }
    return out;
}

}  // namespace jndbench
