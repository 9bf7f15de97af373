#pragma once

#include <optional>
#include <span>
#include <vector>

namespace jndbench {

/// Nadaraya-Watson estimate on a grid. Points where the total kernel mass
/// underflows are marked undefined rather than extrapolated.
struct RegressionCurve {
    std::vector<double> grid_x;
    std::vector<double> estimate_y;
    std::vector<bool> defined;
    double bandwidth = 0.0;
};

inline constexpr double kKernelMassGuard = 1e-300;

RegressionCurve nw_regress(std::span<const double> x, std::span<const double> y, double bandwidth,
                           std::span<const double> grid);

/// Leave-one-out CV objective sum_i (y_i - m_{-i}(x_i))^2, or nullopt when
/// some leave-one-out estimate is undefined at this bandwidth.
std::optional<double> loo_cv_objective(std::span<const double> x, std::span<const double> y,
                                       double bandwidth);

/// Candidate minimising the CV objective; ties resolve to the smallest
/// bandwidth, duplicates are ignored.
double loo_cv_bandwidth(std::span<const double> x, std::span<const double> y,
                        std::span<const double> candidates);

/// 32 log-spaced candidates between 0.01*range(x) and range(x).
std::vector<double> default_bandwidth_grid(std::span<const double> x, int count = 32);

}  // namespace jndbench
