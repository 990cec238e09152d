#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chaoslab {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;  // NaN for fewer than 3 points
    std::pair<double, double> slope_ci{0.0, 0.0};  // 95% bootstrap percentile interval
};

/// Least squares of ln y on ln x. The points are sorted first and the
/// regression is carried out on ln(y / y_0), y_0 the first sorted y, so
/// that permuting points or rescaling y leaves the slope bit-identical.
/// Bootstrap: 1000 resamples of the points, degenerate resamples (one
/// distinct x) redrawn.
RateFit loglog_fit(const std::vector<std::pair<double, double>>& points,
                   const std::optional<std::vector<double>>& weights = std::nullopt,
                   std::uint64_t seed = 2024);

struct Verdict {
    std::string name;
    bool pass = false;
    std::string message;
    bool informational = false;  // logged, never gating
};

/// Pass iff |slope - target| <= tolerance and target lies in slope_ci
/// widened by tolerance / 2 on each side.
Verdict verdict(const RateFit& fit, double target_slope, double tolerance, const std::string& name = "rate");

}  // namespace chaoslab
