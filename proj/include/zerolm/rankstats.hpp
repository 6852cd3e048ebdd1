#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace zerolm {

/// Name of the Kendall variant computed by kendall_tau, embedded in reports.
inline constexpr std::string_view kTauVariant = "tau-b";

/// Throws ValidationError unless x and y have equal length >= 2 and contain
/// no NaN.
void validate_paired(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b in O(n log n). Throws DegenerateInputError when either
/// vector has no untied pair.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks. Throws DegenerateInputError when
/// either rank vector has zero variance.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

} // namespace zerolm
