#pragma once

#include <span>

namespace lkplo {

inline constexpr double kMadConsistency = 1.4826;

// Order-statistic median; mean of the two central values for even length.
double median(std::span<const double> z);

// 1.4826 * median(|z_i - median(z)|).
double mad(std::span<const double> z);

}  // namespace lkplo
