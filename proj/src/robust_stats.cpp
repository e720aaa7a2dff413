#include "lkplo/robust_stats.hpp"

#include "lkplo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lkplo {

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

}  // namespace

double median(std::span<const double> z) {
    if (z.empty()) throw InvalidArgumentError("median of an empty sample");
    std::vector<double> v(z.begin(), z.end());
    return median_inplace(v);
}

double mad(std::span<const double> z) {
    if (z.empty()) throw InvalidArgumentError("MAD of an empty sample");
    std::vector<double> v(z.begin(), z.end());
    const double m = median_inplace(v);
    for (double& x : v) x = std::abs(x - m);
    return kMadConsistency * median_inplace(v);
}

}  // namespace lkplo
