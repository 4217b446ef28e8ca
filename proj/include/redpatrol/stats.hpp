#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace redpatrol {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion; z = 1.96 gives 95%.
Interval wilson_interval(std::size_t successes, std::size_t trials,
                         double z = 1.959963984540054);

// Percentile bootstrap of mean(a) - mean(b) over independent resamples of
// each 0/1 outcome vector. Returns the lower `1 - confidence` quantile, so a
// positive value means a > b at that one-sided confidence.
double bootstrap_difference_lower(std::span<const double> a, std::span<const double> b,
                                  double confidence, std::size_t resamples, std::uint64_t seed);

}  // namespace redpatrol
