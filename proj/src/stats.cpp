#include "redpatrol/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace redpatrol {

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (successes > trials) throw std::invalid_argument("more successes than trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double bootstrap_difference_lower(std::span<const double> a, std::span<const double> b,
                                  double confidence, std::size_t resamples, std::uint64_t seed) {
  if (a.empty() || b.empty() || resamples == 0) {
    throw std::invalid_argument("bootstrap needs non-empty samples");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_a(0, a.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_b(0, b.size() - 1);
  std::vector<double> diffs(resamples);
  for (double& d : diffs) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sa += a[pick_a(rng)];
    for (std::size_t i = 0; i < b.size(); ++i) sb += b[pick_b(rng)];
    d = sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size());
  }
  std::sort(diffs.begin(), diffs.end());
  const auto idx = static_cast<std::size_t>(std::floor((1.0 - confidence) * resamples));
  return diffs[std::min(idx, diffs.size() - 1)];
}

}  // namespace redpatrol
