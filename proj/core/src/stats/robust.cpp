/*
 * Copyright 2026 The offset-detect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "offset/stats/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "offset/errors.hpp"

namespace offset::stats {
namespace {

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return s;
}

void require(std::span<const double> values, std::size_t n, const char* what) {
  if (values.size() < n) {
    throw InsufficientDataError(std::string(what) + " needs at least " + std::to_string(n) +
                                " values, got " + std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + " received a non-finite value");
  }
}

// Median of a scratch buffer; reorders it.
double median_inplace(std::vector<double>& xs) {
  const std::size_t n = xs.size();
  const std::size_t mid = n / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  const double hi = xs[mid];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + mid);
  // Type-7 interpolation at p = 0.5.
  return lo + 0.5 * (hi - lo);
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw InsufficientDataError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("median of an empty sample");
  std::vector<double> scratch(values.begin(), values.end());
  return median_inplace(scratch);
}

double medcouple(std::span<const double> values) {
  require(values, 3, "medcouple");
  // Descending order: the upper half comes first, the tied block (if any)
  // sits in the middle.
  std::vector<double> xs(values.begin(), values.end());
  std::sort(xs.begin(), xs.end(), std::greater<>());
  const double m = quantile_sorted(std::vector<double>(xs.rbegin(), xs.rend()), 0.5);

  std::vector<double> upper;  // x >= m, descending
  std::vector<double> lower;  // x <= m, descending
  for (double x : xs) {
    if (x >= m) upper.push_back(x);
    if (x <= m) lower.push_back(x);
  }
  // Points equal to m are in both halves. Within the tied block the i-th
  // upper copy and j-th lower copy get kernel sign(p - 1 - i - j).
  const auto tied_begin_upper = static_cast<std::size_t>(
      std::find(upper.begin(), upper.end(), m) - upper.begin());
  const std::size_t tied = upper.size() - tied_begin_upper;

  std::vector<double> kernel;
  kernel.reserve(upper.size() * lower.size());
  for (std::size_t a = 0; a < upper.size(); ++a) {
    const double xi = upper[a];
    for (std::size_t b = 0; b < lower.size(); ++b) {
      const double xj = lower[b];
      if (xi == m && xj == m) {
        const auto i = static_cast<long long>(a - tied_begin_upper);
        const auto j = static_cast<long long>(b);
        const long long s = static_cast<long long>(tied) - 1 - i - j;
        kernel.push_back(s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0));
      } else {
        kernel.push_back(((xi - m) - (m - xj)) / (xi - xj));
      }
    }
  }
  return median_inplace(kernel);
}

Whiskers adjusted_whiskers(std::span<const double> values, const AoParams& params) {
  require(values, 4, "adjusted_whiskers");
  const auto s = sorted_copy(values);
  if (s.front() == s.back()) return {s.front(), s.back()};

  const double q1 = quantile_sorted(s, 0.25);
  const double q3 = quantile_sorted(s, 0.75);
  const double iqr = q3 - q1;
  const double mc = medcouple(s);
  double lo_factor = 0.0;
  double hi_factor = 0.0;
  if (mc >= 0.0) {
    lo_factor = std::exp(params.short_side_exponent * mc);
    hi_factor = std::exp(params.long_side_exponent * mc);
  } else {
    lo_factor = std::exp(-params.long_side_exponent * mc);
    hi_factor = std::exp(-params.short_side_exponent * mc);
  }
  // Values within rounding distance of a fence count as inside it, so that
  // affine rescaling cannot move an on-fence sample across.
  const double slack = kFenceSlackIqr * iqr + kFenceSlackAbs * std::max(std::abs(q1), std::abs(q3));
  const double lo_fence = q1 - params.whisker_scale * lo_factor * iqr - slack;
  const double hi_fence = q3 + params.whisker_scale * hi_factor * iqr + slack;

  // Quartiles lie inside [min, max], so both searches always find a value.
  const double lower = *std::lower_bound(s.begin(), s.end(), lo_fence);
  const double upper = *(std::upper_bound(s.begin(), s.end(), hi_fence) - 1);
  return {lower, upper};
}

std::vector<double> adjusted_outlyingness(std::span<const double> values,
                                          const AoParams& params) {
  const Whiskers w = adjusted_whiskers(values, params);
  const double m = median(values);
  const double up = std::max(w.upper - m, params.denominator_floor);
  const double down = std::max(m - w.lower, params.denominator_floor);
  std::vector<double> ao(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    const double score = x > m ? (x - m) / up : (m - x) / down;
    ao[i] = std::min(score, params.cap);
  }
  return ao;
}

double GaussianFit::density(double x) const {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

GmmResult adaptive_gmm(std::span<const double> losses, double beta) {
  require(losses, 4, "adaptive_gmm");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("adaptive_gmm beta must lie in [0, 1)");
  const std::size_t n = losses.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });

  const std::size_t kept = n - n / 2;
  double mean = 0.0;
  for (std::size_t r = 0; r < kept; ++r) mean += losses[order[r]];
  mean /= static_cast<double>(kept);
  double var = 0.0;
  for (std::size_t r = 0; r < kept; ++r) {
    const double d = losses[order[r]] - mean;
    var += d * d;
  }
  var /= static_cast<double>(kept);

  GmmResult result;
  result.fit = {mean, std::max(var, 1e-12), beta};
  // Candidates must sit strictly above every retained loss, which keeps the
  // cut one-sided and bounds the flagged count by the discarded half.
  const double kept_max = losses[order[kept - 1]];
  for (std::size_t i = 0; i < n; ++i) {
    const double x = losses[i];
    if (x > kept_max && x > mean && result.fit.density(x) < beta) result.flagged.push_back(i);
  }
  return result;
}

}  // namespace offset::stats
