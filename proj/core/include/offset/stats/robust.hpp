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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace offset::stats {

/// Constants of the skew-adjusted boxplot and of Adjusted Outlyingness.
struct AoParams {
  double whisker_scale = 1.5;
  /// Exponents applied to the medcouple on the short and long side of the
  /// distribution: e^(short*MC) and e^(long*MC).
  double short_side_exponent = -4.0;
  double long_side_exponent = 3.0;
  double denominator_floor = 1e-12;
  double cap = 1e6;
};

/// Linear-interpolation quantile between order statistics ("type 7").
/// `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double prob);
double median(std::span<const double> values);

/// Medcouple skewness in [-1, 1]. Exact O(n^2) kernel enumeration.
double medcouple(std::span<const double> values);

/// Fence tolerance: kFenceSlackIqr * IQR + kFenceSlackAbs * max(|Q1|, |Q3|).
inline constexpr double kFenceSlackIqr = 1e-10;
inline constexpr double kFenceSlackAbs = 1e-12;

struct Whiskers {
  double lower = 0.0;
  double upper = 0.0;
};

/// Skew-adjusted Tukey fences, widened by the fence tolerance and clamped inward to the most extreme data
/// values that fall inside them.
Whiskers adjusted_whiskers(std::span<const double> values, const AoParams& params = {});

/// One score per value; 0 at the median, capped at params.cap.
std::vector<double> adjusted_outlyingness(std::span<const double> values,
                                          const AoParams& params = {});

struct GaussianFit {
  double mean = 0.0;
  double variance = 1e-12;
  double beta = 1e-6;

  double density(double x) const;
};

struct GmmResult {
  /// Ascending sample indices.
  std::vector<std::size_t> flagged;
  GaussianFit fit;
};

/// Adaptive single-Gaussian cutoff. Drops the highest-loss half, fits a
/// Gaussian to what remains, then flags high-side samples whose density
/// under that fit is below `beta`.
GmmResult adaptive_gmm(std::span<const double> losses, double beta);

}  // namespace offset::stats
