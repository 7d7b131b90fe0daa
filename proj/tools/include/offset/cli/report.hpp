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
#include <optional>
#include <string>
#include <vector>

#include "offset/cli/io.hpp"
#include "offset/detect/asset.hpp"
#include "offset/eval/metrics.hpp"

namespace offset::cli {

inline constexpr std::size_t kHistogramBins = 20;

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t clean = 0;
  std::size_t poison = 0;
  std::size_t total = 0;
};

/// Equal-width bins over [min, max] of the losses; the last bin is closed.
/// All-equal losses give a single zero-width bin.
std::vector<HistogramBin> loss_histogram(const std::vector<double>& losses,
                                         const std::optional<std::vector<bool>>& mask,
                                         std::size_t bins = kHistogramBins);

/// flagged.txt, losses.csv, histogram.csv and summary.json under `dir`.
/// Detection metrics are included only when `mask` is given.
void write_detection_report(const fs::path& dir, const detect::DetectionReport& report,
                            const std::optional<std::vector<bool>>& mask, const Json& config_echo);

std::vector<std::string> metrics_columns();
std::vector<std::string> metrics_fields(const eval::Metrics& m);
Json metrics_json(const eval::Metrics& m);

/// Joins with commas; fields must not contain commas.
std::string csv_line(const std::vector<std::string>& fields);

}  // namespace offset::cli
