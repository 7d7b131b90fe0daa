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

#include "offset/cli/report.hpp"

#include <algorithm>

#include "offset/errors.hpp"

namespace offset::cli {

std::vector<HistogramBin> loss_histogram(const std::vector<double>& losses,
                                         const std::optional<std::vector<bool>>& mask,
                                         std::size_t bins) {
  if (losses.empty()) return {};
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  if (mask && mask->size() != losses.size()) throw DimensionError("mask length differs from losses");
  const auto [lo_it, hi_it] = std::minmax_element(losses.begin(), losses.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo) bins = 1;
  const double width = (hi - lo) / static_cast<double>(bins);

  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = lo + width * static_cast<double>(b);
    out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((losses[i] - lo) / width) : 0;
    b = std::min(b, bins - 1);
    ++out[b].total;
    if (mask) ++((*mask)[i] ? out[b].poison : out[b].clean);
  }
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  return line + "\n";
}

void write_detection_report(const fs::path& dir, const detect::DetectionReport& report,
                            const std::optional<std::vector<bool>>& mask, const Json& config_echo) {
  ensure_directory(dir);
  write_index_list(dir / "flagged.txt", report.flagged);

  std::vector<bool> is_flagged(report.losses.size(), false);
  for (std::size_t i : report.flagged) is_flagged.at(i) = true;
  std::string losses = csv_line({"index", "loss", "flagged"});
  for (std::size_t i = 0; i < report.losses.size(); ++i)
    losses += csv_line({std::to_string(i), format_double(report.losses[i]), is_flagged[i] ? "1" : "0"});
  write_text(dir / "losses.csv", losses);

  std::vector<std::string> header{"bin_left", "bin_right"};
  if (mask) header.insert(header.end(), {"count_clean", "count_poison"});
  header.push_back("count_total");
  std::string hist = csv_line(header);
  for (const auto& bin : loss_histogram(report.losses, mask)) {
    std::vector<std::string> row{format_double(bin.left), format_double(bin.right)};
    if (mask) row.insert(row.end(), {std::to_string(bin.clean), std::to_string(bin.poison)});
    row.push_back(std::to_string(bin.total));
    hist += csv_line(row);
  }
  write_text(dir / "histogram.csv", hist);

  Json summary;
  summary["config_echo"] = config_echo;
  summary["gaussian_mu"] = report.fit.mean;
  summary["gaussian_var"] = report.fit.variance;
  summary["num_samples"] = report.losses.size();
  summary["num_flagged"] = report.flagged.size();
  if (mask) {
    const auto m = eval::detection_metrics(report.flagged, *mask);
    summary["tpr"] = m.tpr;
    summary["fpr"] = m.fpr;
  }
  write_json(dir / "summary.json", summary);
}

std::vector<std::string> metrics_columns() {
  return {"tpr", "fpr", "tp", "fp", "tn", "fn", "remaining_poisons",
          "asr", "acc", "victim_asr", "victim_acc", "clean_acc"};
}

std::vector<std::string> metrics_fields(const eval::Metrics& m) {
  return {format_double(m.tpr),
          format_double(m.fpr),
          std::to_string(m.tp),
          std::to_string(m.fp),
          std::to_string(m.tn),
          std::to_string(m.fn),
          std::to_string(m.remaining_poisons),
          format_double(m.asr),
          format_double(m.acc),
          format_double(m.victim_asr),
          format_double(m.victim_acc),
          m.clean_acc ? format_double(*m.clean_acc) : ""};
}

Json metrics_json(const eval::Metrics& m) {
  Json j;
  j["tpr"] = m.tpr;
  j["fpr"] = m.fpr;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["remaining_poisons"] = m.remaining_poisons;
  j["asr"] = m.asr;
  j["acc"] = m.acc;
  j["victim_asr"] = m.victim_asr;
  j["victim_acc"] = m.victim_acc;
  j["clean_acc"] = m.clean_acc ? Json(*m.clean_acc) : Json(nullptr);
  return j;
}

}  // namespace offset::cli
