// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ravel/metrics.hpp"

namespace ravel {

struct ReportRow {
  std::string label;
  AggregateReport aggregate;
};

namespace detail {

inline std::string fmt_cell(std::optional<double> v, int decimals,
                            bool percent = false) {
  if (!v) return "—";
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals)
     << (percent ? *v * 100.0 : *v);
  return os.str();
}

inline std::string pad(const std::string& s, std::size_t width) {
  // Width in display columns; the em dash is 3 bytes but 1 column.
  std::size_t cols = 0;
  for (unsigned char c : s)
    if ((c & 0xc0) != 0x80) ++cols;
  return s + std::string(cols < width ? width - cols : 1, ' ');
}

}  // namespace detail

/// Aggregate table: success and agentic-dynamics columns, one row per run
/// set. Missing metrics render as an em dash; a run with no refine pairs
/// renders delta as 0.00.
inline std::string render_report(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  static const std::vector<std::pair<std::string, std::size_t>> columns = {
      {"model", 20}, {"S %", 8},   {"eta", 8},  {"rho %", 9},
      {"delta", 8},  {"ERR %", 8}, {"|O|", 6},  {"|T|", 8}};
  for (const auto& [name, width] : columns) os << detail::pad(name, width);
  os << "\n";
  for (const auto& row : rows) {
    const auto& a = row.aggregate;
    std::optional<double> delta =
        a.mean_delta_gain ? a.mean_delta_gain : std::optional<double>(0.0);
    bool any = !a.episodes.empty();
    os << detail::pad(row.label, 20)
       << detail::pad(detail::fmt_cell(any ? std::optional<double>(
                                                 a.success_rate)
                                           : std::nullopt,
                                       1, true),
                      8)
       << detail::pad(detail::fmt_cell(a.mean_eta, 2), 8)
       << detail::pad(detail::fmt_cell(a.mean_rho, 1, true), 9)
       << detail::pad(detail::fmt_cell(any ? delta : std::nullopt, 2), 8)
       << detail::pad(detail::fmt_cell(any ? std::optional<double>(a.mean_err)
                                           : std::nullopt,
                                       1, true),
                      8)
       << detail::pad(detail::fmt_cell(a.mean_outline_len, 1), 6)
       << detail::pad(detail::fmt_cell(any ? std::optional<double>(
                                                 a.mean_traj_len)
                                           : std::nullopt,
                                       1),
                      8)
       << "\n";
  }
  return os.str();
}

/// Node lifecycle CSV across all episodes of each row, for timeline plots.
inline std::string render_lifecycle_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream os;
  os << "model,episode,node,t_start,t_end\n";
  for (const auto& row : rows) {
    for (std::size_t ep = 0; ep < row.aggregate.episodes.size(); ++ep)
      for (const auto& e : row.aggregate.episodes[ep].lifecycle)
        os << row.label << "," << ep << "," << e.node_id << "," << e.t_start
           << "," << e.t_end << "\n";
  }
  return os.str();
}

inline ordered_json aggregate_to_json(const AggregateReport& a) {
  ordered_json j;
  auto opt = [](std::optional<double> v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  j["success_rate"] = a.success_rate;
  j["mean_eta"] = opt(a.mean_eta);
  j["mean_rho"] = opt(a.mean_rho);
  j["mean_refine_rho"] = opt(a.mean_refine_rho);
  j["mean_delta_gain"] = opt(a.mean_delta_gain);
  j["mean_err"] = a.mean_err;
  j["mean_outline_len"] = opt(a.mean_outline_len);
  j["mean_traj_len"] = a.mean_traj_len;
  j["median_t_start"] = opt(a.median_t_start);
  j["median_t_end"] = opt(a.median_t_end);
  j["delta_med"] = opt(a.delta_med);
  j["episodes"] = ordered_json::array();
  for (const auto& m : a.episodes) j["episodes"].push_back(metrics_to_json(m));
  return j;
}

}  // namespace ravel
