// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "ravel/metrics.hpp"
#include "ravel/runio.hpp"

namespace ravel {

struct RecountError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Independent metric oracle: recomputes every metric by a naive pass over
/// the raw logged trajectory lines. Shares no logic with
/// compute_episode_metrics; it reads nothing but the JSONL file.
inline EpisodeMetrics brute_force_recount(const std::string& trajectory_path,
                                          double tau) {
  (void)tau;
  std::ifstream in(trajectory_path);
  if (!in) throw RecountError("cannot open " + trajectory_path);

  std::string line;
  if (!std::getline(in, line))
    throw RecountError("empty trajectory file");
  json marker = json::parse(line, nullptr, false);
  if (marker.is_discarded() || marker.value("schema", "") != kTrajectorySchema)
    throw RecountError("line 1: bad schema marker");
  int t_max = marker.at("t_max").get<int>();

  std::vector<json> steps;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw RecountError("line " + std::to_string(lineno) +
                         ": malformed JSON");
    if (!j.contains("index") || !j.contains("validated") ||
        !j.contains("state_digest"))
      throw RecountError("line " + std::to_string(lineno) +
                         ": incomplete step record");
    steps.push_back(std::move(j));
  }

  EpisodeMetrics m;
  m.traj_len = static_cast<int>(steps.size());

  auto kind_of = [](const json& s) -> std::string {
    if (!s["validated"]["ok"].get<bool>()) return "";
    return s["validated"]["kind"].get<std::string>();
  };

  // Final outline size: node list of the last successful outline step.
  int last_outline_idx = -1;
  int final_n = 0;
  for (const auto& s : steps) {
    if (kind_of(s) == "outline") {
      last_outline_idx = s["index"].get<int>();
      final_n = static_cast<int>(s["result"]["outline"].size());
    }
  }

  int reviews = 0, refines = 0, outlines = 0;
  for (const auto& s : steps) {
    std::string k = kind_of(s);
    if (k.empty()) {
      ++m.invalid_steps;
    } else if (k == "review") {
      ++reviews;
    } else if (k == "refine") {
      ++refines;
    } else if (k == "outline") {
      ++outlines;
    } else if (k == "finish") {
      m.success = true;
      m.early_finish = s.value("early_finish", false);
    }
  }
  m.err_rate = steps.empty() ? 0.0
                             : static_cast<double>(m.invalid_steps) /
                                   static_cast<double>(steps.size());
  m.replans = outlines > 1 ? outlines - 1 : 0;
  if (final_n > 0) {
    m.outline_len = final_n;
    m.eta = static_cast<double>(m.traj_len) / final_n;
    m.rho = static_cast<double>(reviews) / final_n;
    m.refine_rho = static_cast<double>(refines) / final_n;
  }

  // Node-level recount for nodes 1..final_n, only after the last re-plan.
  for (int node = 1; node <= final_n; ++node) {
    int t_start = t_max;
    int t_end = t_max;
    for (const auto& s : steps) {
      int idx = s["index"].get<int>();
      if (idx <= last_outline_idx) continue;
      if (kind_of(s) == "draft" && s.value("target", -1) == node &&
          t_start == t_max)
        t_start = idx;
      for (const auto& d : s["status_deltas"])
        if (d[0].get<int>() == node && d[2].get<std::string>() == "completed")
          t_end = idx;
    }
    m.lifecycle.push_back({node, t_start, t_end});

    // Delta pairs: per refine, latest review before and earliest after.
    for (const auto& s : steps) {
      int idx = s["index"].get<int>();
      if (idx <= last_outline_idx) continue;
      if (kind_of(s) != "refine" || s.value("target", -1) != node) continue;
      bool have_before = false, have_after = false;
      double before = 0, after = 0;
      for (const auto& r : steps) {
        int ridx = r["index"].get<int>();
        if (ridx <= last_outline_idx) continue;
        if (kind_of(r) != "review" || r.value("target", -1) != node) continue;
        if (!r.contains("result")) continue;
        double score = r["result"]["score"].get<double>();
        if (ridx < idx) {
          before = score;
          have_before = true;
        } else if (ridx > idx && !have_after) {
          after = score;
          have_after = true;
        }
      }
      if (have_before && have_after) m.delta_pairs.emplace_back(before, after);
    }
  }
  if (!m.delta_pairs.empty()) {
    double sum = 0;
    for (const auto& [a, b] : m.delta_pairs) sum += b - a;
    m.delta_gain = sum / m.delta_pairs.size();
  }
  return m;
}

}  // namespace ravel
