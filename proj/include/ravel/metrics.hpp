// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "ravel/orchestrator.hpp"

namespace ravel {

struct LifecycleEntry {
  int node_id;
  int t_start;  // index of the first draft on the node, t_max if never drafted
  int t_end;    // index where the node last became completed, t_max if never
};

struct EpisodeMetrics {
  bool success = false;       // per-episode indicator of the terminal action
  int traj_len = 0;           // counts all steps: outline, finish, invalid
  std::optional<int> outline_len;  // final outline's n; absent if never planned
  std::optional<double> eta;       // traj_len / outline_len
  std::optional<double> rho;       // review actions / outline_len
  std::optional<double> refine_rho;  // companion refine-count density
  std::vector<std::pair<double, double>> delta_pairs;  // (r_before, r_after)
  std::optional<double> delta_gain;  // mean pair difference; absent if no pair
  int invalid_steps = 0;
  double err_rate = 0;  // invalid / total
  int replans = 0;
  bool early_finish = false;
  std::vector<LifecycleEntry> lifecycle;

  bool operator==(const EpisodeMetrics& other) const {
    auto lc_eq = [](const std::vector<LifecycleEntry>& a,
                    const std::vector<LifecycleEntry>& b) {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].node_id != b[i].node_id || a[i].t_start != b[i].t_start ||
            a[i].t_end != b[i].t_end)
          return false;
      return true;
    };
    return success == other.success && traj_len == other.traj_len &&
           outline_len == other.outline_len && eta == other.eta &&
           rho == other.rho && refine_rho == other.refine_rho &&
           delta_pairs == other.delta_pairs && delta_gain == other.delta_gain &&
           invalid_steps == other.invalid_steps &&
           err_rate == other.err_rate && replans == other.replans &&
           early_finish == other.early_finish &&
           lc_eq(lifecycle, other.lifecycle);
  }
};

struct AggregateReport {
  double success_rate = 0;                 // S
  std::optional<double> mean_eta;
  std::optional<double> mean_rho;
  std::optional<double> mean_refine_rho;
  std::optional<double> mean_delta_gain;   // over episodes with pairs only
  double mean_err = 0;
  std::optional<double> mean_outline_len;
  double mean_traj_len = 0;
  std::optional<double> median_t_start;
  std::optional<double> median_t_end;
  std::optional<double> delta_med;  // median t_end - median t_start
  std::vector<EpisodeMetrics> episodes;
};

namespace detail {

inline std::optional<double> median(std::vector<double> xs) {
  if (xs.empty()) return std::nullopt;
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

}  // namespace detail

inline EpisodeMetrics compute_episode_metrics(const EpisodeRecord& record,
                                              double tau) {
  (void)tau;  // thresholding already happened during the episode
  EpisodeMetrics m;
  m.traj_len = static_cast<int>(record.steps.size());
  m.early_finish = record.early_finish;

  int reviews = 0;
  int refines = 0;
  int outlines = 0;
  // Per-node event streams for delta pairing and lifecycle. A re-plan clears
  // the manuscript and reuses node ids, so node-level events only count from
  // the final outline installation onward; action totals stay global.
  int last_outline_step = -1;
  for (const auto& step : record.steps)
    if (step.is_valid() &&
        std::get<ActionKind>(step.validated) == ActionKind::outline)
      last_outline_step = step.index;

  struct NodeEvents {
    std::vector<std::pair<int, double>> review_scores;  // (step idx, score)
    std::vector<int> refine_steps;
    std::optional<int> first_draft;
    std::optional<int> last_completed;
  };
  std::map<int, NodeEvents> events;

  for (const auto& step : record.steps) {
    if (!step.is_valid()) {
      ++m.invalid_steps;
      continue;
    }
    auto kind = std::get<ActionKind>(step.validated);
    switch (kind) {
      case ActionKind::finish:
        m.success = true;
        break;
      case ActionKind::outline:
        ++outlines;
        break;
      case ActionKind::review: {
        ++reviews;
        if (step.target && step.result && step.index > last_outline_step) {
          const auto& payload = std::get<ReviewPayload>(step.result->payload);
          events[*step.target].review_scores.emplace_back(step.index,
                                                          payload.score);
        }
        break;
      }
      case ActionKind::refine:
        ++refines;
        if (step.target && step.index > last_outline_step)
          events[*step.target].refine_steps.push_back(step.index);
        break;
      case ActionKind::draft:
        if (step.target && step.index > last_outline_step &&
            !events[*step.target].first_draft)
          events[*step.target].first_draft = step.index;
        break;
    }
    if (step.index > last_outline_step)
      for (const auto& d : step.status_deltas)
        if (d.to == "completed") events[d.node_id].last_completed = step.index;
  }

  m.err_rate = m.traj_len == 0
                   ? 0.0
                   : static_cast<double>(m.invalid_steps) / m.traj_len;
  m.replans = outlines > 1 ? outlines - 1 : 0;

  if (!record.final_state.outline.empty()) {
    int n = static_cast<int>(record.final_state.outline.size());
    m.outline_len = n;
    m.eta = static_cast<double>(m.traj_len) / n;
    m.rho = static_cast<double>(reviews) / n;
    m.refine_rho = static_cast<double>(refines) / n;
  }

  // Delta pairing: each refine of node i pairs the last review score before
  // it with the first review score after it; refines with no subsequent
  // review contribute nothing.
  for (const auto& [node_id, ev] : events) {
    for (int refine_step : ev.refine_steps) {
      std::optional<double> before, after;
      for (const auto& [idx, score] : ev.review_scores) {
        if (idx < refine_step)
          before = score;
        else if (idx > refine_step && !after)
          after = score;
      }
      if (before && after) m.delta_pairs.emplace_back(*before, *after);
    }
  }
  if (!m.delta_pairs.empty()) {
    double sum = 0;
    for (const auto& [r, r2] : m.delta_pairs) sum += r2 - r;
    m.delta_gain = sum / m.delta_pairs.size();
  }

  // Lifecycle is a total function: never-drafted or never-completed nodes
  // map to t_max.
  for (const auto& node : record.final_state.outline) {
    LifecycleEntry e{node.id, record.config.t_max, record.config.t_max};
    auto it = events.find(node.id);
    if (it != events.end()) {
      if (it->second.first_draft) e.t_start = *it->second.first_draft;
      if (it->second.last_completed) e.t_end = *it->second.last_completed;
    }
    m.lifecycle.push_back(e);
  }
  return m;
}

inline AggregateReport aggregate(const std::vector<EpisodeMetrics>& episodes) {
  AggregateReport r;
  r.episodes = episodes;
  if (episodes.empty()) return r;

  int successes = 0;
  double err_sum = 0, traj_sum = 0;
  std::vector<double> etas, rhos, refine_rhos, outline_lens, deltas;
  std::vector<double> t_starts, t_ends;
  for (const auto& m : episodes) {
    successes += m.success ? 1 : 0;
    err_sum += m.err_rate;
    traj_sum += m.traj_len;
    if (m.eta) etas.push_back(*m.eta);
    if (m.rho) rhos.push_back(*m.rho);
    if (m.refine_rho) refine_rhos.push_back(*m.refine_rho);
    if (m.outline_len) outline_lens.push_back(*m.outline_len);
    if (m.delta_gain) deltas.push_back(*m.delta_gain);
    for (const auto& e : m.lifecycle) {
      t_starts.push_back(e.t_start);
      t_ends.push_back(e.t_end);
    }
  }
  double n = static_cast<double>(episodes.size());
  auto mean = [](const std::vector<double>& xs) -> std::optional<double> {
    if (xs.empty()) return std::nullopt;
    double s = 0;
    for (double x : xs) s += x;
    return s / xs.size();
  };
  r.success_rate = successes / n;
  r.mean_err = err_sum / n;
  r.mean_traj_len = traj_sum / n;
  r.mean_eta = mean(etas);
  r.mean_rho = mean(rhos);
  r.mean_refine_rho = mean(refine_rhos);
  r.mean_outline_len = mean(outline_lens);
  r.mean_delta_gain = mean(deltas);  // episodes with empty pair sets excluded
  r.median_t_start = detail::median(t_starts);
  r.median_t_end = detail::median(t_ends);
  if (r.median_t_start && r.median_t_end)
    r.delta_med = *r.median_t_end - *r.median_t_start;
  return r;
}

inline ordered_json metrics_to_json(const EpisodeMetrics& m) {
  ordered_json j;
  j["success"] = m.success;
  j["traj_len"] = m.traj_len;
  j["outline_len"] = m.outline_len ? ordered_json(*m.outline_len) : nullptr;
  j["eta"] = m.eta ? ordered_json(*m.eta) : nullptr;
  j["rho"] = m.rho ? ordered_json(*m.rho) : nullptr;
  j["refine_rho"] = m.refine_rho ? ordered_json(*m.refine_rho) : nullptr;
  j["delta_pairs"] = ordered_json::array();
  for (const auto& [a, b] : m.delta_pairs) j["delta_pairs"].push_back({a, b});
  j["delta_gain"] = m.delta_gain ? ordered_json(*m.delta_gain) : nullptr;
  j["invalid_steps"] = m.invalid_steps;
  j["err_rate"] = m.err_rate;
  j["replans"] = m.replans;
  j["early_finish"] = m.early_finish;
  j["lifecycle"] = ordered_json::array();
  for (const auto& e : m.lifecycle)
    j["lifecycle"].push_back({e.node_id, e.t_start, e.t_end});
  return j;
}

inline EpisodeMetrics metrics_from_json(const json& j) {
  EpisodeMetrics m;
  m.success = j.at("success").get<bool>();
  m.traj_len = j.at("traj_len").get<int>();
  if (!j.at("outline_len").is_null())
    m.outline_len = j["outline_len"].get<int>();
  if (!j.at("eta").is_null()) m.eta = j["eta"].get<double>();
  if (!j.at("rho").is_null()) m.rho = j["rho"].get<double>();
  if (!j.at("refine_rho").is_null())
    m.refine_rho = j["refine_rho"].get<double>();
  for (const auto& p : j.at("delta_pairs"))
    m.delta_pairs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  if (!j.at("delta_gain").is_null())
    m.delta_gain = j["delta_gain"].get<double>();
  m.invalid_steps = j.at("invalid_steps").get<int>();
  m.err_rate = j.at("err_rate").get<double>();
  m.replans = j.at("replans").get<int>();
  m.early_finish = j.at("early_finish").get<bool>();
  for (const auto& e : j.at("lifecycle"))
    m.lifecycle.push_back(
        {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
  return m;
}

}  // namespace ravel
