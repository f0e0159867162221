// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ravel/common.hpp"

namespace ravel {

struct StyleMeta {
  std::string topic;        // T
  std::string style_guide;  // G: genre + constraints
};

enum class NodeStatus { pending, drafted, revision_needed, completed };

inline std::string to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::pending: return "pending";
    case NodeStatus::drafted: return "drafted";
    case NodeStatus::revision_needed: return "revision_needed";
    case NodeStatus::completed: return "completed";
  }
  return "pending";
}

inline NodeStatus node_status_from_string(const std::string& s) {
  if (s == "pending") return NodeStatus::pending;
  if (s == "drafted") return NodeStatus::drafted;
  if (s == "revision_needed") return NodeStatus::revision_needed;
  if (s == "completed") return NodeStatus::completed;
  throw std::invalid_argument("unknown node status: " + s);
}

struct OutlineNode {
  int id = 0;  // dense positive integers in outline order
  std::string section_title;
  std::string points;
  NodeStatus status = NodeStatus::pending;
};

struct ManuscriptNode {
  int section_id = 0;
  std::string content;
  std::string summary;  // hand-off digest for the next section
  std::optional<double> score;
  std::string feedback;
};

struct WritingState {
  StyleMeta meta;
  std::optional<std::string> title;
  std::vector<OutlineNode> outline;
  std::map<int, ManuscriptNode> manuscript;

  const OutlineNode* find_node(int id) const {
    for (const auto& n : outline)
      if (n.id == id) return &n;
    return nullptr;
  }
  OutlineNode* find_node(int id) {
    for (auto& n : outline)
      if (n.id == id) return &n;
    return nullptr;
  }
};

struct IllegalTransition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline WritingState init_state(StyleMeta meta) {
  if (meta.topic.empty()) throw std::invalid_argument("topic must be non-empty");
  if (meta.style_guide.empty())
    throw std::invalid_argument("style_guide must be non-empty");
  WritingState s;
  s.meta = std::move(meta);
  return s;
}

/// Replaces the outline wholesale. Re-planning discards the manuscript; the
/// orchestrator records the event so metrics can flag it.
inline void install_outline(
    WritingState& state, std::string title,
    const std::vector<std::pair<std::string, std::string>>& nodes) {
  if (nodes.empty()) throw std::invalid_argument("outline must be non-empty");
  state.title = std::move(title);
  state.outline.clear();
  state.manuscript.clear();
  int next_id = 1;
  for (const auto& [section_title, points] : nodes) {
    state.outline.push_back(
        {next_id++, section_title, points, NodeStatus::pending});
  }
}

inline void set_draft(WritingState& state, int section_id, std::string content,
                      std::string summary) {
  auto* node = state.find_node(section_id);
  if (!node) throw IllegalTransition("unknown section id");
  if (node->status != NodeStatus::pending)
    throw IllegalTransition("draft requires a pending node");
  auto& m = state.manuscript[section_id];
  m.section_id = section_id;
  m.content = std::move(content);
  m.summary = std::move(summary);
  m.score.reset();
  m.feedback.clear();
  node->status = NodeStatus::drafted;
}

/// Threshold check is inclusive: score >= tau completes the node.
inline NodeStatus apply_review_outcome(WritingState& state, int section_id,
                                       double score, std::string feedback,
                                       double tau) {
  auto* node = state.find_node(section_id);
  if (!node) throw IllegalTransition("unknown section id");
  if (node->status != NodeStatus::drafted)
    throw IllegalTransition("review requires a drafted node");
  if (score < 1.0 || score > 10.0)
    throw std::invalid_argument("score out of [1,10]");
  auto& m = state.manuscript.at(section_id);
  m.score = score;
  m.feedback = std::move(feedback);
  node->status =
      score >= tau ? NodeStatus::completed : NodeStatus::revision_needed;
  return node->status;
}

/// Replaces content and returns the node to the drafted state. The live score
/// is cleared; history stays in the trajectory.
inline void apply_refine(WritingState& state, int section_id,
                         std::string revised_content) {
  auto* node = state.find_node(section_id);
  if (!node) throw IllegalTransition("unknown section id");
  if (node->status != NodeStatus::revision_needed)
    throw IllegalTransition("refine requires a revision_needed node");
  auto& m = state.manuscript.at(section_id);
  m.content = std::move(revised_content);
  m.score.reset();
  node->status = NodeStatus::drafted;
}

/// False on an empty outline: the policy cannot finish before planning.
inline bool all_completed(const WritingState& state) {
  if (state.outline.empty()) return false;
  for (const auto& n : state.outline)
    if (n.status != NodeStatus::completed) return false;
  return true;
}

/// Canonical serialization. This exact rendering is embedded in the policy
/// observation prompt, so key names and order are part of the protocol.
inline ordered_json state_to_json(const WritingState& state) {
  ordered_json j;
  j["meta"]["topic"] = state.meta.topic;
  j["meta"]["style_guide"] = state.meta.style_guide;
  if (state.title)
    j["title"] = *state.title;
  else
    j["title"] = nullptr;
  j["outline"] = ordered_json::array();
  for (const auto& n : state.outline) {
    ordered_json node;
    node["id"] = n.id;
    node["section_title"] = n.section_title;
    node["points"] = n.points;
    node["status"] = to_string(n.status);
    j["outline"].push_back(node);
  }
  j["manuscript"] = ordered_json::object();
  for (const auto& [id, m] : state.manuscript) {
    ordered_json node;
    node["content"] = m.content;
    node["summary"] = m.summary;
    if (m.score)
      node["score"] = *m.score;
    else
      node["score"] = nullptr;
    node["feedback"] = m.feedback;
    j["manuscript"][std::to_string(id)] = node;
  }
  return j;
}

inline WritingState state_from_json(const json& j) {
  WritingState s;
  s.meta.topic = j.at("meta").at("topic").get<std::string>();
  s.meta.style_guide = j.at("meta").at("style_guide").get<std::string>();
  if (j.contains("title") && !j.at("title").is_null())
    s.title = j.at("title").get<std::string>();
  for (const auto& node : j.at("outline")) {
    s.outline.push_back({node.at("id").get<int>(),
                         node.at("section_title").get<std::string>(),
                         node.at("points").get<std::string>(),
                         node_status_from_string(node.at("status"))});
  }
  for (const auto& [key, node] : j.at("manuscript").items()) {
    ManuscriptNode m;
    m.section_id = std::stoi(key);
    m.content = node.at("content").get<std::string>();
    m.summary = node.at("summary").get<std::string>();
    if (!node.at("score").is_null()) m.score = node.at("score").get<double>();
    m.feedback = node.at("feedback").get<std::string>();
    s.manuscript[m.section_id] = std::move(m);
  }
  return s;
}

inline std::string state_digest(const WritingState& state) {
  return hex_digest(state_to_json(state).dump());
}

}  // namespace ravel
