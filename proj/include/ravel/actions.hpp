// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <variant>

#include "ravel/common.hpp"
#include "ravel/state.hpp"

namespace ravel {

enum class ActionKind { outline, draft, review, refine, finish };

inline std::string to_string(ActionKind k) {
  switch (k) {
    case ActionKind::outline: return "outline";
    case ActionKind::draft: return "draft";
    case ActionKind::review: return "review";
    case ActionKind::refine: return "refine";
    case ActionKind::finish: return "finish";
  }
  return "outline";
}

inline ActionKind action_kind_from_string(const std::string& s) {
  if (s == "outline") return ActionKind::outline;
  if (s == "draft") return ActionKind::draft;
  if (s == "review") return ActionKind::review;
  if (s == "refine") return ActionKind::refine;
  if (s == "finish") return ActionKind::finish;
  throw std::invalid_argument("unknown action kind: " + s);
}

enum class ActionErrorKind {
  malformed_payload,
  unknown_action,
  missing_param,
  invalid_target,
  illegal_in_state,
};

inline std::string to_string(ActionErrorKind k) {
  switch (k) {
    case ActionErrorKind::malformed_payload: return "malformed_payload";
    case ActionErrorKind::unknown_action: return "unknown_action";
    case ActionErrorKind::missing_param: return "missing_param";
    case ActionErrorKind::invalid_target: return "invalid_target";
    case ActionErrorKind::illegal_in_state: return "illegal_in_state";
  }
  return "malformed_payload";
}

inline ActionErrorKind action_error_kind_from_string(const std::string& s) {
  if (s == "malformed_payload") return ActionErrorKind::malformed_payload;
  if (s == "unknown_action") return ActionErrorKind::unknown_action;
  if (s == "missing_param") return ActionErrorKind::missing_param;
  if (s == "invalid_target") return ActionErrorKind::invalid_target;
  if (s == "illegal_in_state") return ActionErrorKind::illegal_in_state;
  throw std::invalid_argument("unknown action error kind: " + s);
}

struct ActionError {
  ActionErrorKind kind;
  std::string detail;
};

struct PolicyEmission {
  std::string thought;
  std::string action;  // raw tool name, pre-validation
  json params = json::object();
  std::string raw;  // the full original model output, preserved verbatim
};

struct ValidatedAction {
  ActionKind kind;
  std::optional<int> section_id;
  json params = json::object();
};

/// Extracts thought/action/params from the first balanced JSON object in the
/// raw text. The original output is always preserved for the trajectory log.
inline std::variant<PolicyEmission, ActionError> parse_emission(
    const std::string& raw_text) {
  auto obj = extract_json_object(raw_text);
  if (!obj)
    return ActionError{ActionErrorKind::malformed_payload,
                       "no balanced JSON object found in output"};
  if (!obj->contains("action") || !(*obj)["action"].is_string())
    return ActionError{ActionErrorKind::malformed_payload,
                       "object is missing a string `action` key"};
  PolicyEmission e;
  e.raw = raw_text;
  e.action = (*obj)["action"].get<std::string>();
  if (obj->contains("thought") && (*obj)["thought"].is_string())
    e.thought = (*obj)["thought"].get<std::string>();
  if (obj->contains("params") && (*obj)["params"].is_object())
    e.params = (*obj)["params"];
  return e;
}

/// Maps a tool name (prompt alias or canonical name) to the canonical kind.
inline std::optional<ActionKind> canonicalize_tool_name(
    const std::string& name) {
  if (name == "plan_outline" || name == "outline") return ActionKind::outline;
  if (name == "write_paragraph" || name == "draft") return ActionKind::draft;
  if (name == "review_content" || name == "review") return ActionKind::review;
  if (name == "revise_paragraph" || name == "refine") return ActionKind::refine;
  if (name == "finish") return ActionKind::finish;
  return std::nullopt;
}

namespace detail {
inline std::optional<int> read_section_id(const json& params) {
  if (!params.contains("section_id")) return std::nullopt;
  const auto& v = params["section_id"];
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    try {
      return std::stoi(v.get<std::string>());
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}
}  // namespace detail

/// Pure validation of a parsed emission against the current state. Every
/// failure maps to exactly one ActionError member (ERR accounting depends on
/// this being total).
inline std::variant<ValidatedAction, ActionError> validate(
    const PolicyEmission& emission, const WritingState& state) {
  auto kind = canonicalize_tool_name(emission.action);
  if (!kind)
    return ActionError{ActionErrorKind::unknown_action,
                       "unknown tool name: " + emission.action};

  ValidatedAction act;
  act.kind = *kind;
  act.params = emission.params;

  switch (*kind) {
    case ActionKind::outline:
      return act;  // re-planning is always legal; the event is recorded
    case ActionKind::finish:
      if (state.outline.empty())
        return ActionError{ActionErrorKind::illegal_in_state,
                           "finish before any outline exists"};
      return act;
    default:
      break;
  }

  auto id = detail::read_section_id(emission.params);
  if (!id)
    return ActionError{ActionErrorKind::missing_param,
                       to_string(*kind) + " requires params.section_id"};
  const auto* node = state.find_node(*id);
  if (!node)
    return ActionError{ActionErrorKind::invalid_target,
                       "section_id " + std::to_string(*id) +
                           " is not in the outline"};
  act.section_id = *id;

  NodeStatus required = *kind == ActionKind::draft ? NodeStatus::pending
                        : *kind == ActionKind::review
                            ? NodeStatus::drafted
                            : NodeStatus::revision_needed;
  if (node->status != required)
    return ActionError{ActionErrorKind::illegal_in_state,
                       to_string(*kind) + " requires status " +
                           to_string(required) + " but node " +
                           std::to_string(*id) + " is " +
                           to_string(node->status)};
  return act;
}

}  // namespace ravel
