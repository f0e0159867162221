// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ravel/actions.hpp"
#include "ravel/prompts.hpp"
#include "ravel/provider.hpp"
#include "ravel/template_engine.hpp"

namespace ravel {

struct OutlinePayload {
  std::string title;
  std::vector<std::pair<std::string, std::string>> nodes;  // (title, points)
};

struct DraftPayload {
  std::string content;
  std::string summary;
};

struct ReviewPayload {
  double score = 0;       // clamped into [1,10]
  std::string feedback;
  bool clamped = false;   // out-of-range numeric was clamped, warning logged
};

struct RefinePayload {
  std::string revised_content;
  std::string change_log;
};

using PrimitivePayload =
    std::variant<OutlinePayload, DraftPayload, ReviewPayload, RefinePayload>;

struct PrimitiveResult {
  ActionKind kind;
  PrimitivePayload payload;
  std::string raw;  // operator output text
  Usage usage;
};

/// Per-call knobs for operator requests.
struct CallConfig {
  std::string model_name;
  double temperature = 0.7;
  std::optional<int> max_output;
};

namespace detail {

inline ChatRequest make_request(const CallConfig& cfg, std::string prompt) {
  ChatRequest r;
  r.model_name = cfg.model_name;
  r.temperature = cfg.temperature;
  r.max_output = cfg.max_output;
  r.messages.push_back({"user", std::move(prompt)});
  return r;
}

/// Calls the operator and parses its reply; on parse failure issues one
/// corrective re-ask before giving up.
template <typename ParseFn>
std::variant<PrimitiveResult, ActionError> call_and_parse(
    Provider& op, const CallConfig& cfg, const std::string& prompt,
    ActionKind kind, ParseFn&& parse) {
  ChatRequest request = make_request(cfg, prompt);
  std::string last_error;
  Usage usage{};
  std::string raw;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ChatResponse response = op.complete(request);
    raw = response.text;
    if (response.usage) {
      usage.prompt_tokens += response.usage->prompt_tokens;
      usage.completion_tokens += response.usage->completion_tokens;
    }
    auto parsed = parse(raw);
    if (std::holds_alternative<PrimitivePayload>(parsed)) {
      PrimitiveResult result;
      result.kind = kind;
      result.payload = std::get<PrimitivePayload>(std::move(parsed));
      result.raw = raw;
      result.usage = usage;
      return result;
    }
    last_error = std::get<std::string>(parsed);
    request.messages.push_back({"assistant", raw});
    request.messages.push_back(
        {"user", "Your previous reply could not be parsed (" + last_error +
                     "). Reply again with only the required JSON object."});
  }
  return ActionError{ActionErrorKind::malformed_payload,
                     "operator reply unparsable after re-ask: " + last_error};
}

using ParseOutcome = std::variant<PrimitivePayload, std::string>;

inline ParseOutcome parse_outline_reply(const std::string& raw) {
  auto obj = extract_json_object(raw);
  if (!obj) return std::string("no JSON object");
  if (!obj->contains("title") || !(*obj)["title"].is_string())
    return std::string("missing `title` key");
  if (!obj->contains("outline") || !(*obj)["outline"].is_array() ||
      (*obj)["outline"].empty())
    return std::string("missing or empty `outline` array");
  OutlinePayload p;
  p.title = (*obj)["title"].get<std::string>();
  for (const auto& node : (*obj)["outline"]) {
    if (!node.contains("section_title") || !node.contains("points"))
      return std::string("outline entry missing section_title/points");
    p.nodes.emplace_back(node["section_title"].get<std::string>(),
                         node["points"].get<std::string>());
  }
  return PrimitivePayload{std::move(p)};
}

inline ParseOutcome parse_draft_reply(const std::string& raw) {
  auto obj = extract_json_object(raw);
  if (!obj) return std::string("no JSON object");
  if (!obj->contains("content") || !(*obj)["content"].is_string() ||
      (*obj)["content"].get<std::string>().empty())
    return std::string("missing `content` key");
  if (!obj->contains("summary") || !(*obj)["summary"].is_string())
    return std::string("missing `summary` key");
  return PrimitivePayload{DraftPayload{(*obj)["content"].get<std::string>(),
                                       (*obj)["summary"].get<std::string>()}};
}

inline ParseOutcome parse_review_reply(const std::string& raw) {
  auto obj = extract_json_object(raw);
  if (!obj) return std::string("no JSON object");
  if (!obj->contains("score")) return std::string("missing `score` key");
  double score;
  const auto& v = (*obj)["score"];
  if (v.is_number()) {
    score = v.get<double>();
  } else if (v.is_string()) {
    try {
      score = std::stod(v.get<std::string>());
    } catch (const std::exception&) {
      return std::string("non-numeric score");
    }
  } else {
    return std::string("non-numeric score");
  }
  ReviewPayload p;
  p.score = std::clamp(score, 1.0, 10.0);
  p.clamped = p.score != score;
  if (obj->contains("feedback") && (*obj)["feedback"].is_string())
    p.feedback = (*obj)["feedback"].get<std::string>();
  return PrimitivePayload{std::move(p)};
}

inline ParseOutcome parse_refine_reply(const std::string& raw) {
  auto obj = extract_json_object(raw);
  if (!obj) return std::string("no JSON object");
  if (!obj->contains("revised_content") ||
      !(*obj)["revised_content"].is_string() ||
      (*obj)["revised_content"].get<std::string>().empty())
    return std::string("missing `revised_content` key");
  RefinePayload p;
  p.revised_content = (*obj)["revised_content"].get<std::string>();
  if (obj->contains("change_log") && (*obj)["change_log"].is_string())
    p.change_log = (*obj)["change_log"].get<std::string>();
  return PrimitivePayload{std::move(p)};
}

}  // namespace detail

// Prompt renderers are exposed separately so snapshot tests can pin the
// rendered bytes without a provider.

inline std::string render_outline_prompt(const prompts::TemplateSet& t,
                                         const std::string& topic,
                                         const std::string& style_guide) {
  return render_template(t.outline,
                         {{"topic", topic}, {"style_guide", style_guide}});
}

inline std::string render_draft_prompt(const prompts::TemplateSet& t,
                                       const std::string& topic,
                                       const std::string& style_guide,
                                       const OutlineNode& node,
                                       const std::string& prev_summary) {
  return render_template(t.draft, {{"topic", topic},
                                   {"style_guide", style_guide},
                                   {"section_title", node.section_title},
                                   {"points", node.points},
                                   {"prev_summary", prev_summary}});
}

inline std::string render_review_prompt(const prompts::TemplateSet& t,
                                        const std::string& style_guide,
                                        const OutlineNode& node,
                                        const std::string& content,
                                        const std::string& prev_summary) {
  return render_template(t.review, {{"style_guide", style_guide},
                                    {"points", node.points},
                                    {"content", content},
                                    {"prev_summary", prev_summary}});
}

inline std::string render_refine_prompt(const prompts::TemplateSet& t,
                                        const std::string& style_guide,
                                        const OutlineNode& node,
                                        const std::string& content,
                                        const std::string& feedback) {
  return render_template(t.refine, {{"content", content},
                                    {"feedback", feedback},
                                    {"points", node.points},
                                    {"style_guide", style_guide}});
}

inline std::variant<PrimitiveResult, ActionError> run_outline(
    Provider& op, const CallConfig& cfg, const prompts::TemplateSet& t,
    const std::string& topic, const std::string& style_guide) {
  return detail::call_and_parse(op, cfg,
                                render_outline_prompt(t, topic, style_guide),
                                ActionKind::outline,
                                detail::parse_outline_reply);
}

/// prev_summary is the stored summary of the immediately preceding outline
/// node, or the literal token "None" for the first node.
inline std::variant<PrimitiveResult, ActionError> run_draft(
    Provider& op, const CallConfig& cfg, const prompts::TemplateSet& t,
    const std::string& topic, const std::string& style_guide,
    const OutlineNode& node, const std::string& prev_summary) {
  return detail::call_and_parse(
      op, cfg, render_draft_prompt(t, topic, style_guide, node, prev_summary),
      ActionKind::draft, detail::parse_draft_reply);
}

inline std::variant<PrimitiveResult, ActionError> run_review(
    Provider& op, const CallConfig& cfg, const prompts::TemplateSet& t,
    const std::string& style_guide, const OutlineNode& node,
    const std::string& content, const std::string& prev_summary) {
  return detail::call_and_parse(
      op, cfg, render_review_prompt(t, style_guide, node, content, prev_summary),
      ActionKind::review, detail::parse_review_reply);
}

inline std::variant<PrimitiveResult, ActionError> run_refine(
    Provider& op, const CallConfig& cfg, const prompts::TemplateSet& t,
    const std::string& style_guide, const OutlineNode& node,
    const std::string& content, const std::string& feedback) {
  return detail::call_and_parse(
      op, cfg, render_refine_prompt(t, style_guide, node, content, feedback),
      ActionKind::refine, detail::parse_refine_reply);
}

}  // namespace ravel
