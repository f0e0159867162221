// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ravel/orchestrator.hpp"

namespace ravel {

inline constexpr const char* kTrajectorySchema = "ravel.trajectory.v1";
inline constexpr const char* kConfigSchema = "ravel.config.v1";

inline ordered_json step_to_json(const TrajectoryStep& step) {
  ordered_json j;
  j["index"] = step.index;
  j["emission"] = {{"thought", step.emission.thought},
                   {"action", step.emission.action},
                   {"params", step.emission.params},
                   {"raw", step.emission.raw}};
  if (step.is_valid()) {
    j["validated"] = {{"ok", true},
                      {"kind", to_string(std::get<ActionKind>(step.validated))}};
  } else {
    const auto& err = std::get<ActionError>(step.validated);
    j["validated"] = {{"ok", false},
                      {"error", to_string(err.kind)},
                      {"detail", err.detail}};
  }
  if (step.target) j["target"] = *step.target;
  if (step.result) {
    ordered_json r;
    std::visit(
        [&](const auto& payload) {
          using T = std::decay_t<decltype(payload)>;
          if constexpr (std::is_same_v<T, OutlinePayload>) {
            r["title"] = payload.title;
            r["outline"] = ordered_json::array();
            for (const auto& [title, points] : payload.nodes)
              r["outline"].push_back(
                  {{"section_title", title}, {"points", points}});
          } else if constexpr (std::is_same_v<T, DraftPayload>) {
            r["content"] = payload.content;
            r["summary"] = payload.summary;
          } else if constexpr (std::is_same_v<T, ReviewPayload>) {
            r["score"] = payload.score;
            r["feedback"] = payload.feedback;
            r["clamped"] = payload.clamped;
          } else if constexpr (std::is_same_v<T, RefinePayload>) {
            r["revised_content"] = payload.revised_content;
            r["change_log"] = payload.change_log;
          }
        },
        step.result->payload);
    r["raw"] = step.result->raw;
    j["result"] = r;
  }
  if (step.is_valid() &&
      std::get<ActionKind>(step.validated) == ActionKind::finish)
    j["early_finish"] = step.early_finish;
  j["state_digest"] = step.state_digest;
  j["status_deltas"] = ordered_json::array();
  for (const auto& d : step.status_deltas)
    j["status_deltas"].push_back({d.node_id, d.from, d.to});
  j["usage"] = {{"prompt_tokens", step.usage.prompt_tokens},
                {"completion_tokens", step.usage.completion_tokens}};
  return j;
}

inline TrajectoryStep step_from_json(const json& j) {
  TrajectoryStep step;
  step.index = j.at("index").get<int>();
  step.emission.thought = j.at("emission").at("thought").get<std::string>();
  step.emission.action = j.at("emission").at("action").get<std::string>();
  step.emission.params = j.at("emission").at("params");
  step.emission.raw = j.at("emission").at("raw").get<std::string>();
  if (j.at("validated").at("ok").get<bool>()) {
    step.validated =
        action_kind_from_string(j["validated"]["kind"].get<std::string>());
  } else {
    step.validated = ActionError{
        action_error_kind_from_string(j["validated"]["error"].get<std::string>()),
        j["validated"]["detail"].get<std::string>()};
  }
  if (j.contains("target")) step.target = j["target"].get<int>();
  if (j.contains("result")) {
    const auto& r = j["result"];
    PrimitiveResult pr;
    pr.raw = r.value("raw", "");
    if (r.contains("outline")) {
      OutlinePayload p;
      p.title = r.value("title", "");
      for (const auto& node : r["outline"])
        p.nodes.emplace_back(node["section_title"].get<std::string>(),
                             node["points"].get<std::string>());
      pr.kind = ActionKind::outline;
      pr.payload = std::move(p);
    } else if (r.contains("score")) {
      pr.kind = ActionKind::review;
      pr.payload = ReviewPayload{r["score"].get<double>(),
                                 r.value("feedback", ""),
                                 r.value("clamped", false)};
    } else if (r.contains("revised_content")) {
      pr.kind = ActionKind::refine;
      pr.payload = RefinePayload{r["revised_content"].get<std::string>(),
                                 r.value("change_log", "")};
    } else {
      pr.kind = ActionKind::draft;
      pr.payload =
          DraftPayload{r.value("content", ""), r.value("summary", "")};
    }
    step.result = std::move(pr);
  }
  step.early_finish = j.value("early_finish", false);
  step.state_digest = j.at("state_digest").get<std::string>();
  for (const auto& d : j.at("status_deltas"))
    step.status_deltas.push_back({d.at(0).get<int>(),
                                  d.at(1).get<std::string>(),
                                  d.at(2).get<std::string>()});
  step.usage = {j.at("usage").at("prompt_tokens").get<int>(),
                j.at("usage").at("completion_tokens").get<int>()};
  return step;
}

inline ordered_json config_to_json(const RunConfig& c) {
  ordered_json j;
  j["schema"] = kConfigSchema;
  j["topic"] = c.meta.topic;
  j["style_guide"] = c.meta.style_guide;
  j["tau"] = c.tau;
  j["t_max"] = c.t_max;
  j["temperature"] = c.temperature;
  j["parallel_episodes"] = c.parallel_episodes;
  auto binding = [](const ProviderBinding& b) {
    return ordered_json{{"endpoint", b.endpoint},
                        {"model", b.model_name},
                        {"credential_env", b.credential_env},
                        {"retry_budget", b.retry_budget},
                        {"timeout_ms", b.timeout_ms}};
  };
  j["policy"] = binding(c.policy_binding);
  j["operator"] = binding(c.operator_binding);
  return j;
}

/// Strict parse: unknown keys are errors, not warnings.
inline RunConfig config_from_json(const json& j) {
  static const std::vector<std::string> known = {
      "schema",      "topic",    "style_guide",       "tau",
      "t_max",       "temperature", "parallel_episodes", "policy",
      "operator"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("unknown config key: " + key);
  }
  if (j.value("schema", "") != kConfigSchema)
    throw std::invalid_argument("config schema must be " +
                                std::string(kConfigSchema));
  RunConfig c;
  c.meta.topic = j.at("topic").get<std::string>();
  c.meta.style_guide = j.at("style_guide").get<std::string>();
  c.tau = j.value("tau", 8.0);
  c.t_max = j.value("t_max", 50);
  c.temperature = j.value("temperature", 0.7);
  c.parallel_episodes = j.value("parallel_episodes", 1);
  auto binding = [](const json& b) {
    ProviderBinding out;
    out.endpoint = b.value("endpoint", "");
    out.model_name = b.value("model", "");
    out.credential_env = b.value("credential_env", "");
    out.retry_budget = b.value("retry_budget", 3);
    out.timeout_ms = b.value("timeout_ms", 60000);
    return out;
  };
  if (j.contains("policy")) c.policy_binding = binding(j["policy"]);
  if (j.contains("operator")) c.operator_binding = binding(j["operator"]);
  return c;
}

// ---------------------------------------------------------------------------
// Run directory layout: runs/<run_id>/{config.json, trajectory.jsonl,
// final_state.json, manuscript.md, episode.meta.json}

inline void write_trajectory(const std::filesystem::path& path,
                             const EpisodeRecord& record) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  ordered_json marker;
  marker["schema"] = kTrajectorySchema;
  marker["tau"] = record.config.tau;
  marker["t_max"] = record.config.t_max;
  out << marker.dump() << "\n";
  for (const auto& step : record.steps) out << step_to_json(step).dump() << "\n";
}

inline std::string render_manuscript(const WritingState& state) {
  std::ostringstream os;
  if (state.title) os << "# " << *state.title << "\n";
  for (const auto& node : state.outline) {
    os << "\n## " << node.section_title << "\n\n";
    auto it = state.manuscript.find(node.id);
    if (it != state.manuscript.end()) os << it->second.content << "\n";
  }
  return os.str();
}

inline void write_run_dir(const std::filesystem::path& dir,
                          const EpisodeRecord& record,
                          const std::string& command = "run") {
  std::filesystem::create_directories(dir);
  auto dump_file = [&](const char* name, const std::string& body) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << body;
  };
  auto config_json = config_to_json(record.config);
  dump_file("config.json", config_json.dump(2) + "\n");
  write_trajectory(dir / "trajectory.jsonl", record);
  dump_file("final_state.json",
            state_to_json(record.final_state).dump(2) + "\n");
  dump_file("manuscript.md", render_manuscript(record.final_state));

  ordered_json meta;
  meta["schema"] = "ravel.episode.v1";
  meta["run_id"] = dir.filename().string();
  meta["command"] = command;
  meta["config_digest"] = hex_digest(config_json.dump());
  meta["template_version"] = prompts::kTemplateVersion;
  meta["outcome"] = to_string(record.outcome);
  meta["early_finish"] = record.early_finish;
  meta["steps"] = record.steps.size();
  meta["wall_time_s"] = record.wall_time_s;
  if (!record.error.empty()) meta["error"] = record.error;
  dump_file("episode.meta.json", meta.dump(2) + "\n");
}

}  // namespace ravel
