// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <future>
#include <semaphore>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ravel/actions.hpp"
#include "ravel/primitives.hpp"
#include "ravel/prompts.hpp"
#include "ravel/provider.hpp"
#include "ravel/state.hpp"

namespace ravel {

struct RunConfig {
  StyleMeta meta;
  double tau = 8.0;
  int t_max = 50;
  ProviderBinding policy_binding;
  ProviderBinding operator_binding;  // may equal policy_binding
  double temperature = 0.7;
  int parallel_episodes = 1;
};

struct StatusDelta {
  int node_id;
  std::string from;  // "none" for freshly created nodes
  std::string to;
};

struct TrajectoryStep {
  int index = 0;
  PolicyEmission emission;
  std::variant<ActionKind, ActionError> validated;
  std::optional<int> target;
  std::optional<PrimitiveResult> result;
  bool early_finish = false;  // meaningful only on finish steps
  std::string state_digest;
  std::vector<StatusDelta> status_deltas;
  Usage usage;

  bool is_valid() const {
    return std::holds_alternative<ActionKind>(validated);
  }
};

enum class Outcome { finished, budget_exhausted, aborted };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::finished: return "finished";
    case Outcome::budget_exhausted: return "budget_exhausted";
    case Outcome::aborted: return "aborted";
  }
  return "aborted";
}

struct EpisodeRecord {
  RunConfig config;
  std::vector<TrajectoryStep> steps;
  WritingState final_state;
  Outcome outcome = Outcome::budget_exhausted;
  bool early_finish = false;
  double wall_time_s = 0;
  std::string error;  // set when outcome == aborted
};

/// Renders the policy observation: system protocol + canonical state
/// serialization + optional corrective error notice from the previous step.
inline std::string observe(const WritingState& state,
                           const std::optional<ActionError>& last_error,
                           const prompts::TemplateSet& templates) {
  std::string out = "Current WritingState:\n";
  out += state_to_json(state).dump(2);
  out += "\nDecide the next action.";
  if (last_error) {
    out += "\n\n[Previous action failed: " + to_string(last_error->kind) +
           " - " + last_error->detail + ". Correct it in your next action.]";
  }
  (void)templates;
  return out;
}

namespace detail {

inline std::string prev_summary_for(const WritingState& state, int section_id) {
  const OutlineNode* prev = nullptr;
  for (const auto& n : state.outline) {
    if (n.id == section_id) break;
    prev = &n;
  }
  if (!prev) return "None";
  auto it = state.manuscript.find(prev->id);
  if (it == state.manuscript.end() || it->second.summary.empty()) return "None";
  return it->second.summary;
}

}  // namespace detail

/// Algorithm loop: observe state, query policy, validate, dispatch primitive,
/// update state, record trajectory. Every policy emission (valid or invalid)
/// consumes one step of the budget; primitive-internal corrective re-asks do
/// not.
inline EpisodeRecord run_episode(const RunConfig& config, Provider& policy,
                                 Provider& op,
                                 const prompts::TemplateSet& templates = {}) {
  auto start = std::chrono::steady_clock::now();
  EpisodeRecord record;
  record.config = config;
  WritingState state = init_state(config.meta);

  CallConfig policy_cfg{config.policy_binding.model_name, config.temperature,
                        std::nullopt};
  CallConfig op_cfg{config.operator_binding.model_name, config.temperature,
                    std::nullopt};

  std::optional<ActionError> last_error;
  bool finished = false;

  try {
    for (int t = 0; t < config.t_max && !finished; ++t) {
      ChatRequest request;
      request.model_name = policy_cfg.model_name;
      request.temperature = config.temperature;
      request.messages.push_back({"system", templates.policy_system});
      request.messages.push_back({"user", observe(state, last_error, templates)});
      ChatResponse reply = policy.complete(request);

      TrajectoryStep step;
      step.index = t;
      if (reply.usage) step.usage = *reply.usage;
      last_error.reset();

      auto parsed = parse_emission(reply.text);
      if (std::holds_alternative<ActionError>(parsed)) {
        PolicyEmission shell;
        shell.raw = reply.text;
        step.emission = shell;
        step.validated = std::get<ActionError>(parsed);
      } else {
        step.emission = std::get<PolicyEmission>(parsed);
        auto checked = validate(step.emission, state);
        if (std::holds_alternative<ActionError>(checked)) {
          step.validated = std::get<ActionError>(checked);
        } else {
          const auto& act = std::get<ValidatedAction>(checked);
          step.validated = act.kind;
          step.target = act.section_id;

          switch (act.kind) {
            case ActionKind::outline: {
              auto result = run_outline(op, op_cfg, templates,
                                        state.meta.topic,
                                        state.meta.style_guide);
              if (std::holds_alternative<ActionError>(result)) {
                step.validated = std::get<ActionError>(result);
                break;
              }
              auto& pr = std::get<PrimitiveResult>(result);
              const auto& payload = std::get<OutlinePayload>(pr.payload);
              install_outline(state, payload.title, payload.nodes);
              for (const auto& n : state.outline)
                step.status_deltas.push_back({n.id, "none", "pending"});
              step.result = std::move(pr);
              break;
            }
            case ActionKind::draft: {
              const auto* node = state.find_node(*act.section_id);
              auto prev = detail::prev_summary_for(state, node->id);
              auto result = run_draft(op, op_cfg, templates, state.meta.topic,
                                      state.meta.style_guide, *node, prev);
              if (std::holds_alternative<ActionError>(result)) {
                step.validated = std::get<ActionError>(result);
                break;
              }
              auto& pr = std::get<PrimitiveResult>(result);
              const auto& payload = std::get<DraftPayload>(pr.payload);
              set_draft(state, node->id, payload.content, payload.summary);
              step.status_deltas.push_back({node->id, "pending", "drafted"});
              step.result = std::move(pr);
              break;
            }
            case ActionKind::review: {
              const auto* node = state.find_node(*act.section_id);
              const auto& content = state.manuscript.at(node->id).content;
              auto prev = detail::prev_summary_for(state, node->id);
              auto result =
                  run_review(op, op_cfg, templates, state.meta.style_guide,
                             *node, content, prev);
              if (std::holds_alternative<ActionError>(result)) {
                step.validated = std::get<ActionError>(result);
                break;
              }
              auto& pr = std::get<PrimitiveResult>(result);
              const auto& payload = std::get<ReviewPayload>(pr.payload);
              auto next = apply_review_outcome(state, node->id, payload.score,
                                               payload.feedback, config.tau);
              step.status_deltas.push_back(
                  {node->id, "drafted", to_string(next)});
              step.result = std::move(pr);
              break;
            }
            case ActionKind::refine: {
              const auto* node = state.find_node(*act.section_id);
              const auto& m = state.manuscript.at(node->id);
              auto result =
                  run_refine(op, op_cfg, templates, state.meta.style_guide,
                             *node, m.content, m.feedback);
              if (std::holds_alternative<ActionError>(result)) {
                step.validated = std::get<ActionError>(result);
                break;
              }
              auto& pr = std::get<PrimitiveResult>(result);
              const auto& payload = std::get<RefinePayload>(pr.payload);
              apply_refine(state, node->id, payload.revised_content);
              step.status_deltas.push_back(
                  {node->id, "revision_needed", "drafted"});
              step.result = std::move(pr);
              break;
            }
            case ActionKind::finish: {
              // Accepted whenever an outline exists; incompleteness is
              // reported, not rejected.
              step.early_finish = !all_completed(state);
              record.early_finish = step.early_finish;
              finished = true;
              break;
            }
          }
        }
      }

      if (!step.is_valid())
        last_error = std::get<ActionError>(step.validated);
      step.state_digest = state_digest(state);
      record.steps.push_back(std::move(step));
    }
    record.outcome = finished ? Outcome::finished : Outcome::budget_exhausted;
  } catch (const TransportError& e) {
    record.outcome = Outcome::aborted;
    record.error = e.what();
  } catch (const CredentialError& e) {
    record.outcome = Outcome::aborted;
    record.error = e.what();
  }

  record.final_state = std::move(state);
  record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return record;
}

/// Bounded-concurrency batch map. Results keep input order; a throwing
/// episode is isolated into an aborted record.
inline std::vector<EpisodeRecord> run_batch(
    const std::vector<RunConfig>& configs,
    const std::function<EpisodeRecord(const RunConfig&)>& runner,
    int parallelism) {
  if (parallelism < 1) parallelism = 1;
  std::vector<EpisodeRecord> results(configs.size());
  std::counting_semaphore<> slots(parallelism);
  std::vector<std::thread> workers;
  workers.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    slots.acquire();
    workers.emplace_back([&, i] {
      try {
        results[i] = runner(configs[i]);
      } catch (const std::exception& e) {
        results[i].config = configs[i];
        results[i].outcome = Outcome::aborted;
        results[i].error = e.what();
      }
      slots.release();
    });
  }
  for (auto& w : workers) w.join();
  return results;
}

}  // namespace ravel
