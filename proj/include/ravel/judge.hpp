// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ravel/actions.hpp"
#include "ravel/primitives.hpp"
#include "ravel/prompts.hpp"
#include "ravel/provider.hpp"

namespace ravel {

enum class TaskKind { cloze, expand, edit, end2end };

inline std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::cloze: return "cloze";
    case TaskKind::expand: return "expand";
    case TaskKind::edit: return "edit";
    case TaskKind::end2end: return "end2end";
  }
  return "end2end";
}

inline TaskKind task_kind_from_string(const std::string& s) {
  if (s == "cloze") return TaskKind::cloze;
  if (s == "expand") return TaskKind::expand;
  if (s == "edit") return TaskKind::edit;
  if (s == "end2end") return TaskKind::end2end;
  throw std::invalid_argument("unknown task kind: " + s);
}

struct TaskSample {
  std::string id;
  TaskKind task = TaskKind::end2end;
  std::string instruction;
  std::optional<std::string> grounding;  // absent iff end2end
  std::string reference;
  std::string genre;
  std::string language;  // CN | EN
};

struct JudgeConfig {
  bool include_rubric = true;
  bool include_traits = true;
  bool include_reference = true;
};

struct JudgeVerdict {
  double score = 0;  // clamped to [1,10]
  json analysis;     // remaining structured fields of the verdict object
  std::string raw;
};

inline const prompts::JudgeBlocks& judge_blocks_for(TaskKind task) {
  switch (task) {
    case TaskKind::cloze: return prompts::judge_cloze();
    case TaskKind::expand: return prompts::judge_expand();
    case TaskKind::edit: return prompts::judge_edit();
    case TaskKind::end2end: return prompts::judge_end2end();
  }
  return prompts::judge_end2end();
}

/// Assembles the task-specific judge prompt. Ablated components are removed
/// wholesale, headers included, so the rendered prompt under any config is a
/// block-wise reduction of the full prompt.
inline std::string render_judge_prompt(const TaskSample& sample,
                                       const std::string& candidate,
                                       const JudgeConfig& config) {
  const auto& blocks = judge_blocks_for(sample.task);
  std::string out = blocks.role;
  if (config.include_traits) out += "\n" + blocks.traits;
  if (config.include_rubric) out += "\n" + blocks.rubric;
  out += "\n# Instruction\n" + sample.instruction + "\n";
  if (sample.grounding) out += "\n# Input\n" + *sample.grounding + "\n";
  if (config.include_reference)
    out += "\n# Reference\n" + sample.reference + "\n";
  out += "\n# Candidate\n" + candidate + "\n";
  out += "\n" + blocks.output_format;
  return out;
}

/// Scores one candidate. One corrective re-ask on verdict parse failure,
/// mirroring the orchestrator's convention.
inline std::variant<JudgeVerdict, ActionError> judge_sample(
    Provider& judge, const CallConfig& cfg, const TaskSample& sample,
    const std::string& candidate, const JudgeConfig& config) {
  if (candidate.empty())
    return ActionError{ActionErrorKind::missing_param, "empty candidate"};
  ChatRequest request;
  request.model_name = cfg.model_name;
  request.temperature = cfg.temperature;
  request.messages.push_back(
      {"user", render_judge_prompt(sample, candidate, config)});
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ChatResponse reply = judge.complete(request);
    auto obj = extract_json_object(reply.text);
    if (obj && obj->contains("score")) {
      double score;
      const auto& v = (*obj)["score"];
      if (v.is_number()) {
        score = v.get<double>();
      } else if (v.is_string()) {
        try {
          score = std::stod(v.get<std::string>());
        } catch (const std::exception&) {
          last_error = "non-numeric score";
          continue;
        }
      } else {
        last_error = "non-numeric score";
        continue;
      }
      JudgeVerdict verdict;
      verdict.score = std::clamp(score, 1.0, 10.0);
      verdict.analysis = *obj;
      verdict.analysis.erase("score");
      verdict.raw = reply.text;
      return verdict;
    }
    last_error = "no verdict object with a score";
    request.messages.push_back({"assistant", reply.text});
    request.messages.push_back(
        {"user",
         "Your previous reply could not be parsed. Reply again with only the "
         "required JSON verdict object."});
  }
  return ActionError{ActionErrorKind::malformed_payload,
                     "judge reply unparsable after re-ask: " + last_error};
}

/// Renders the subject-model input for a task: instruction plus grounding.
inline std::string render_task_input(const TaskSample& sample) {
  std::string out = sample.instruction;
  if (sample.grounding) out += "\n\n" + *sample.grounding;
  return out;
}

struct BenchResult {
  std::string sample_id;
  std::optional<std::string> candidate;  // absent on transport failure
  std::string error;
};

inline std::vector<BenchResult> bench_inference(
    Provider& subject, const CallConfig& cfg,
    const std::vector<TaskSample>& samples) {
  std::vector<BenchResult> out;
  for (const auto& sample : samples) {
    ChatRequest request;
    request.model_name = cfg.model_name;
    request.temperature = cfg.temperature;
    request.messages.push_back({"user", render_task_input(sample)});
    BenchResult result;
    result.sample_id = sample.id;
    try {
      result.candidate = subject.complete(request).text;
    } catch (const std::exception& e) {
      result.error = e.what();  // sample skipped in scoring
    }
    out.push_back(std::move(result));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Meta-evaluation.

struct PreferencePair {
  double human_a = 0, human_b = 0;  // 1-5 scale
  double judge_a = 0, judge_b = 0;  // 1-10 scale
};

/// Mean consistency between judge and human preference directions. Human-tie
/// pairs are excluded from the denominator; a judge tie against a human
/// preference counts as a mismatch. Scale-free: only signs are compared.
inline std::optional<double> meta_eval(
    const std::vector<PreferencePair>& pairs) {
  int counted = 0, matched = 0;
  auto sign = [](double x) { return x > 0 ? 1 : x < 0 ? -1 : 0; };
  for (const auto& p : pairs) {
    int human = sign(p.human_a - p.human_b);
    if (human == 0) continue;
    ++counted;
    if (sign(p.judge_a - p.judge_b) == human) ++matched;
  }
  if (counted == 0) return std::nullopt;
  return static_cast<double>(matched) / counted;
}

struct AgreementStats {
  std::optional<double> kappa;
  std::optional<double> pearson;
};

/// Unweighted Cohen's kappa over half-point-rounded labels, plus Pearson
/// correlation over the raw scores (absent under zero variance).
inline AgreementStats agreement_stats(
    const std::vector<std::pair<double, double>>& ratings) {
  AgreementStats out;
  if (ratings.size() < 2) return out;
  std::size_t n = ratings.size();

  // Cohen's kappa.
  auto label = [](double x) { return std::llround(x * 2.0); };  // half points
  std::map<long long, double> marg1, marg2;
  double observed = 0;
  for (const auto& [a, b] : ratings) {
    if (label(a) == label(b)) observed += 1;
    marg1[label(a)] += 1;
    marg2[label(b)] += 1;
  }
  double po = observed / n;
  double pe = 0;
  for (const auto& [l, c1] : marg1) {
    auto it = marg2.find(l);
    if (it != marg2.end()) pe += (c1 / n) * (it->second / n);
  }
  if (pe >= 1.0)
    out.kappa = po >= 1.0 ? std::optional<double>(1.0) : std::nullopt;
  else
    out.kappa = (po - pe) / (1.0 - pe);

  // Pearson.
  double sx = 0, sy = 0;
  for (const auto& [a, b] : ratings) {
    sx += a;
    sy += b;
  }
  double mx = sx / n, my = sy / n;
  double cov = 0, vx = 0, vy = 0;
  for (const auto& [a, b] : ratings) {
    cov += (a - mx) * (b - my);
    vx += (a - mx) * (a - mx);
    vy += (b - my) * (b - my);
  }
  if (vx > 0 && vy > 0) out.pearson = cov / std::sqrt(vx * vy);
  return out;
}

// ---------------------------------------------------------------------------
// Sample / verdict file formats (line-delimited JSON).

inline ordered_json sample_to_json(const TaskSample& s) {
  ordered_json j;
  j["id"] = s.id;
  j["task"] = to_string(s.task);
  j["instruction"] = s.instruction;
  j["grounding"] = s.grounding ? ordered_json(*s.grounding) : nullptr;
  j["reference"] = s.reference;
  j["genre"] = s.genre;
  j["language"] = s.language;
  return j;
}

inline TaskSample sample_from_json(const json& j) {
  TaskSample s;
  s.id = j.at("id").get<std::string>();
  s.task = task_kind_from_string(j.at("task").get<std::string>());
  s.instruction = j.at("instruction").get<std::string>();
  if (j.contains("grounding") && !j["grounding"].is_null())
    s.grounding = j["grounding"].get<std::string>();
  s.reference = j.at("reference").get<std::string>();
  s.genre = j.value("genre", "");
  s.language = j.value("language", "EN");
  if (s.task == TaskKind::end2end && s.grounding)
    throw std::invalid_argument("end2end sample must not carry grounding");
  if (s.task != TaskKind::end2end && !s.grounding)
    throw std::invalid_argument("non-end2end sample requires grounding");
  if (s.reference.empty())
    throw std::invalid_argument("reference must be non-empty");
  return s;
}

}  // namespace ravel
