// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <variant>
#include <vector>

#include "ravel/judge.hpp"
#include "ravel/template_engine.hpp"

namespace ravel {

struct SourceDoc {
  std::string id;
  std::string text;
  std::string genre;
  std::string language = "EN";  // CN | EN
  std::map<std::string, int> scores;  // per-dimension, 1-5
  std::optional<int> overall;
};

struct QuarantineRecord {
  std::string doc_id;
  std::string stage;  // filter | end2end | expand | cloze | edit | best_of_n
  std::string reason;
  std::string raw;  // last model reply, kept for human review
};

struct ConstructedSample {
  TaskSample sample;
  ordered_json provenance;  // source_id, prompt_version, validator, unit
};

template <typename T>
using ConstructResult = std::variant<T, QuarantineRecord>;

/// Text length in the language's unit: UTF-8 code points for CN,
/// whitespace-delimited words for EN.
inline int length_units(std::string_view text, const std::string& language) {
  if (language == "CN") {
    int n = 0;
    for (unsigned char c : text)
      if ((c & 0xc0) != 0x80) ++n;  // count non-continuation bytes
    return n;
  }
  return word_count(text);
}

namespace detail {

/// One construction call with a single corrective re-ask. The validator
/// returns an empty string on success, a reason otherwise.
template <typename Parse>
auto construct_call(Provider& assistant, const CallConfig& cfg,
                    const std::string& prompt, Parse&& parse)
    -> std::variant<std::decay_t<decltype(*parse(std::string{}).first)>,
                    std::pair<std::string, std::string>> {
  ChatRequest request;
  request.model_name = cfg.model_name;
  request.temperature = cfg.temperature;
  request.messages.push_back({"user", prompt});
  std::string reason, raw;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ChatResponse reply = assistant.complete(request);
    raw = reply.text;
    auto [value, why] = parse(reply.text);
    if (value) return *value;
    reason = why;
    request.messages.push_back({"assistant", reply.text});
    request.messages.push_back(
        {"user", "Your previous reply was rejected: " + why +
                     ". Reply again following the required format exactly."});
  }
  return std::make_pair(reason, raw);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stage 1: quality filtering.

inline const std::vector<std::string>& filter_dimensions() {
  static const std::vector<std::string> dims = {
      "Plot and Structure",   "Character Development",
      "Themes and Ideas",     "Language and Writing Style",
      "Emotional Resonance",  "Innovation and Uniqueness",
      "Overall Rating"};
  return dims;
}

/// Parses the seven labeled dimension scores from a free-text review reply.
inline std::optional<std::map<std::string, int>> parse_filter_scores(
    const std::string& reply) {
  std::map<std::string, int> out;
  for (const auto& dim : filter_dimensions()) {
    std::regex pattern("\"" + dim + "\"\\s*[:：]\\s*([1-5])");
    std::smatch m;
    if (!std::regex_search(reply, m, pattern)) return std::nullopt;
    out[dim] = std::stoi(m[1].str());
  }
  return out;
}

struct FilterOutcome {
  enum class Verdict { kept, discarded, quarantined } verdict;
  SourceDoc doc;
  std::string reason;
  std::string raw;
};

/// Scores the document on the rubric prompt; kept iff overall >= 4.
/// Unparsable replies quarantine the doc rather than dropping it.
inline FilterOutcome filter_source(const SourceDoc& doc, Provider& assistant,
                                   const CallConfig& cfg) {
  std::string prompt = render_template(prompts::kFilter, {{"content", doc.text}});
  auto result = detail::construct_call(
      assistant, cfg, prompt,
      [](const std::string& reply)
          -> std::pair<std::optional<std::map<std::string, int>>, std::string> {
        auto scores = parse_filter_scores(reply);
        if (!scores) return {std::nullopt, "missing labeled dimension scores"};
        return {scores, ""};
      });
  FilterOutcome out;
  out.doc = doc;
  if (std::holds_alternative<std::pair<std::string, std::string>>(result)) {
    const auto& [reason, raw] =
        std::get<std::pair<std::string, std::string>>(result);
    out.verdict = FilterOutcome::Verdict::quarantined;
    out.reason = reason;
    out.raw = raw;
    return out;
  }
  auto scores = std::get<std::map<std::string, int>>(result);
  out.doc.overall = scores.at("Overall Rating");
  scores.erase("Overall Rating");
  out.doc.scores = std::move(scores);
  out.verdict = *out.doc.overall >= 4 ? FilterOutcome::Verdict::kept
                                      : FilterOutcome::Verdict::discarded;
  return out;
}

// ---------------------------------------------------------------------------
// Validators. Each returns an empty string on success, a reason otherwise.

/// Longest common substring length in bytes, used as the leakage screen
/// between instruction/grounding and the reference.
inline int longest_common_substring(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<int> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  int best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

struct CorpusLimits {
  int end2end_query_units = 100;
  int expand_query_units = 300;
  int edit_critique_units = 300;
  double cloze_band_lo = 0.20;
  double cloze_band_hi = 0.50;
  int leakage_cap_bytes = 80;  // longest shared substring allowed
};

inline std::string check_leakage(const TaskSample& s,
                                 const CorpusLimits& limits) {
  std::string carrier = s.instruction;
  if (s.grounding) carrier += *s.grounding;
  int shared = longest_common_substring(carrier, s.reference);
  if (shared > limits.leakage_cap_bytes)
    return "instruction/grounding shares a " + std::to_string(shared) +
           "-byte substring with the reference";
  return "";
}

inline const std::vector<std::string>& edit_banned_phrases() {
  static const std::vector<std::string> banned = {
      "human original", "reference sample", "comparison", "original author",
      "人类原文",       "参考样本",          "对比",        "原作者"};
  return banned;
}

inline std::string check_edit_critique(const std::string& critique,
                                       const std::string& language,
                                       const CorpusLimits& limits) {
  int units = length_units(critique, language);
  if (units > limits.edit_critique_units)
    return "critique length " + std::to_string(units) + " exceeds " +
           std::to_string(limits.edit_critique_units);
  std::string lower = critique;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const auto& phrase : edit_banned_phrases()) {
    const std::string& haystack =
        static_cast<unsigned char>(phrase[0]) < 0x80 ? lower : critique;
    if (haystack.find(phrase) != std::string::npos)
      return "banned phrase present: " + phrase;
  }
  return "";
}

/// Keyword and PII regex screen. Returns the findings; empty means clean.
inline std::vector<std::string> safety_screen(
    const std::string& text,
    const std::vector<std::string>& extra_keywords = {}) {
  std::vector<std::string> findings;
  static const std::regex email(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
  static const std::regex phone(R"(\+?\d[\d\s().-]{8,}\d)");
  static const std::regex ssn(R"(\b\d{3}-\d{2}-\d{4}\b)");
  if (std::regex_search(text, email)) findings.push_back("email address");
  if (std::regex_search(text, ssn)) findings.push_back("ssn-like identifier");
  else if (std::regex_search(text, phone)) findings.push_back("phone number");
  for (const auto& kw : extra_keywords)
    if (text.find(kw) != std::string::npos)
      findings.push_back("keyword: " + kw);
  return findings;
}

// ---------------------------------------------------------------------------
// Stage 2: per-task reverse construction.

namespace detail {

inline ordered_json base_provenance(const SourceDoc& doc,
                                    const std::string& stage) {
  ordered_json p;
  p["source_id"] = doc.id;
  p["stage"] = stage;
  p["prompt_version"] = prompts::kTemplateVersion;
  p["length_unit"] = doc.language == "CN" ? "characters" : "words";
  return p;
}

}  // namespace detail

inline ConstructResult<ConstructedSample> build_end2end(
    const SourceDoc& doc, Provider& assistant, const CallConfig& cfg,
    const CorpusLimits& limits = {}) {
  std::string prompt =
      render_template(prompts::kConstructEnd2End, {{"content", doc.text}});
  auto result = detail::construct_call(
      assistant, cfg, prompt,
      [&](const std::string& reply)
          -> std::pair<std::optional<json>, std::string> {
        auto obj = extract_json_object(reply);
        if (!obj) return {std::nullopt, "no JSON object"};
        for (const char* key : {"genre", "brief", "audience", "word", "query"})
          if (!obj->contains(key))
            return {std::nullopt, std::string("missing field: ") + key};
        int units = length_units((*obj)["query"].get<std::string>(),
                                 doc.language);
        if (units > limits.end2end_query_units)
          return {std::nullopt,
                  "query length " + std::to_string(units) + " exceeds " +
                      std::to_string(limits.end2end_query_units)};
        return {obj, ""};
      });
  if (std::holds_alternative<std::pair<std::string, std::string>>(result)) {
    const auto& [reason, raw] =
        std::get<std::pair<std::string, std::string>>(result);
    return QuarantineRecord{doc.id, "end2end", reason, raw};
  }
  const auto& fields = std::get<json>(result);
  ConstructedSample out;
  out.sample.id = doc.id + ".end2end";
  out.sample.task = TaskKind::end2end;
  out.sample.instruction = render_template(
      prompts::kInstructionEnd2End,
      {{"genre", fields["genre"].get<std::string>()},
       {"topic", fields["brief"].get<std::string>()},
       {"summary", fields["query"].get<std::string>()},
       {"word", fields["word"].get<std::string>()}});
  out.sample.reference = doc.text;
  out.sample.genre = fields["genre"].get<std::string>();
  out.sample.language = doc.language;
  if (auto leak = check_leakage(out.sample, limits); !leak.empty())
    return QuarantineRecord{doc.id, "end2end", leak, fields.dump()};
  out.provenance = detail::base_provenance(doc, "end2end");
  out.provenance["fields"] = fields;
  return out;
}

inline ConstructResult<ConstructedSample> build_expand(
    const SourceDoc& doc, Provider& assistant, const CallConfig& cfg,
    const CorpusLimits& limits = {}) {
  std::string prompt =
      render_template(prompts::kConstructExpand, {{"content", doc.text}});
  auto result = detail::construct_call(
      assistant, cfg, prompt,
      [&](const std::string& reply)
          -> std::pair<std::optional<json>, std::string> {
        auto obj = extract_json_object(reply);
        if (!obj) return {std::nullopt, "no JSON object"};
        for (const char* key :
             {"genre", "brief", "structure", "audience", "word", "query"})
          if (!obj->contains(key))
            return {std::nullopt, std::string("missing field: ") + key};
        if ((*obj)["structure"].get<std::string>().empty())
          return {std::nullopt, "empty structure outline"};
        int units =
            length_units((*obj)["query"].get<std::string>(), doc.language);
        if (units > limits.expand_query_units)
          return {std::nullopt,
                  "query length " + std::to_string(units) + " exceeds " +
                      std::to_string(limits.expand_query_units)};
        return {obj, ""};
      });
  if (std::holds_alternative<std::pair<std::string, std::string>>(result)) {
    const auto& [reason, raw] =
        std::get<std::pair<std::string, std::string>>(result);
    return QuarantineRecord{doc.id, "expand", reason, raw};
  }
  const auto& fields = std::get<json>(result);
  ConstructedSample out;
  out.sample.id = doc.id + ".expand";
  out.sample.task = TaskKind::expand;
  out.sample.instruction = fields["query"].get<std::string>();
  out.sample.grounding = fields["structure"].get<std::string>();
  out.sample.reference = doc.text;
  out.sample.genre = fields["genre"].get<std::string>();
  out.sample.language = doc.language;
  if (auto leak = check_leakage(out.sample, limits); !leak.empty())
    return QuarantineRecord{doc.id, "expand", leak, fields.dump()};
  out.provenance = detail::base_provenance(doc, "expand");
  out.provenance["fields"] = fields;
  return out;
}

/// Validates a proposed cloze span against the source text. Empty string on
/// success.
inline std::string validate_cloze_span(const SourceDoc& doc,
                                       const std::string& start_sentence,
                                       const std::string& end_sentence,
                                       const std::string& selected_text,
                                       const CorpusLimits& limits) {
  auto pos = doc.text.find(selected_text);
  if (selected_text.empty() || pos == std::string::npos)
    return "selected_text is not a verbatim substring of the source";
  if (doc.text.find(selected_text, pos + 1) != std::string::npos)
    return "selected_text occurs more than once; span is ambiguous";
  if (selected_text.rfind(start_sentence, 0) != 0)
    return "selected_text does not begin with start_sentence";
  if (selected_text.size() < end_sentence.size() ||
      selected_text.compare(selected_text.size() - end_sentence.size(),
                            end_sentence.size(), end_sentence) != 0)
    return "selected_text does not end with end_sentence";
  double total = length_units(doc.text, doc.language);
  double span = length_units(selected_text, doc.language);
  double frac = total > 0 ? span / total : 0;
  if (frac < limits.cloze_band_lo || frac > limits.cloze_band_hi)
    return "span fraction " + format_score(frac * 100) +
           "% outside the allowed band";
  return "";
}

inline ConstructResult<ConstructedSample> build_cloze(
    const SourceDoc& doc, Provider& assistant, const CallConfig& cfg,
    const CorpusLimits& limits = {}) {
  std::string prompt =
      render_template(prompts::kConstructCloze, {{"content", doc.text}});
  auto result = detail::construct_call(
      assistant, cfg, prompt,
      [&](const std::string& reply)
          -> std::pair<std::optional<json>, std::string> {
        auto obj = extract_json_object(reply);
        if (!obj) return {std::nullopt, "no JSON object"};
        for (const char* key : {"start_sentence", "end_sentence", "selected_text"})
          if (!obj->contains(key))
            return {std::nullopt, std::string("missing field: ") + key};
        auto why = validate_cloze_span(
            doc, (*obj)["start_sentence"].get<std::string>(),
            (*obj)["end_sentence"].get<std::string>(),
            (*obj)["selected_text"].get<std::string>(), limits);
        if (!why.empty()) return {std::nullopt, why};
        return {obj, ""};
      });
  if (std::holds_alternative<std::pair<std::string, std::string>>(result)) {
    const auto& [reason, raw] =
        std::get<std::pair<std::string, std::string>>(result);
    return QuarantineRecord{doc.id, "cloze", reason, raw};
  }
  const auto& fields = std::get<json>(result);
  std::string span = fields["selected_text"].get<std::string>();
  auto pos = doc.text.find(span);
  std::string blanked = doc.text.substr(0, pos) + prompts::kBlankMarker +
                        doc.text.substr(pos + span.size());
  ConstructedSample out;
  out.sample.id = doc.id + ".cloze";
  out.sample.task = TaskKind::cloze;
  out.sample.instruction = render_template(
      prompts::kInstructionCloze,
      {{"genre", doc.genre.empty() ? std::string("text") : doc.genre}});
  out.sample.grounding = blanked;
  out.sample.reference = span;
  out.sample.genre = doc.genre;
  out.sample.language = doc.language;
  out.provenance = detail::base_provenance(doc, "cloze");
  out.provenance["span_offset"] = pos;
  out.provenance["span_units"] = length_units(span, doc.language);
  out.provenance["source_units"] = length_units(doc.text, doc.language);
  return out;
}

inline ConstructResult<ConstructedSample> build_edit(
    const SourceDoc& doc, const std::string& draft, Provider& assistant,
    const CallConfig& cfg, const CorpusLimits& limits = {}) {
  if (draft.empty())
    return QuarantineRecord{doc.id, "edit", "missing subject draft", ""};
  std::string prompt = render_template(
      prompts::kConstructEdit,
      {{"ai_content", draft}, {"human_middle", doc.text}});
  auto result = detail::construct_call(
      assistant, cfg, prompt,
      [&](const std::string& reply)
          -> std::pair<std::optional<std::string>, std::string> {
        auto why = check_edit_critique(reply, doc.language, limits);
        if (!why.empty()) return {std::nullopt, why};
        return {reply, ""};
      });
  if (std::holds_alternative<std::pair<std::string, std::string>>(result)) {
    const auto& [reason, raw] =
        std::get<std::pair<std::string, std::string>>(result);
    return QuarantineRecord{doc.id, "edit", reason, raw};
  }
  const auto& critique = std::get<std::string>(result);
  ConstructedSample out;
  out.sample.id = doc.id + ".edit";
  out.sample.task = TaskKind::edit;
  out.sample.instruction = critique;
  out.sample.grounding = draft;
  out.sample.reference = doc.text;
  out.sample.genre = doc.genre;
  out.sample.language = doc.language;
  out.provenance = detail::base_provenance(doc, "edit");
  return out;
}

// ---------------------------------------------------------------------------
// Stage 3: best-of-N reference optimization.

inline constexpr const char* kPairwisePrompt = R"(# Task
You will compare two texts written for the same instruction and decide which is better overall.

# Instruction
{{instruction}}

# Text A
{{text_a}}

# Text B
{{text_b}}

# Output Format (JSON)
{"winner": "A" or "B", "reason": "..."}
)";

namespace detail {

/// One blind comparison call. Returns 'A', 'B', or 0 on parse failure.
inline char pairwise_winner(Provider& judge, const CallConfig& cfg,
                            const std::string& instruction,
                            const std::string& a, const std::string& b) {
  ChatRequest request;
  request.model_name = cfg.model_name;
  request.temperature = cfg.temperature;
  request.messages.push_back(
      {"user", render_template(kPairwisePrompt, {{"instruction", instruction},
                                                 {"text_a", a},
                                                 {"text_b", b}})});
  try {
    ChatResponse reply = judge.complete(request);
    auto obj = extract_json_object(reply.text);
    if (!obj || !obj->contains("winner")) return 0;
    std::string w = (*obj)["winner"].get<std::string>();
    if (w == "A" || w == "a") return 'A';
    if (w == "B" || w == "b") return 'B';
  } catch (const std::exception&) {
  }
  return 0;
}

}  // namespace detail

/// Generates one candidate per subject provider and replaces the reference
/// only when a candidate beats it under both presentation orders. Judge
/// failures degrade to keeping the current reference.
inline ConstructedSample best_of_n_reference(
    ConstructedSample sample,
    std::vector<std::pair<Provider*, CallConfig>> candidates, Provider& judge,
    const CallConfig& judge_cfg) {
  ordered_json log = ordered_json::array();
  for (auto& [subject, subject_cfg] : candidates) {
    std::string candidate;
    try {
      ChatRequest request;
      request.model_name = subject_cfg.model_name;
      request.temperature = subject_cfg.temperature;
      request.messages.push_back({"user", render_task_input(sample.sample)});
      candidate = subject->complete(request).text;
    } catch (const std::exception& e) {
      log.push_back({{"model", subject_cfg.model_name},
                     {"outcome", "generation_failed"},
                     {"error", e.what()}});
      continue;
    }
    // Position-swapped double judging: replace only on a sweep.
    char first = detail::pairwise_winner(judge, judge_cfg,
                                         sample.sample.instruction, candidate,
                                         sample.sample.reference);
    char second = detail::pairwise_winner(judge, judge_cfg,
                                          sample.sample.instruction,
                                          sample.sample.reference, candidate);
    bool swept = first == 'A' && second == 'B';
    log.push_back({{"model", subject_cfg.model_name},
                   {"candidate_first", first ? std::string(1, first) : ""},
                   {"reference_first", second ? std::string(1, second) : ""},
                   {"replaced", swept}});
    if (swept) sample.sample.reference = candidate;
  }
  sample.provenance["best_of_n"] = log;
  return sample;
}

// ---------------------------------------------------------------------------
// Sidecar serialization.

inline ordered_json quarantine_to_json(const QuarantineRecord& q) {
  ordered_json j;
  j["doc_id"] = q.doc_id;
  j["stage"] = q.stage;
  j["reason"] = q.reason;
  j["raw"] = q.raw;
  return j;
}

}  // namespace ravel
