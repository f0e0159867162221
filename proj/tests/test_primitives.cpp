// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ravel/primitives.hpp>

using namespace ravel;

namespace {

const prompts::TemplateSet kTemplates;
const CallConfig kCfg{"op-model", 0.7, std::nullopt};
const OutlineNode kNode{2, "The Rise of Tea", "origins; trade routes",
                        NodeStatus::pending};

}  // namespace

TEST_CASE("prompt renderers bind every placeholder") {
  auto outline = render_outline_prompt(kTemplates, "tea", "essay style");
  CHECK(outline.find("- Topic: tea") != std::string::npos);
  CHECK(outline.find("- Style Guide: essay style") != std::string::npos);
  CHECK(outline.find("{{") == std::string::npos);

  auto draft =
      render_draft_prompt(kTemplates, "tea", "essay style", kNode, "None");
  CHECK(draft.find("The Rise of Tea") != std::string::npos);
  CHECK(draft.find("origins; trade routes") != std::string::npos);
  CHECK(draft.find("- Previous Summary: None") != std::string::npos);
  CHECK(draft.find("{{") == std::string::npos);

  auto review = render_review_prompt(kTemplates, "essay style", kNode,
                                     "the content", "prior summary");
  CHECK(review.find("- Content: the content") != std::string::npos);
  CHECK(review.find("{{") == std::string::npos);

  auto refine = render_refine_prompt(kTemplates, "essay style", kNode,
                                     "the content", "fix the ending");
  CHECK(refine.find("- Reviewer Feedback: fix the ending") !=
        std::string::npos);
  CHECK(refine.find("{{") == std::string::npos);
}

TEST_CASE("review prompt pins the passing band wording") {
  auto review =
      render_review_prompt(kTemplates, "g", kNode, "c", "None");
  CHECK(review.find("8-8.9: Meets requirements; minor flaws (Passed)") !=
        std::string::npos);
}

TEST_CASE("outline parse duality: rendered example parses back") {
  ScriptedProvider op = ScriptedProvider::from_replies(
      {R"({"title": "Tea", "outline": [
            {"section_title": "Origins", "points": "China; legend"},
            {"section_title": "Trade", "points": "Silk Road"}]})"});
  auto result = run_outline(op, kCfg, kTemplates, "tea", "essay");
  REQUIRE(std::holds_alternative<PrimitiveResult>(result));
  const auto& payload =
      std::get<OutlinePayload>(std::get<PrimitiveResult>(result).payload);
  CHECK(payload.title == "Tea");
  REQUIRE(payload.nodes.size() == 2);
  CHECK(payload.nodes[0].first == "Origins");
  CHECK(payload.nodes[1].second == "Silk Road");
}

TEST_CASE("draft parse requires non-empty content") {
  ScriptedProvider op = ScriptedProvider::from_replies(
      {R"({"content": "", "summary": "s"})",
       R"({"content": "words", "summary": "s"})"});
  auto result = run_draft(op, kCfg, kTemplates, "t", "g", kNode, "None");
  // First reply rejected, corrective re-ask succeeds.
  REQUIRE(std::holds_alternative<PrimitiveResult>(result));
  CHECK(std::get<DraftPayload>(std::get<PrimitiveResult>(result).payload)
            .content == "words");
  CHECK(op.calls().size() == 2);
  // The re-ask appends the failed reply and a correction.
  CHECK(op.calls()[1].messages.size() == 3);
  CHECK(op.calls()[1].messages[1].role == "assistant");
}

TEST_CASE("review parse clamps out-of-range scores and flags them") {
  ScriptedProvider op = ScriptedProvider::from_replies(
      {R"({"score": 12.5, "feedback": "over"})"});
  auto result = run_review(op, kCfg, kTemplates, "g", kNode, "c", "None");
  REQUIRE(std::holds_alternative<PrimitiveResult>(result));
  const auto& payload =
      std::get<ReviewPayload>(std::get<PrimitiveResult>(result).payload);
  CHECK(payload.score == 10.0);
  CHECK(payload.clamped);
}

TEST_CASE("review parse accepts numeric strings") {
  ScriptedProvider op = ScriptedProvider::from_replies(
      {R"({"score": "8.5", "feedback": "fine"})"});
  auto result = run_review(op, kCfg, kTemplates, "g", kNode, "c", "None");
  REQUIRE(std::holds_alternative<PrimitiveResult>(result));
  CHECK(std::get<ReviewPayload>(std::get<PrimitiveResult>(result).payload)
            .score == 8.5);
}

TEST_CASE("two unparsable replies produce a malformed_payload error") {
  ScriptedProvider op =
      ScriptedProvider::from_replies({"not json", "still not json"});
  auto result = run_refine(op, kCfg, kTemplates, "g", kNode, "c", "fb");
  REQUIRE(std::holds_alternative<ActionError>(result));
  CHECK(std::get<ActionError>(result).kind ==
        ActionErrorKind::malformed_payload);
  CHECK(op.calls().size() == 2);
}

TEST_CASE("payload extraction tolerates prose and code fences") {
  ScriptedProvider op = ScriptedProvider::from_replies(
      {"Here you go:\n```json\n{\"revised_content\": \"better\", "
       "\"change_log\": \"edits\"}\n``` hope that helps!"});
  auto result = run_refine(op, kCfg, kTemplates, "g", kNode, "c", "fb");
  REQUIRE(std::holds_alternative<PrimitiveResult>(result));
  CHECK(std::get<RefinePayload>(std::get<PrimitiveResult>(result).payload)
            .revised_content == "better");
}

TEST_CASE("usage accumulates across the corrective re-ask") {
  ScriptedProvider op = ScriptedProvider::from_replies(
      {"bad", R"({"content": "x", "summary": "y"})"});
  auto result = run_draft(op, kCfg, kTemplates, "t", "g", kNode, "None");
  REQUIRE(std::holds_alternative<PrimitiveResult>(result));
  const auto& usage = std::get<PrimitiveResult>(result).usage;
  CHECK(usage.prompt_tokens > 0);
  CHECK(usage.completion_tokens > 0);
}

TEST_CASE("template files on disk stay in sync with embedded defaults") {
  auto dir = std::filesystem::path(__FILE__).parent_path().parent_path() /
             "templates";
  REQUIRE(std::filesystem::exists(dir / "policy_system.tmpl"));
  auto from_disk = prompts::TemplateSet::load_dir(dir);
  prompts::TemplateSet embedded;
  CHECK(from_disk.policy_system == embedded.policy_system);
  CHECK(from_disk.outline == embedded.outline);
  CHECK(from_disk.draft == embedded.draft);
  CHECK(from_disk.review == embedded.review);
  CHECK(from_disk.refine == embedded.refine);
}
