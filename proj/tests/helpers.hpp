// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>
#include <vector>

#include <ravel/ravel.hpp>

namespace ravel::testing {

inline std::string policy_reply(const std::string& action,
                                const json& params = json::object(),
                                const std::string& thought = "next step") {
  ordered_json j;
  j["thought"] = thought;
  j["action"] = action;
  j["params"] = params;
  return j.dump();
}

inline std::string outline_reply(int n, const std::string& title = "Title") {
  ordered_json j;
  j["title"] = title;
  j["outline"] = ordered_json::array();
  for (int i = 1; i <= n; ++i)
    j["outline"].push_back(
        {{"section_title", "Section " + std::to_string(i)},
         {"points", "points for section " + std::to_string(i)}});
  return j.dump();
}

inline std::string draft_reply(int id) {
  ordered_json j;
  j["content"] = "Body of section " + std::to_string(id) + ".";
  j["summary"] = "Summary of section " + std::to_string(id) + ".";
  return j.dump();
}

inline std::string review_reply(double score,
                                const std::string& feedback = "ok") {
  ordered_json j;
  j["score"] = score;
  j["feedback"] = feedback;
  return j.dump();
}

inline std::string refine_reply(int id) {
  ordered_json j;
  j["revised_content"] = "Revised body of section " + std::to_string(id) + ".";
  j["change_log"] = "tightened prose";
  return j.dump();
}

inline RunConfig test_config() {
  RunConfig c;
  c.meta.topic = "The history of tea";
  c.meta.style_guide = "long-form magazine essay";
  return c;
}

/// Golden episode: outline of 4 nodes, each drafted then reviewed at 8.5,
/// then finish. 10 steps total.
inline std::pair<ScriptedProvider, ScriptedProvider> golden_scripts() {
  std::vector<std::string> policy = {policy_reply("plan_outline")};
  std::vector<std::string> op = {outline_reply(4)};
  for (int id = 1; id <= 4; ++id) {
    policy.push_back(policy_reply("write_paragraph", {{"section_id", id}}));
    op.push_back(draft_reply(id));
    policy.push_back(policy_reply("review_content", {{"section_id", id}}));
    op.push_back(review_reply(8.5));
  }
  policy.push_back(policy_reply("finish"));
  return {ScriptedProvider::from_replies(policy),
          ScriptedProvider::from_replies(op)};
}

/// Struggle episode: like golden but node 3 reviews at 6.0, is refined, then
/// re-reviews at 8.5. 12 steps total.
inline std::pair<ScriptedProvider, ScriptedProvider> struggle_scripts() {
  std::vector<std::string> policy = {policy_reply("plan_outline")};
  std::vector<std::string> op = {outline_reply(4)};
  for (int id = 1; id <= 4; ++id) {
    policy.push_back(policy_reply("write_paragraph", {{"section_id", id}}));
    op.push_back(draft_reply(id));
    policy.push_back(policy_reply("review_content", {{"section_id", id}}));
    if (id == 3) {
      op.push_back(review_reply(6.0, "details are insufficient"));
      policy.push_back(
          policy_reply("revise_paragraph", {{"section_id", id}}));
      op.push_back(refine_reply(id));
      policy.push_back(policy_reply("review_content", {{"section_id", id}}));
      op.push_back(review_reply(8.5));
    } else {
      op.push_back(review_reply(8.5));
    }
  }
  policy.push_back(policy_reply("finish"));
  return {ScriptedProvider::from_replies(policy),
          ScriptedProvider::from_replies(op)};
}

/// Golden episode with three invalid emissions spliced in: two malformed
/// outputs and one illegal-in-state action. 13 steps total, ERR = 3/13.
inline std::pair<ScriptedProvider, ScriptedProvider> error_scripts() {
  std::vector<std::string> policy = {policy_reply("plan_outline")};
  std::vector<std::string> op = {outline_reply(4)};
  policy.push_back("Let me think about what to do next.");  // malformed
  for (int id = 1; id <= 4; ++id) {
    policy.push_back(policy_reply("write_paragraph", {{"section_id", id}}));
    op.push_back(draft_reply(id));
    if (id == 2)  // review already-completed node 1: illegal in state
      policy.push_back(policy_reply("review_content", {{"section_id", 1}}));
    policy.push_back(policy_reply("review_content", {{"section_id", id}}));
    op.push_back(review_reply(8.5));
  }
  policy.push_back("{\"thought\": \"no action key here\"}");  // malformed
  policy.push_back(policy_reply("finish"));
  return {ScriptedProvider::from_replies(policy),
          ScriptedProvider::from_replies(op)};
}

/// Policy that drafts node 1 forever after planning; never finishes.
inline std::pair<ScriptedProvider, ScriptedProvider> never_finishing_scripts(
    int t_max) {
  std::vector<std::string> policy = {policy_reply("plan_outline")};
  std::vector<std::string> op = {outline_reply(2)};
  policy.push_back(policy_reply("write_paragraph", {{"section_id", 1}}));
  op.push_back(draft_reply(1));
  for (int t = 2; t < t_max; ++t) {
    // Alternate review/refine on node 1 with failing scores.
    if (t % 2 == 0) {
      policy.push_back(policy_reply("review_content", {{"section_id", 1}}));
      op.push_back(review_reply(5.0, "not there yet"));
    } else {
      policy.push_back(policy_reply("revise_paragraph", {{"section_id", 1}}));
      op.push_back(refine_reply(1));
    }
  }
  return {ScriptedProvider::from_replies(policy),
          ScriptedProvider::from_replies(op)};
}

// ---------------------------------------------------------------------------
// Random legal episode generator. Builds a random but protocol-consistent
// script, then executes it through the real orchestrator so every record is
// internally consistent by construction.

inline EpisodeRecord random_episode(std::mt19937& rng) {
  RunConfig config = test_config();
  config.t_max = std::uniform_int_distribution<int>(5, 50)(rng);

  std::vector<std::string> policy;
  std::vector<std::string> op;
  auto chance = [&](double p) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  };
  auto pick_score = [&] {
    static const double scores[] = {4.0, 6.0, 7.0, 7.999, 8.0, 8.5, 9.5};
    return scores[std::uniform_int_distribution<int>(0, 6)(rng)];
  };

  std::vector<NodeStatus> sim;  // mirror of node statuses, index = id - 1
  bool has_outline = false;
  bool finished = false;

  for (int t = 0; t < config.t_max && !finished; ++t) {
    // Occasional invalid emission: consumes a step, state unchanged.
    if (chance(0.12)) {
      switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
        case 0: policy.push_back("no json here at all"); break;
        case 1: policy.push_back(policy_reply("summarize_everything")); break;
        case 2: policy.push_back(policy_reply("draft")); break;  // no param
        case 3:
          policy.push_back(policy_reply("draft", {{"section_id", 99}}));
          break;
        default:
          if (has_outline) {
            // Review a node that is not drafted.
            int id = -1;
            for (std::size_t i = 0; i < sim.size(); ++i)
              if (sim[i] != NodeStatus::drafted) id = static_cast<int>(i) + 1;
            if (id > 0) {
              policy.push_back(policy_reply("review", {{"section_id", id}}));
              break;
            }
          }
          policy.push_back(policy_reply("finish"));  // finish before outline
          if (has_outline) {
            finished = true;  // outline exists, so this finish is legal
          }
          break;
      }
      if (!has_outline || !finished) continue;
      break;
    }

    if (!has_outline || chance(0.03)) {  // initial plan or re-plan
      int n = std::uniform_int_distribution<int>(1, 5)(rng);
      policy.push_back(policy_reply("plan_outline"));
      if (chance(0.05)) {  // operator stumbles once, recovers on re-ask
        op.push_back("garbage");
      }
      op.push_back(outline_reply(n));
      sim.assign(n, NodeStatus::pending);
      has_outline = true;
      continue;
    }

    // Early finish sometimes; always finish once everything is completed.
    bool all_done = true;
    for (auto s : sim)
      if (s != NodeStatus::completed) all_done = false;
    if (all_done || chance(0.05)) {
      policy.push_back(policy_reply("finish"));
      finished = true;
      break;
    }

    // Pick a legal node action.
    std::vector<std::pair<ActionKind, int>> legal;
    for (std::size_t i = 0; i < sim.size(); ++i) {
      int id = static_cast<int>(i) + 1;
      if (sim[i] == NodeStatus::pending) legal.push_back({ActionKind::draft, id});
      if (sim[i] == NodeStatus::drafted)
        legal.push_back({ActionKind::review, id});
      if (sim[i] == NodeStatus::revision_needed)
        legal.push_back({ActionKind::refine, id});
    }
    auto [kind, id] =
        legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(
            rng)];
    switch (kind) {
      case ActionKind::draft:
        policy.push_back(policy_reply("write_paragraph", {{"section_id", id}}));
        if (chance(0.04)) {  // operator payload failure: step turns invalid
          op.push_back("broken");
          op.push_back("still broken");
        } else {
          op.push_back(draft_reply(id));
          sim[id - 1] = NodeStatus::drafted;
        }
        break;
      case ActionKind::review: {
        policy.push_back(policy_reply("review_content", {{"section_id", id}}));
        double score = pick_score();
        op.push_back(review_reply(score));
        sim[id - 1] = score >= config.tau ? NodeStatus::completed
                                          : NodeStatus::revision_needed;
        break;
      }
      case ActionKind::refine:
        policy.push_back(policy_reply("revise_paragraph", {{"section_id", id}}));
        op.push_back(refine_reply(id));
        sim[id - 1] = NodeStatus::drafted;
        break;
      default:
        break;
    }
  }

  auto policy_provider = ScriptedProvider::from_replies(policy);
  auto op_provider = ScriptedProvider::from_replies(op);
  return run_episode(config, policy_provider, op_provider);
}

}  // namespace ravel::testing
