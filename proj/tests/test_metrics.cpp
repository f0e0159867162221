// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <filesystem>

#include "helpers.hpp"

using namespace ravel;
using namespace ravel::testing;

namespace {

EpisodeMetrics recount_via_file(const EpisodeRecord& record) {
  static int counter = 0;
  auto path = std::filesystem::temp_directory_path() /
              ("ravel_metrics_" + std::to_string(counter++) + ".jsonl");
  write_trajectory(path, record);
  auto result = brute_force_recount(path.string(), record.config.tau);
  std::filesystem::remove(path);
  return result;
}

}  // namespace

TEST_CASE("golden episode metrics, hand-counted") {
  auto [policy, op] = golden_scripts();
  auto record = run_episode(test_config(), policy, op);
  auto m = compute_episode_metrics(record, 8.0);

  CHECK(m.success);
  CHECK(m.traj_len == 10);
  CHECK(m.outline_len == 4);
  CHECK(m.eta == 2.5);
  CHECK(m.rho == 1.0);
  CHECK(m.refine_rho == 0.0);
  CHECK(m.delta_pairs.empty());
  CHECK_FALSE(m.delta_gain.has_value());
  CHECK(m.invalid_steps == 0);
  CHECK(m.err_rate == 0.0);
  CHECK(m.replans == 0);
  CHECK_FALSE(m.early_finish);
  // Lifecycle: node 1 drafted at step 1, completed at step 2, and so on.
  REQUIRE(m.lifecycle.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(m.lifecycle[i].node_id == i + 1);
    CHECK(m.lifecycle[i].t_start == 1 + 2 * i);
    CHECK(m.lifecycle[i].t_end == 2 + 2 * i);
  }
}

TEST_CASE("struggle episode metrics, hand-counted") {
  auto [policy, op] = struggle_scripts();
  auto record = run_episode(test_config(), policy, op);
  auto m = compute_episode_metrics(record, 8.0);

  CHECK(m.success);
  CHECK(m.traj_len == 12);
  CHECK(m.eta == 3.0);
  CHECK(m.rho == 1.25);
  CHECK(m.refine_rho == 0.25);
  REQUIRE(m.delta_pairs.size() == 1);
  CHECK(m.delta_pairs[0].first == 6.0);
  CHECK(m.delta_pairs[0].second == 8.5);
  CHECK(m.delta_gain == 2.5);
  // Node 3 completes after its second review, later than node 2.
  CHECK(m.lifecycle[2].t_end > m.lifecycle[1].t_end);
}

TEST_CASE("error episode: ERR is 3/13 and success still holds") {
  auto [policy, op] = error_scripts();
  auto record = run_episode(test_config(), policy, op);
  auto m = compute_episode_metrics(record, 8.0);
  CHECK(m.traj_len == 13);
  CHECK(m.invalid_steps == 3);
  CHECK(m.err_rate == 3.0 / 13.0);
  CHECK(m.success);
}

TEST_CASE("budget exhaustion: no success, 50 steps") {
  auto config = test_config();
  auto [policy, op] = never_finishing_scripts(config.t_max);
  auto record = run_episode(config, policy, op);
  auto m = compute_episode_metrics(record, 8.0);
  CHECK_FALSE(m.success);
  CHECK(m.traj_len == 50);
  // Node 2 is never drafted: lifecycle falls back to t_max.
  CHECK(m.lifecycle[1].t_start == 50);
  CHECK(m.lifecycle[1].t_end == 50);
}

TEST_CASE("re-plan resets node-level event windows") {
  // Plan 2 nodes, complete node 1, re-plan to 3 nodes, then work node 1
  // again. Events before the re-plan must not leak into lifecycle or deltas.
  std::vector<std::string> policy = {
      policy_reply("plan_outline"),
      policy_reply("write_paragraph", {{"section_id", 1}}),
      policy_reply("review_content", {{"section_id", 1}}),
      policy_reply("plan_outline"),
      policy_reply("write_paragraph", {{"section_id", 1}}),
      policy_reply("review_content", {{"section_id", 1}}),
      policy_reply("revise_paragraph", {{"section_id", 1}}),
      policy_reply("review_content", {{"section_id", 1}}),
      policy_reply("finish")};
  std::vector<std::string> op = {
      outline_reply(2), draft_reply(1), review_reply(9.0),
      outline_reply(3), draft_reply(1), review_reply(6.0),
      refine_reply(1),  review_reply(8.5)};
  auto p = ScriptedProvider::from_replies(policy);
  auto o = ScriptedProvider::from_replies(op);
  auto record = run_episode(test_config(), p, o);
  auto m = compute_episode_metrics(record, 8.0);

  CHECK(m.replans == 1);
  CHECK(m.outline_len == 3);
  CHECK(m.rho == 3.0 / 3);  // review count stays global
  // Only the post-re-plan pair (6.0 -> 8.5) counts.
  REQUIRE(m.delta_pairs.size() == 1);
  CHECK(m.delta_gain == 2.5);
  // Node 1 lifecycle restarts after the re-plan.
  CHECK(m.lifecycle[0].t_start == 4);
  CHECK(m.lifecycle[0].t_end == 7);
  CHECK(recount_via_file(record) == m);
}

TEST_CASE("metrics JSON round-trips exactly") {
  auto [policy, op] = struggle_scripts();
  auto record = run_episode(test_config(), policy, op);
  auto m = compute_episode_metrics(record, 8.0);
  auto restored = metrics_from_json(json::parse(metrics_to_json(m).dump()));
  CHECK(restored == m);
}

TEST_CASE("oracle equivalence over the canonical episodes") {
  for (auto maker : {golden_scripts, struggle_scripts, error_scripts}) {
    auto [policy, op] = maker();
    auto record = run_episode(test_config(), policy, op);
    CHECK(recount_via_file(record) ==
          compute_episode_metrics(record, record.config.tau));
  }
}

TEST_CASE("oracle equivalence over 1000 random legal episodes") {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
  std::mt19937 rng(20250825);
  for (int i = 0; i < 1000; ++i) {
    auto record = random_episode(rng);
    auto computed = compute_episode_metrics(record, record.config.tau);
    auto recounted = recount_via_file(record);
    if (!(computed == recounted)) {
      CAPTURE(i);
      CHECK(metrics_to_json(computed).dump() ==
            metrics_to_json(recounted).dump());
      REQUIRE(computed == recounted);
    }
  }
  CHECK(std::chrono::steady_clock::now() < deadline);
}

TEST_CASE("aggregate: means, medians, and missing-value handling") {
  std::vector<EpisodeMetrics> episodes;
  for (auto maker : {golden_scripts, struggle_scripts}) {
    auto [policy, op] = maker();
    auto record = run_episode(test_config(), policy, op);
    episodes.push_back(compute_episode_metrics(record, 8.0));
  }
  auto r = aggregate(episodes);
  CHECK(r.success_rate == 1.0);
  CHECK(r.mean_traj_len == 11.0);
  CHECK(*r.mean_eta == 2.75);
  CHECK(*r.mean_rho == 1.125);
  // Only the struggle episode has pairs; the mean skips the pair-less one.
  CHECK(*r.mean_delta_gain == 2.5);
  CHECK(r.median_t_start.has_value());
  CHECK(r.median_t_end.has_value());
  CHECK(*r.delta_med == *r.median_t_end - *r.median_t_start);

  auto empty = aggregate({});
  CHECK(empty.success_rate == 0.0);
  CHECK_FALSE(empty.mean_eta.has_value());
}

TEST_CASE("recount rejects damaged trajectory files") {
  auto dir = std::filesystem::temp_directory_path();
  auto path = dir / "ravel_damaged.jsonl";

  std::ofstream(path) << "{\"schema\": \"other\"}\n";
  CHECK_THROWS_AS(brute_force_recount(path.string(), 8.0), RecountError);

  std::ofstream(path) << "{\"schema\": \"ravel.trajectory.v1\", \"tau\": 8.0, "
                         "\"t_max\": 50}\nnot json\n";
  CHECK_THROWS_AS(brute_force_recount(path.string(), 8.0), RecountError);
  std::filesystem::remove(path);
}
