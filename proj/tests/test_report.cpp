// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "helpers.hpp"

using namespace ravel;
using namespace ravel::testing;

namespace {

AggregateReport run_aggregate(
    std::pair<ScriptedProvider, ScriptedProvider> (*maker)()) {
  auto [policy, op] = maker();
  auto record = run_episode(test_config(), policy, op);
  return aggregate({compute_episode_metrics(record, 8.0)});
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("report table has the full column set and one row per run") {
  std::vector<ReportRow> rows = {{"golden", run_aggregate(golden_scripts)},
                                 {"struggle", run_aggregate(struggle_scripts)},
                                 {"errs", run_aggregate(error_scripts)}};
  auto table = render_report(rows);
  auto lines = lines_of(table);
  REQUIRE(lines.size() == 4);
  for (const char* col :
       {"model", "S %", "eta", "rho %", "delta", "ERR %", "|O|", "|T|"})
    CHECK(lines[0].find(col) != std::string::npos);
  CHECK(lines[1].find("golden") == 0);
  CHECK(lines[2].find("struggle") == 0);
  CHECK(lines[3].find("errs") == 0);
}

TEST_CASE("golden row renders hand-checked cells") {
  auto table = render_report({{"golden", run_aggregate(golden_scripts)}});
  auto row = lines_of(table)[1];
  CHECK(row.find("100.0") != std::string::npos);  // S %
  CHECK(row.find("2.50") != std::string::npos);   // eta
  // rho as a percent with one decimal; delta-empty renders 0.00.
  CHECK(row.find("100.0") != std::string::npos);
  CHECK(row.find("0.00") != std::string::npos);
  CHECK(row.find("10.0") != std::string::npos);   // |T|
}

TEST_CASE("struggle row renders the refinement delta") {
  auto table = render_report({{"m", run_aggregate(struggle_scripts)}});
  auto row = lines_of(table)[1];
  CHECK(row.find("3.00") != std::string::npos);   // eta
  CHECK(row.find("125.0") != std::string::npos);  // rho %
  CHECK(row.find("2.50") != std::string::npos);   // delta
}

TEST_CASE("missing metrics render as an em dash") {
  EpisodeMetrics bare;  // no outline was ever planned
  bare.traj_len = 3;
  bare.invalid_steps = 3;
  bare.err_rate = 1.0;
  auto table = render_report({{"hopeless", aggregate({bare})}});
  auto row = lines_of(table)[1];
  CHECK(row.find("—") != std::string::npos);
  CHECK(row.find("100.0") != std::string::npos);  // ERR %
}

TEST_CASE("lifecycle CSV covers every node of every episode") {
  std::vector<ReportRow> rows = {{"golden", run_aggregate(golden_scripts)}};
  auto csv = render_lifecycle_csv(rows);
  auto lines = lines_of(csv);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "model,episode,node,t_start,t_end");
  CHECK(lines[1] == "golden,0,1,1,2");
  CHECK(lines[4] == "golden,0,4,7,8");
}

TEST_CASE("aggregate JSON includes per-episode metrics") {
  auto j = aggregate_to_json(run_aggregate(struggle_scripts));
  CHECK(j["success_rate"] == 1.0);
  CHECK(j["mean_eta"] == 3.0);
  CHECK(j["episodes"].size() == 1);
  CHECK(j["episodes"][0]["delta_gain"] == 2.5);
}

TEST_CASE("manuscript rendering follows outline order") {
  auto [policy, op] = golden_scripts();
  auto record = run_episode(test_config(), policy, op);
  auto md = render_manuscript(record.final_state);
  CHECK(md.find("# Title") == 0);
  auto s1 = md.find("## Section 1");
  auto s4 = md.find("## Section 4");
  CHECK(s1 != std::string::npos);
  CHECK(s4 != std::string::npos);
  CHECK(s1 < s4);
  CHECK(md.find("Body of section 2.") != std::string::npos);
}

TEST_CASE("run directory artifacts are written and reload cleanly") {
  auto [policy, op] = struggle_scripts();
  auto record = run_episode(test_config(), policy, op);
  auto dir = std::filesystem::temp_directory_path() / "ravel_run_dir_test";
  std::filesystem::remove_all(dir);
  write_run_dir(dir, record);

  for (const char* name : {"config.json", "trajectory.jsonl",
                           "final_state.json", "manuscript.md",
                           "episode.meta.json"})
    CHECK(std::filesystem::exists(dir / name));

  // Trajectory leads with the schema marker and one line per step.
  std::ifstream in(dir / "trajectory.jsonl");
  std::string line;
  std::getline(in, line);
  CHECK(json::parse(line)["schema"] == kTrajectorySchema);
  int steps = 0;
  while (std::getline(in, line))
    if (!line.empty()) {
      auto restored = step_from_json(json::parse(line));
      CHECK(step_to_json(restored).dump() ==
            step_to_json(record.steps[steps]).dump());
      ++steps;
    }
  CHECK(steps == 12);

  std::ifstream meta_in(dir / "episode.meta.json");
  json meta = json::parse(meta_in);
  CHECK(meta["outcome"] == "finished");
  CHECK(meta["steps"] == 12);
  CHECK(meta["template_version"] == prompts::kTemplateVersion);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config serialization is strict about unknown keys") {
  auto config = test_config();
  auto j = config_to_json(config);
  auto restored = config_from_json(json::parse(j.dump()));
  CHECK(restored.meta.topic == config.meta.topic);
  CHECK(restored.tau == 8.0);
  CHECK(restored.t_max == 50);
  CHECK(restored.temperature == 0.7);

  auto bad = json::parse(j.dump());
  bad["taau"] = 9.0;
  CHECK_THROWS_WITH_AS(config_from_json(bad), "unknown config key: taau",
                       std::invalid_argument);
  auto wrong_schema = json::parse(j.dump());
  wrong_schema["schema"] = "ravel.config.v999";
  CHECK_THROWS_AS(config_from_json(wrong_schema), std::invalid_argument);
}
