// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ravel/ravel.hpp>

namespace fs = std::filesystem;
using namespace ravel;

namespace {

struct ProviderFlags {
  std::string replay_path;
  std::string record_path;
};

void add_provider_flags(CLI::App* cmd, ProviderFlags& flags) {
  cmd->add_option("--replay", flags.replay_path,
                  "Serve all model calls from a recorded cassette");
  cmd->add_option("--record", flags.record_path,
                  "Record all live model calls into a cassette");
}

/// Owns whatever provider stack the flags select: replay cassette, live HTTP,
/// or live HTTP wrapped in a recorder.
struct ProviderStack {
  std::unique_ptr<Provider> inner;
  std::unique_ptr<Provider> outer;
  Provider& get() { return outer ? *outer : *inner; }
};

ProviderStack make_provider(const ProviderBinding& binding,
                            const ProviderFlags& flags) {
  ProviderStack stack;
  if (!flags.replay_path.empty()) {
    stack.inner = std::make_unique<ReplayProvider>(flags.replay_path);
    return stack;
  }
  stack.inner = std::make_unique<HttpProvider>(binding);
  if (!flags.record_path.empty())
    stack.outer =
        std::make_unique<RecordingProvider>(*stack.inner, flags.record_path);
  return stack;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(lineno) + " is not valid JSON");
    out.push_back(std::move(j));
  }
  return out;
}

void write_text(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

std::string default_run_id() {
  auto now = std::chrono::system_clock::now().time_since_epoch();
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  return "run-" + std::to_string(ms);
}

EpisodeRecord load_run_dir(const fs::path& dir) {
  EpisodeRecord record;
  record.config = config_from_json(read_json_file(dir / "config.json"));
  auto lines = read_jsonl(dir / "trajectory.jsonl");
  if (lines.empty() || lines[0].value("schema", "") != kTrajectorySchema)
    throw std::runtime_error(dir.string() + ": missing trajectory schema marker");
  for (std::size_t i = 1; i < lines.size(); ++i)
    record.steps.push_back(step_from_json(lines[i]));
  record.final_state = state_from_json(read_json_file(dir / "final_state.json"));
  auto meta = read_json_file(dir / "episode.meta.json");
  record.early_finish = meta.value("early_finish", false);
  std::string outcome = meta.value("outcome", "budget_exhausted");
  record.outcome = outcome == "finished"        ? Outcome::finished
                   : outcome == "aborted"       ? Outcome::aborted
                                                : Outcome::budget_exhausted;
  return record;
}

int cmd_run(const std::string& config_path, const ProviderFlags& flags,
            const std::string& out_root, std::string run_id,
            const std::string& templates_dir) {
  RunConfig config = config_from_json(read_json_file(config_path));
  prompts::TemplateSet templates;
  if (!templates_dir.empty())
    templates = prompts::TemplateSet::load_dir(templates_dir);

  ProviderStack policy = make_provider(config.policy_binding, flags);
  bool same_binding =
      config.policy_binding.endpoint == config.operator_binding.endpoint &&
      config.policy_binding.model_name == config.operator_binding.model_name;
  ProviderStack op;
  if (!same_binding && flags.replay_path.empty())
    op = make_provider(config.operator_binding, flags);
  Provider& op_ref = op.inner ? op.get() : policy.get();

  EpisodeRecord record = run_episode(config, policy.get(), op_ref, templates);
  if (run_id.empty()) run_id = default_run_id();
  fs::path dir = fs::path(out_root) / run_id;
  write_run_dir(dir, record);
  auto metrics = compute_episode_metrics(record, config.tau);
  write_text(dir / "metrics.json", metrics_to_json(metrics).dump(2) + "\n");
  std::cout << "run " << run_id << ": " << to_string(record.outcome) << ", "
            << record.steps.size() << " steps\n";
  if (record.outcome == Outcome::aborted) {
    std::cerr << "error: " << record.error << "\n";
    return 1;
  }
  return 0;
}

int cmd_metrics(const std::string& run_dir) {
  EpisodeRecord record = load_run_dir(run_dir);
  auto recount =
      brute_force_recount((fs::path(run_dir) / "trajectory.jsonl").string(),
                          record.config.tau);
  std::cout << metrics_to_json(recount).dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::string& run_dir) {
  EpisodeRecord record = load_run_dir(run_dir);
  auto stored = metrics_from_json(read_json_file(fs::path(run_dir) / "metrics.json"));
  auto recomputed = compute_episode_metrics(record, record.config.tau);
  auto recount =
      brute_force_recount((fs::path(run_dir) / "trajectory.jsonl").string(),
                          record.config.tau);
  if (!(stored == recomputed) || !(stored == recount)) {
    std::cerr << "verify failed: stored metrics diverge from recomputation\n";
    std::cerr << "stored:     " << metrics_to_json(stored).dump() << "\n";
    std::cerr << "recomputed: " << metrics_to_json(recomputed).dump() << "\n";
    std::cerr << "recount:    " << metrics_to_json(recount).dump() << "\n";
    return 1;
  }
  std::cout << "verify ok: " << run_dir << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs,
               const std::string& csv_path) {
  std::vector<ReportRow> rows;
  for (const auto& dir : run_dirs) {
    auto m = metrics_from_json(read_json_file(fs::path(dir) / "metrics.json"));
    rows.push_back({fs::path(dir).filename().string(), aggregate({m})});
  }
  std::cout << render_report(rows);
  if (!csv_path.empty()) write_text(csv_path, render_lifecycle_csv(rows));
  return 0;
}

ProviderBinding binding_from_flags(const std::string& endpoint,
                                   const std::string& model,
                                   const std::string& credential_env) {
  ProviderBinding b;
  b.endpoint = endpoint;
  b.model_name = model;
  b.credential_env = credential_env;
  return b;
}

int cmd_bench(const std::string& samples_path, const std::string& out_path,
              const ProviderBinding& binding, const ProviderFlags& flags) {
  std::vector<TaskSample> samples;
  for (const auto& j : read_jsonl(samples_path))
    samples.push_back(sample_from_json(j));
  ProviderStack subject = make_provider(binding, flags);
  CallConfig cfg{binding.model_name, 0.7, std::nullopt};
  auto results = bench_inference(subject.get(), cfg, samples);
  std::ostringstream os;
  for (const auto& r : results) {
    ordered_json j;
    j["sample_id"] = r.sample_id;
    j["candidate"] = r.candidate ? ordered_json(*r.candidate) : nullptr;
    if (!r.error.empty()) j["error"] = r.error;
    os << j.dump() << "\n";
  }
  write_text(out_path, os.str());
  std::cout << "benched " << results.size() << " samples -> " << out_path
            << "\n";
  return 0;
}

int cmd_judge(const std::string& samples_path,
              const std::string& candidates_path, const std::string& out_path,
              const JudgeConfig& config, const ProviderBinding& binding,
              const ProviderFlags& flags) {
  std::map<std::string, TaskSample> samples;
  for (const auto& j : read_jsonl(samples_path)) {
    auto s = sample_from_json(j);
    samples[s.id] = s;
  }
  ProviderStack judge = make_provider(binding, flags);
  CallConfig cfg{binding.model_name, 0.7, std::nullopt};
  std::ostringstream os;
  int scored = 0;
  for (const auto& j : read_jsonl(candidates_path)) {
    std::string sample_id = j.at("sample_id").get<std::string>();
    auto it = samples.find(sample_id);
    if (it == samples.end() || j.at("candidate").is_null()) continue;
    auto verdict = judge_sample(judge.get(), cfg, it->second,
                                j["candidate"].get<std::string>(), config);
    ordered_json line;
    line["sample_id"] = sample_id;
    line["model"] = j.value("model", "");
    if (std::holds_alternative<JudgeVerdict>(verdict)) {
      const auto& v = std::get<JudgeVerdict>(verdict);
      line["score"] = v.score;
      line["analysis"] = v.analysis;
      ++scored;
    } else {
      const auto& e = std::get<ActionError>(verdict);
      line["score"] = nullptr;
      line["error"] = to_string(e.kind) + ": " + e.detail;
    }
    os << line.dump() << "\n";
  }
  write_text(out_path, os.str());
  std::cout << "scored " << scored << " candidates -> " << out_path << "\n";
  return 0;
}

int cmd_meta_eval(const std::string& pairs_path,
                  const std::string& ratings_path) {
  if (!pairs_path.empty()) {
    std::vector<PreferencePair> pairs;
    for (const auto& j : read_jsonl(pairs_path))
      pairs.push_back({j.at("human_a").get<double>(),
                       j.at("human_b").get<double>(),
                       j.at("judge_a").get<double>(),
                       j.at("judge_b").get<double>()});
    auto consistency = meta_eval(pairs);
    if (consistency)
      std::cout << "consistency: " << format_score(*consistency * 100)
                << "% over " << pairs.size() << " pairs\n";
    else
      std::cout << "consistency: undefined (no usable pairs)\n";
  }
  if (!ratings_path.empty()) {
    std::vector<std::pair<double, double>> ratings;
    for (const auto& j : read_jsonl(ratings_path))
      ratings.emplace_back(j.at("rater1").get<double>(),
                           j.at("rater2").get<double>());
    auto stats = agreement_stats(ratings);
    std::cout << "kappa: " << (stats.kappa ? std::to_string(*stats.kappa) : "—")
              << "\npearson: "
              << (stats.pearson ? std::to_string(*stats.pearson) : "—") << "\n";
  }
  return 0;
}

int cmd_construct(const std::string& task, const std::string& docs_path,
                  const std::string& out_dir, const ProviderBinding& binding,
                  const ProviderFlags& flags,
                  const std::string& drafts_path) {
  std::vector<SourceDoc> docs;
  for (const auto& j : read_jsonl(docs_path)) {
    SourceDoc d;
    d.id = j.at("id").get<std::string>();
    d.text = j.at("text").get<std::string>();
    d.genre = j.value("genre", "");
    d.language = j.value("language", "EN");
    docs.push_back(std::move(d));
  }
  std::map<std::string, std::string> drafts;  // doc id -> subject draft
  if (!drafts_path.empty())
    for (const auto& j : read_jsonl(drafts_path))
      drafts[j.at("id").get<std::string>()] = j.at("draft").get<std::string>();

  ProviderStack assistant = make_provider(binding, flags);
  CallConfig cfg{binding.model_name, 0.7, std::nullopt};
  CorpusLimits limits;

  std::ostringstream samples_out, quarantine_out, provenance_out;
  int emitted = 0, quarantined = 0;
  auto emit = [&](const ConstructResult<ConstructedSample>& result) {
    if (std::holds_alternative<ConstructedSample>(result)) {
      const auto& c = std::get<ConstructedSample>(result);
      samples_out << sample_to_json(c.sample).dump() << "\n";
      ordered_json p;
      p["sample_id"] = c.sample.id;
      p["provenance"] = c.provenance;
      provenance_out << p.dump() << "\n";
      ++emitted;
    } else {
      quarantine_out
          << quarantine_to_json(std::get<QuarantineRecord>(result)).dump()
          << "\n";
      ++quarantined;
    }
  };

  for (const auto& doc : docs) {
    if (task == "end2end" || task == "all")
      emit(build_end2end(doc, assistant.get(), cfg, limits));
    if (task == "expand" || task == "all")
      emit(build_expand(doc, assistant.get(), cfg, limits));
    if (task == "cloze" || task == "all")
      emit(build_cloze(doc, assistant.get(), cfg, limits));
    if (task == "edit" || task == "all") {
      auto it = drafts.find(doc.id);
      emit(build_edit(doc, it == drafts.end() ? "" : it->second,
                      assistant.get(), cfg, limits));
    }
  }
  write_text(fs::path(out_dir) / "samples.jsonl", samples_out.str());
  write_text(fs::path(out_dir) / "quarantine" / "quarantine.jsonl",
             quarantine_out.str());
  write_text(fs::path(out_dir) / "provenance" / "provenance.jsonl",
             provenance_out.str());
  std::cout << "constructed " << emitted << " samples, " << quarantined
            << " quarantined -> " << out_dir << "\n";
  return 0;
}

int cmd_templates_export(const std::string& dir) {
  prompts::TemplateSet t;
  write_text(fs::path(dir) / "policy_system.tmpl", t.policy_system);
  write_text(fs::path(dir) / "outline.tmpl", t.outline);
  write_text(fs::path(dir) / "draft.tmpl", t.draft);
  write_text(fs::path(dir) / "review.tmpl", t.review);
  write_text(fs::path(dir) / "refine.tmpl", t.refine);
  std::cout << "exported templates (version " << t.version << ") -> " << dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ravel: agentic text-synthesis evaluation toolkit"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Execute one writing episode");
  std::string run_config, run_out = "runs", run_id, run_templates;
  ProviderFlags run_flags;
  run->add_option("--config", run_config, "Run config file")->required();
  run->add_option("--out", run_out, "Output root directory");
  run->add_option("--run-id", run_id, "Run directory name");
  run->add_option("--templates", run_templates, "Prompt template directory");
  add_provider_flags(run, run_flags);

  // metrics
  auto* metrics = app.add_subcommand("metrics",
                                     "Recompute metrics from a run directory");
  std::string metrics_dir;
  metrics->add_option("run_dir", metrics_dir)->required();

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Re-derive metrics and diff against stored artifacts");
  std::string verify_dir;
  verify->add_option("run_dir", verify_dir)->required();

  // report
  auto* report = app.add_subcommand("report", "Render the aggregate table");
  std::vector<std::string> report_dirs;
  std::string report_csv;
  report->add_option("run_dirs", report_dirs)->required();
  report->add_option("--lifecycle-csv", report_csv,
                     "Write node lifecycle CSV to this path");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a subject model on samples");
  std::string bench_samples, bench_out, bench_endpoint, bench_model,
      bench_cred;
  ProviderFlags bench_flags;
  bench->add_option("--samples", bench_samples)->required();
  bench->add_option("--out", bench_out)->required();
  bench->add_option("--endpoint", bench_endpoint);
  bench->add_option("--model", bench_model);
  bench->add_option("--credential-env", bench_cred);
  add_provider_flags(bench, bench_flags);

  // judge
  auto* judge = app.add_subcommand("judge", "Score candidates against samples");
  std::string judge_samples, judge_candidates, judge_out, judge_endpoint,
      judge_model, judge_cred;
  JudgeConfig judge_config;
  bool no_rubric = false, no_traits = false, no_reference = false;
  ProviderFlags judge_flags;
  judge->add_option("--samples", judge_samples)->required();
  judge->add_option("--candidates", judge_candidates)->required();
  judge->add_option("--out", judge_out)->required();
  judge->add_flag("--no-rubric", no_rubric, "Drop the scoring rubric block");
  judge->add_flag("--no-traits", no_traits, "Drop the evaluation traits block");
  judge->add_flag("--no-reference", no_reference, "Drop the reference text");
  judge->add_option("--endpoint", judge_endpoint);
  judge->add_option("--model", judge_model);
  judge->add_option("--credential-env", judge_cred);
  add_provider_flags(judge, judge_flags);

  // meta-eval
  auto* meta = app.add_subcommand("meta-eval",
                                  "Judge-vs-human agreement statistics");
  std::string meta_pairs, meta_ratings;
  meta->add_option("--pairs", meta_pairs, "Preference pair file");
  meta->add_option("--ratings", meta_ratings, "Paired rater score file");

  // construct
  auto* construct = app.add_subcommand("construct",
                                       "Reverse-construct task samples");
  std::string con_task = "all", con_docs, con_out, con_endpoint, con_model,
              con_cred, con_drafts;
  ProviderFlags con_flags;
  construct->add_option("--task", con_task)
      ->check(CLI::IsMember({"cloze", "expand", "edit", "end2end", "all"}));
  construct->add_option("--docs", con_docs)->required();
  construct->add_option("--out", con_out)->required();
  construct->add_option("--drafts", con_drafts,
                        "Subject drafts for the edit task");
  construct->add_option("--endpoint", con_endpoint);
  construct->add_option("--model", con_model);
  construct->add_option("--credential-env", con_cred);
  add_provider_flags(construct, con_flags);

  // templates
  auto* templates = app.add_subcommand("templates", "Prompt template tooling");
  auto* texport = templates->add_subcommand("export",
                                            "Write embedded templates to disk");
  std::string texport_dir = "templates";
  texport->add_option("--dir", texport_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*run)
      return cmd_run(run_config, run_flags, run_out, run_id, run_templates);
    if (*metrics) return cmd_metrics(metrics_dir);
    if (*verify) return cmd_verify(verify_dir);
    if (*report) return cmd_report(report_dirs, report_csv);
    if (*bench)
      return cmd_bench(bench_samples, bench_out,
                       binding_from_flags(bench_endpoint, bench_model,
                                          bench_cred),
                       bench_flags);
    if (*judge) {
      judge_config.include_rubric = !no_rubric;
      judge_config.include_traits = !no_traits;
      judge_config.include_reference = !no_reference;
      return cmd_judge(judge_samples, judge_candidates, judge_out,
                       judge_config,
                       binding_from_flags(judge_endpoint, judge_model,
                                          judge_cred),
                       judge_flags);
    }
    if (*meta) return cmd_meta_eval(meta_pairs, meta_ratings);
    if (*construct)
      return cmd_construct(con_task, con_docs, con_out,
                           binding_from_flags(con_endpoint, con_model,
                                              con_cred),
                           con_flags, con_drafts);
    if (*texport) return cmd_templates_export(texport_dir);
    if (*templates) {
      std::cerr << templates->help();
      return 2;
    }
  } catch (const CredentialError& e) {
    std::cerr << "credential error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
