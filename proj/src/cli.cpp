#include "srr/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "srr/diagnostics.hpp"
#include "srr/jsonl.hpp"
#include "srr/judge.hpp"
#include "srr/reward.hpp"
#include "srr/rollout.hpp"
#include "srr/rubric.hpp"
#include "srr/run_config.hpp"
#include "srr/sandbox.hpp"

namespace srr::cli {

namespace {

using nlohmann::json;

struct CommonArgs {
  std::optional<std::string> config_path;
  std::map<std::string, double> reward_overrides;
  std::optional<int> group_size_hint;
  std::optional<std::string> judge_endpoint;
  std::optional<std::string> judge_model;
  std::optional<int> judge_max_attempts;
  std::optional<int> judge_concurrency;
};

void add_common_options(CLI::App& app, CommonArgs& args) {
  app.add_option("--config", args.config_path, "JSON config file");
  auto reward_override = [&args, &app](const std::string& flag, const std::string& key,
                                       const std::string& help) {
    app.add_option_function<double>(
           flag, [&args, key](double value) { args.reward_overrides[key] = value; }, help)
        ->expected(1);
  };
  reward_override("--budget-suggest", "budget_suggest", "total SUGGEST budget");
  reward_override("--budget-pitfall", "budget_pitfall", "total PITFALL budget (negative)");
  reward_override("--budget-bonus", "budget_bonus", "total BONUS budget");
  reward_override("--format-weight", "format_weight", "format reward weight lambda");
  reward_override("--epsilon", "epsilon", "normalization epsilon");
  app.add_option("--group-size-hint", args.group_size_hint, "expected rollouts per prompt");
  app.add_option("--judge-endpoint", args.judge_endpoint, "chat-completion endpoint URL");
  app.add_option("--judge-model", args.judge_model, "judge model name");
  app.add_option("--judge-max-attempts", args.judge_max_attempts, "retries per rollout");
  app.add_option("--judge-concurrency", args.judge_concurrency, "max in-flight judge calls");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig config = load_run_config(args.config_path);
  for (const auto& [key, value] : args.reward_overrides) {
    if (key == "budget_suggest") config.reward.budget_suggest = value;
    else if (key == "budget_pitfall") config.reward.budget_pitfall = value;
    else if (key == "budget_bonus") config.reward.budget_bonus = value;
    else if (key == "format_weight") config.reward.format_weight = value;
    else if (key == "epsilon") config.reward.epsilon = value;
  }
  if (args.group_size_hint) config.reward.group_size_hint = *args.group_size_hint;
  if (args.judge_endpoint) config.judge.endpoint = *args.judge_endpoint;
  if (args.judge_model) config.judge.model = *args.judge_model;
  if (args.judge_max_attempts) config.judge.max_attempts = *args.judge_max_attempts;
  if (args.judge_concurrency) config.judge.concurrency = *args.judge_concurrency;
  config.validate();
  return config;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open file");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path, 0, "cannot open file for writing");
  return out;
}

// Rubrics per problem_id plus each problem's statement when present.
struct RubricIndex {
  std::map<std::string, Rubric> rubrics;
  std::map<std::string, std::string> problems;
};

RubricIndex load_rubrics(const std::string& path) {
  std::ifstream in = open_input(path);
  RubricIndex index;
  for (const RubricRecord& record : read_rubric_jsonl(in, path)) {
    Rubric rubric = parse_rubric_text(record.problem_id, record.rubric_text);
    for (const std::string& warning : rubric_warnings(rubric))
      std::cerr << "warning: " << warning << '\n';
    index.rubrics[record.problem_id] = std::move(rubric);
    if (record.problem) index.problems[record.problem_id] = *record.problem;
  }
  return index;
}

std::unique_ptr<Transport> make_transport(const std::optional<std::string>& mock_replies_path,
                                          const RunConfig& config) {
  if (mock_replies_path) {
    auto scripted = std::make_unique<ScriptedTransport>();
    std::ifstream in = open_input(*mock_replies_path);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json object = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (object.is_discarded() || !object.is_object() || !object.contains("prompt_id") ||
          !object.contains("rollout_index") || !object.contains("replies") ||
          !object["replies"].is_array())
        throw DataError(*mock_replies_path, line_number,
                        "expected {prompt_id, rollout_index, replies:[...]}");
      std::vector<std::string> replies;
      for (const json& reply : object["replies"]) replies.push_back(reply.get<std::string>());
      scripted->script(object["prompt_id"].get<std::string>() + "#" +
                           std::to_string(object["rollout_index"].get<int>()),
                       std::move(replies));
    }
    return scripted;
  }
  if (config.judge.endpoint.empty())
    throw ConfigError("no judge endpoint configured (set judge.endpoint or --judge-endpoint)");
  HttpTransport::Options options;
  if (const char* token = std::getenv("SRR_JUDGE_TOKEN")) options.bearer_token = token;
  return std::make_unique<HttpTransport>(options);
}

// ---------------------------------------------------------------------------

int cmd_score(const CommonArgs& common, const std::string& rollouts_path,
              const std::string& rubrics_path, const std::optional<std::string>& verdicts_path,
              bool judge_live, const std::optional<std::string>& mock_replies_path,
              const std::string& out_path, const std::optional<std::string>& manifest_path) {
  const RunConfig config = resolve_config(common);

  std::ifstream rollouts_in = open_input(rollouts_path);
  const std::vector<RolloutRecord> records = read_rollout_jsonl(rollouts_in, rollouts_path);
  GroupedRollouts grouped = group_rollout_records(records, rollouts_path);
  const RubricIndex rubric_index = rubrics_path.empty() ? RubricIndex{} : load_rubrics(rubrics_path);

  std::map<std::pair<std::string, int>, std::vector<Verdict>> verdicts_by_key;
  if (verdicts_path) {
    std::ifstream verdicts_in = open_input(*verdicts_path);
    for (const VerdictRecord& record : read_verdict_jsonl(verdicts_in, *verdicts_path))
      verdicts_by_key[{record.prompt_id, record.rollout_index}] = record.verdicts;
  }

  std::unique_ptr<Transport> transport;
  if (judge_live) transport = make_transport(mock_replies_path, config);

  // Groups are independent scoring units; outcomes are collected per group
  // and written in input order so reruns stay byte-identical.
  struct GroupOutcome {
    std::string records;
    json manifest_entries = json::array();
    bool service_failure = false;
  };
  std::vector<GroupOutcome> outcomes(grouped.groups.size());

  auto process_group = [&](std::size_t g) {
    GroupRollouts& group = grouped.groups[g];
    GroupOutcome& outcome = outcomes[g];
    const auto rubric_it = rubric_index.rubrics.find(group.prompt_id);
    if (rubric_it == rubric_index.rubrics.end()) {
      outcome.manifest_entries.push_back(
          {{"prompt_id", group.prompt_id}, {"reason", "missing rubric"}});
      return;
    }
    const Rubric& rubric = rubric_it->second;
    if (group.problem_text.empty()) {
      const auto problem_it = rubric_index.problems.find(group.prompt_id);
      if (problem_it != rubric_index.problems.end()) group.problem_text = problem_it->second;
    }

    std::vector<std::vector<Verdict>> validated(group.rollouts.size());
    if (judge_live) {
      const GroupJudgeResult judged = judge_group(group, rubric, *transport, config.judge);
      validated = judged.verdicts;
      for (const RolloutJudgeFailure& failure : judged.failures) {
        outcome.service_failure = true;
        outcome.manifest_entries.push_back(
            {{"prompt_id", group.prompt_id},
             {"rollout_index", grouped.rollout_indices[g][failure.rollout_index]},
             {"reason", "judge failed: " + failure.reason},
             {"attempts", failure.attempts}});
      }
    } else {
      for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
        const auto key = std::make_pair(group.prompt_id, grouped.rollout_indices[g][i]);
        const auto found = verdicts_by_key.find(key);
        if (found == verdicts_by_key.end()) continue;
        validated[i] = validate_verdicts(rubric, found->second,
                                         static_cast<int>(group.rollouts[i].step_spans.size()))
                           .valid;
      }
    }

    const GroupAdvantages advantages =
        compute_group_advantages(group, rubric, validated, config.reward);
    for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
      outcome.records += advantage_record_to_json(
          group.prompt_id, grouped.rollout_indices[g][i], advantages.rollouts[i],
          advantages.degenerate_group);
      outcome.records += '\n';
    }
  };

  if (judge_live) {
    // The judge gateway already bounds in-flight requests per group.
    for (std::size_t g = 0; g < grouped.groups.size(); ++g) process_group(g);
  } else {
    const unsigned pool_size =
        std::min<unsigned>({8u, std::max(1u, std::thread::hardware_concurrency()),
                            static_cast<unsigned>(grouped.groups.size())});
    if (pool_size <= 1) {
      for (std::size_t g = 0; g < grouped.groups.size(); ++g) process_group(g);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < pool_size; ++w)
        pool.emplace_back([&]() {
          for (std::size_t g = next.fetch_add(1); g < grouped.groups.size();
               g = next.fetch_add(1))
            process_group(g);
        });
      for (std::thread& thread : pool) thread.join();
    }
  }

  std::ofstream out = open_output(out_path);
  json manifest = json::array();
  bool any_service_failure = false;
  for (const GroupOutcome& outcome : outcomes) {
    out << outcome.records;
    any_service_failure = any_service_failure || outcome.service_failure;
    for (const json& entry : outcome.manifest_entries) manifest.push_back(entry);
  }

  if (manifest_path) {
    std::ofstream manifest_out = open_output(*manifest_path);
    manifest_out << manifest.dump(2) << '\n';
  }
  if (any_service_failure) return kExitService;
  if (!manifest.empty()) {
    std::cerr << manifest.size() << " group-level problem(s); see manifest\n";
    if (!manifest_path) std::cerr << manifest.dump(2) << '\n';
    return kExitData;
  }
  return kExitOk;
}

int cmd_judge(const CommonArgs& common, const std::string& rollouts_path,
              const std::string& rubrics_path, const std::string& out_path,
              const std::optional<std::string>& audit_path,
              const std::optional<std::string>& mock_replies_path) {
  const RunConfig config = resolve_config(common);

  std::ifstream rollouts_in = open_input(rollouts_path);
  GroupedRollouts grouped =
      group_rollout_records(read_rollout_jsonl(rollouts_in, rollouts_path), rollouts_path);
  const RubricIndex rubric_index = load_rubrics(rubrics_path);
  std::unique_ptr<Transport> transport = make_transport(mock_replies_path, config);

  std::ofstream out = open_output(out_path);
  std::optional<std::ofstream> audit;
  if (audit_path) audit = open_output(*audit_path);

  bool any_failure = false;
  for (std::size_t g = 0; g < grouped.groups.size(); ++g) {
    GroupRollouts& group = grouped.groups[g];
    const auto rubric_it = rubric_index.rubrics.find(group.prompt_id);
    if (rubric_it == rubric_index.rubrics.end()) {
      std::cerr << "skipping " << group.prompt_id << ": missing rubric\n";
      any_failure = true;
      continue;
    }
    if (group.problem_text.empty()) {
      const auto problem_it = rubric_index.problems.find(group.prompt_id);
      if (problem_it != rubric_index.problems.end()) group.problem_text = problem_it->second;
    }

    const GroupJudgeResult judged =
        judge_group(group, rubric_it->second, *transport, config.judge);
    for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
      VerdictRecord record;
      record.prompt_id = group.prompt_id;
      record.rollout_index = grouped.rollout_indices[g][i];
      record.verdicts = judged.verdicts[i];
      out << verdict_record_to_json(record) << '\n';
      if (audit) {
        for (std::size_t attempt = 0; attempt < judged.raw_replies[i].size(); ++attempt) {
          const json entry = {{"schema_version", kSchemaVersion},
                              {"prompt_id", group.prompt_id},
                              {"rollout_index", grouped.rollout_indices[g][i]},
                              {"attempt", attempt},
                              {"reply", judged.raw_replies[i][attempt]}};
          *audit << entry.dump() << '\n';
        }
      }
    }
    for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
      const int rejected = judged.validations[i].rejected_total();
      if (rejected > 0)
        std::cerr << group.prompt_id << "#" << grouped.rollout_indices[g][i] << ": "
                  << rejected << " verdict(s) rejected during validation\n";
    }
    for (const RolloutJudgeFailure& failure : judged.failures) {
      any_failure = true;
      std::cerr << group.prompt_id << "#" << grouped.rollout_indices[g][failure.rollout_index]
                << " failed after " << failure.attempts << " attempts: " << failure.reason
                << '\n';
    }
  }
  return any_failure ? kExitService : kExitOk;
}

int cmd_diagnose(const CommonArgs& common, const std::string& responses_path,
                 const std::optional<std::string>& step_verdicts_path,
                 const std::string& out_path) {
  const RunConfig config = resolve_config(common);

  std::ifstream responses_in = open_input(responses_path);
  const std::vector<RolloutRecord> records = read_rollout_jsonl(responses_in, responses_path);

  std::map<std::pair<std::string, int>, std::vector<bool>> step_verdicts;
  if (step_verdicts_path) {
    std::ifstream verdicts_in = open_input(*step_verdicts_path);
    for (const StepVerdictRecord& record :
         read_step_verdict_jsonl(verdicts_in, *step_verdicts_path))
      step_verdicts[{record.prompt_id, record.rollout_index}] = record.steps;
  }

  json response_reports = json::array();
  int looping_count = 0;
  double accuracy_loop = 0.0, accuracy_no_loop = 0.0;
  int loop_n = 0, no_loop_n = 0;
  double mean_self_correction = 0.0;
  ProcessOutcomeTally tally;

  for (const RolloutRecord& record : records) {
    const Rollout rollout =
        record.token_offsets
            ? make_rollout(record.text, *record.token_offsets, record.gold_answer)
            : make_rollout(record.text, record.gold_answer);
    const LoopReport report =
        detect_looping(rollout.response_text, config.looping.lexicon, config.looping.thresholds);

    json triggered = json::array();
    for (LoopCriterion criterion : report.triggered) triggered.push_back(to_string(criterion));
    response_reports.push_back({{"prompt_id", record.prompt_id},
                                {"rollout_index", record.rollout_index},
                                {"is_looping", report.is_looping},
                                {"triggered", std::move(triggered)},
                                {"self_correction_count", report.self_correction_count},
                                {"duplicate_paragraph_fraction",
                                 report.duplicate_paragraph_fraction},
                                {"accuracy_reward", rollout.accuracy_reward},
                                {"format_reward", rollout.format_reward}});

    mean_self_correction += report.self_correction_count;
    if (report.is_looping) {
      ++looping_count;
      accuracy_loop += rollout.accuracy_reward;
      ++loop_n;
    } else {
      accuracy_no_loop += rollout.accuracy_reward;
      ++no_loop_n;
    }

    ++tally.total;
    const auto verdict_it = step_verdicts.find({record.prompt_id, record.rollout_index});
    if (verdict_it != step_verdicts.end()) {
      switch (categorize_trajectory(rollout.accuracy_reward == 1, verdict_it->second)) {
        case TrajectoryCategory::kAnswerOkStepsOk: ++tally.answer_ok_steps_ok; break;
        case TrajectoryCategory::kAnswerOkStepsBad: ++tally.answer_ok_steps_bad; break;
        case TrajectoryCategory::kAnswerBadStepsOk: ++tally.answer_bad_steps_ok; break;
        case TrajectoryCategory::kAnswerBadStepsBad: ++tally.answer_bad_steps_bad; break;
      }
    }
  }

  json report = {{"schema_version", kSchemaVersion}, {"responses", std::move(response_reports)}};
  if (!records.empty()) {
    report["aggregate"] = {
        {"total", records.size()},
        {"loop_rate_percent", 100.0 * looping_count / static_cast<double>(records.size())},
        {"accuracy_loop_percent",
         loop_n > 0 ? 100.0 * accuracy_loop / loop_n : 0.0},
        {"accuracy_no_loop_percent",
         no_loop_n > 0 ? 100.0 * accuracy_no_loop / no_loop_n : 0.0},
        {"mean_self_correction", mean_self_correction / static_cast<double>(records.size())},
    };
    if (step_verdicts_path) {
      const FrrMtr rates = frr_mtr(tally);
      report["frr_mtr"] = {
          {"judged", tally.four_way_sum()},
          {"total", tally.total},
          {"answer_ok_steps_ok", tally.answer_ok_steps_ok},
          {"answer_ok_steps_bad", tally.answer_ok_steps_bad},
          {"answer_bad_steps_ok", tally.answer_bad_steps_ok},
          {"answer_bad_steps_bad", tally.answer_bad_steps_bad},
          {"frr_percent", rates.frr_percent},
          {"mtr_percent", rates.mtr_percent},
      };
      std::ostringstream line;
      line << std::fixed << std::setprecision(1) << "FRR " << rates.frr_percent << "% MTR "
           << rates.mtr_percent << "%";
      std::cerr << line.str() << '\n';
    }
  }

  std::ofstream out = open_output(out_path);
  out << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_stats(const CommonArgs& /*common*/, const std::string& rubrics_path,
              const std::optional<std::string>& out_path) {
  std::ifstream in = open_input(rubrics_path);
  std::vector<Rubric> corpus;
  for (const RubricRecord& record : read_rubric_jsonl(in, rubrics_path))
    corpus.push_back(parse_rubric_text(record.problem_id, record.rubric_text));
  const CorpusStats stats = corpus_stats(corpus);

  auto stats_json = [](const CountStats& s) {
    return json{{"mean", s.mean}, {"std", s.stddev}, {"median", s.median},
                {"min", s.min}, {"max", s.max}};
  };
  json histogram = json::object();
  for (const auto& [count, samples] : stats.total_count_histogram)
    histogram[std::to_string(count)] = samples;
  json cooccurrence = json::array();
  for (const auto& [key, samples] : stats.pitfall_bonus_cooccurrence)
    cooccurrence.push_back(
        {{"pitfall", key.first}, {"bonus", key.second}, {"samples", samples}});

  const json report = {
      {"schema_version", kSchemaVersion},
      {"total_samples", stats.total_samples},
      {"total", stats_json(stats.total)},
      {"by_type",
       {{"SUGGEST", stats_json(stats.by_type[0])},
        {"PITFALL", stats_json(stats.by_type[1])},
        {"BONUS", stats_json(stats.by_type[2])},
        {"ANSWER", stats_json(stats.by_type[3])}}},
      {"total_count_histogram", std::move(histogram)},
      {"pitfall_bonus_cooccurrence", std::move(cooccurrence)},
  };

  // Aligned text table alongside the JSON report.
  std::ostringstream table;
  table << std::left << std::setw(10) << "Type" << std::right << std::setw(8) << "Mean"
        << std::setw(8) << "Std" << std::setw(8) << "Median" << std::setw(6) << "Min"
        << std::setw(6) << "Max" << '\n';
  auto table_row = [&](const std::string& name, const CountStats& s) {
    table << std::left << std::setw(10) << name << std::right << std::fixed
          << std::setprecision(2) << std::setw(8) << s.mean << std::setw(8) << s.stddev
          << std::setprecision(1) << std::setw(8) << s.median << std::setw(6) << s.min
          << std::setw(6) << s.max << '\n';
  };
  table_row("SUGGEST", stats.by_type[0]);
  table_row("PITFALL", stats.by_type[1]);
  table_row("BONUS", stats.by_type[2]);
  table_row("ANSWER", stats.by_type[3]);
  table_row("Total", stats.total);
  table << "Samples: " << stats.total_samples << '\n';
  std::cout << table.str();

  if (out_path) {
    std::ofstream out = open_output(*out_path);
    out << report.dump(2) << '\n';
  } else {
    std::cout << report.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_sandbox(const CommonArgs& common, const std::string& mode_name,
                std::vector<std::uint64_t> seeds, int iterations, int groups, int group_size,
                double learning_rate, bool empty_rubric,
                const std::optional<std::string>& csv_path,
                const std::optional<std::string>& json_path) {
  const RunConfig config = resolve_config(common);
  sandbox::TrainConfig train_config;
  train_config.mode = sandbox::ablation_mode_from_string(mode_name);
  train_config.iterations = iterations;
  train_config.groups_per_iteration = groups;
  train_config.group_size = group_size;
  train_config.learning_rate = learning_rate;
  train_config.empty_rubric = empty_rubric;
  train_config.reward = config.reward;
  if (seeds.empty()) seeds = {1};

  std::optional<std::ofstream> csv;
  if (csv_path) {
    csv = open_output(*csv_path);
    *csv << "seed,iteration,mean_reward,mean_steps,zero_sum_residual\n";
  }

  json summary = json::array();
  for (std::uint64_t seed : seeds) {
    train_config.seed = seed;
    const sandbox::TrainResult result =
        sandbox::train(sandbox::make_uniform_policy(), train_config);
    double max_zero_sum = 0.0, max_decomposition = 0.0;
    for (const sandbox::TraceRow& row : result.trace) {
      max_zero_sum = std::max(max_zero_sum, row.zero_sum_residual);
      max_decomposition = std::max(max_decomposition, row.decomposition_residual);
      if (csv)
        *csv << seed << ',' << row.iteration << ',' << row.mean_reward << ','
             << row.mean_steps << ',' << row.zero_sum_residual << '\n';
    }
    const sandbox::TraceRow& final_row = result.trace.back();
    summary.push_back({{"seed", seed},
                       {"mode", mode_name},
                       {"iterations", iterations},
                       {"final_mean_reward", final_row.mean_reward},
                       {"final_mean_steps", final_row.mean_steps},
                       {"max_zero_sum_residual", max_zero_sum},
                       {"max_decomposition_residual", max_decomposition}});
  }

  const json report = {{"schema_version", kSchemaVersion}, {"runs", std::move(summary)}};
  if (json_path) {
    std::ofstream out = open_output(*json_path);
    out << report.dump(2) << '\n';
  } else {
    std::cout << report.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_config(const CommonArgs& common, const std::optional<std::string>& out_path) {
  const RunConfig config = resolve_config(common);
  if (out_path) {
    std::ofstream out = open_output(*out_path);
    out << run_config_to_json(config) << '\n';
  } else {
    std::cout << run_config_to_json(config) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Step-attributed rubric reward toolkit"};
  app.require_subcommand(1);
  CommonArgs common;
  add_common_options(app, common);

  // score
  auto* score = app.add_subcommand("score", "turn rollouts + rubrics + verdicts into advantages");
  std::string score_rollouts, score_rubrics, score_out;
  std::optional<std::string> score_verdicts, score_mock, score_manifest;
  bool score_judge = false;
  score->add_option("--rollouts", score_rollouts, "rollout-batch JSONL")->required();
  score->add_option("--rubrics", score_rubrics, "rubric corpus JSONL")->required();
  score->add_option("--verdicts", score_verdicts, "verdict JSONL");
  score->add_flag("--judge", score_judge, "fetch verdicts live through the judge gateway");
  score->add_option("--mock-replies", score_mock, "scripted judge replies JSONL (with --judge)");
  score->add_option("--out", score_out, "advantages JSONL output")->required();
  score->add_option("--manifest", score_manifest, "per-group error manifest (JSON)");

  // judge
  auto* judge = app.add_subcommand("judge", "fetch and parse judge verdicts");
  std::string judge_rollouts, judge_rubrics, judge_out;
  std::optional<std::string> judge_audit, judge_mock;
  judge->add_option("--rollouts", judge_rollouts, "rollout-batch JSONL")->required();
  judge->add_option("--rubrics", judge_rubrics, "rubric corpus JSONL")->required();
  judge->add_option("--out", judge_out, "verdict JSONL output")->required();
  judge->add_option("--audit-log", judge_audit, "raw-reply audit JSONL");
  judge->add_option("--mock-replies", judge_mock, "scripted judge replies JSONL");

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "looping and process-outcome diagnostics");
  std::string diagnose_responses, diagnose_out;
  std::optional<std::string> diagnose_steps;
  diagnose->add_option("--responses", diagnose_responses, "rollout-batch JSONL")->required();
  diagnose->add_option("--step-verdicts", diagnose_steps, "per-step correctness JSONL");
  diagnose->add_option("--out", diagnose_out, "report JSON output")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "rubric corpus statistics");
  std::string stats_rubrics;
  std::optional<std::string> stats_out;
  stats->add_option("--rubrics", stats_rubrics, "rubric corpus JSONL")->required();
  stats->add_option("--out", stats_out, "JSON report output (stdout otherwise)");

  // sandbox
  auto* sandbox_cmd = app.add_subcommand("sandbox", "toy-policy training runs");
  std::string sandbox_mode = "srar_full";
  std::vector<std::uint64_t> sandbox_seeds;
  int sandbox_iterations = 600, sandbox_groups = 8, sandbox_group_size = 8;
  double sandbox_lr = 0.1;
  bool sandbox_empty_rubric = false;
  std::optional<std::string> sandbox_csv, sandbox_json;
  sandbox_cmd->add_option("--mode", sandbox_mode,
                          "srar_full | no_step_norm | merged_advantage | grpo_only");
  sandbox_cmd->add_option("--seeds", sandbox_seeds, "seeds to run");
  sandbox_cmd->add_option("--iterations", sandbox_iterations, "training iterations");
  sandbox_cmd->add_option("--groups", sandbox_groups, "groups per iteration");
  sandbox_cmd->add_option("--group-size", sandbox_group_size, "rollouts per group");
  sandbox_cmd->add_option("--learning-rate", sandbox_lr, "REINFORCE step size");
  sandbox_cmd->add_flag("--empty-rubric", sandbox_empty_rubric, "score with no rubric items");
  sandbox_cmd->add_option("--out-csv", sandbox_csv, "trace CSV output");
  sandbox_cmd->add_option("--out-json", sandbox_json, "summary JSON output");

  // config
  auto* config_cmd = app.add_subcommand("config", "print the resolved configuration");
  std::optional<std::string> config_out;
  config_cmd->add_option("--out", config_out, "write resolved config JSON to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    return app.exit(error) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (score->parsed()) {
      if (!score_verdicts && !score_judge) {
        std::cerr << "score needs either --verdicts or --judge\n";
        return kExitUsage;
      }
      return cmd_score(common, score_rollouts, score_rubrics, score_verdicts, score_judge,
                       score_mock, score_out, score_manifest);
    }
    if (judge->parsed())
      return cmd_judge(common, judge_rollouts, judge_rubrics, judge_out, judge_audit,
                       judge_mock);
    if (diagnose->parsed())
      return cmd_diagnose(common, diagnose_responses, diagnose_steps, diagnose_out);
    if (stats->parsed()) return cmd_stats(common, stats_rubrics, stats_out);
    if (sandbox_cmd->parsed())
      return cmd_sandbox(common, sandbox_mode, sandbox_seeds, sandbox_iterations,
                         sandbox_groups, sandbox_group_size, sandbox_lr,
                         sandbox_empty_rubric, sandbox_csv, sandbox_json);
    if (config_cmd->parsed()) return cmd_config(common, config_out);
  } catch (const DataError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitData;
  } catch (const ConfigError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitData;
  } catch (const RubricParseError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitData;
  } catch (const TransportError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitService;
  } catch (const std::invalid_argument& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitData;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace srr::cli
