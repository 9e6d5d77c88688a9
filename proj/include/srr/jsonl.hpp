#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "srr/reward.hpp"
#include "srr/rollout.hpp"
#include "srr/rubric.hpp"

namespace srr {

inline constexpr int kSchemaVersion = 1;

// Malformed input with its file and 1-based line number.
struct DataError : std::runtime_error {
  DataError(const std::string& file, int line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
        file(file),
        line(line) {}
  std::string file;
  int line = 0;
};

// One line of the rollout-batch file. token_offsets absent means the
// whitespace tokenizer applies; problem optionally carries the statement for
// judge prompts.
struct RolloutRecord {
  std::string prompt_id;
  int rollout_index = 0;
  std::string text;
  std::string gold_answer;
  std::optional<std::vector<TokenSpan>> token_offsets;
  std::optional<std::string> problem;
};

// One line of the rubric corpus: rubric_text in the tagged one-item-per-line
// format.
struct RubricRecord {
  std::string problem_id;
  std::string gold_answer;
  std::string rubric_text;
  std::optional<std::string> problem;
};

struct VerdictRecord {
  std::string prompt_id;
  int rollout_index = 0;
  std::vector<Verdict> verdicts;
};

// Per-rollout correctness verdicts for each detected step, for FRR/MTR.
struct StepVerdictRecord {
  std::string prompt_id;
  int rollout_index = 0;
  std::vector<bool> steps;
};

std::vector<RolloutRecord> read_rollout_jsonl(std::istream& in, const std::string& filename);
std::vector<RubricRecord> read_rubric_jsonl(std::istream& in, const std::string& filename);
std::vector<VerdictRecord> read_verdict_jsonl(std::istream& in, const std::string& filename);
std::vector<StepVerdictRecord> read_step_verdict_jsonl(std::istream& in,
                                                       const std::string& filename);

std::string verdict_record_to_json(const VerdictRecord& record);

// Groups of parsed rollouts plus each member's original rollout_index, in
// group order.
struct GroupedRollouts {
  std::vector<GroupRollouts> groups;
  std::vector<std::vector<int>> rollout_indices;
};

// Groups records by prompt_id in first-appearance order and sorts each group
// by rollout_index (duplicate indices are a DataError). Rollouts are fully
// parsed; explicit token offsets are validated against the text.
GroupedRollouts group_rollout_records(const std::vector<RolloutRecord>& records,
                                      const std::string& filename);

// {prompt_id, rollout_index, base_advantage, step_offsets, token_advantages,
// degenerate, schema_version} with step offsets keyed by step number.
std::string advantage_record_to_json(const std::string& prompt_id, int rollout_index,
                                     const RolloutAdvantages& advantages,
                                     bool degenerate_group);

}  // namespace srr
