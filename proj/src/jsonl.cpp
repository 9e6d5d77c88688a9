#include "srr/jsonl.hpp"

#include <algorithm>
#include <istream>

#include <json.hpp>

namespace srr {

namespace {

using nlohmann::json;

json parse_line(const std::string& line, const std::string& filename, int line_number) {
  const json parsed = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object())
    throw DataError(filename, line_number, "not a JSON object");
  return parsed;
}

std::string require_string(const json& object, const char* key, const std::string& filename,
                           int line_number) {
  if (!object.contains(key) || !object[key].is_string())
    throw DataError(filename, line_number, std::string("missing string field '") + key + "'");
  return object[key].get<std::string>();
}

int require_int(const json& object, const char* key, const std::string& filename,
                int line_number) {
  if (!object.contains(key) || !object[key].is_number_integer())
    throw DataError(filename, line_number, std::string("missing integer field '") + key + "'");
  return object[key].get<int>();
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    // Skip blank lines so trailing newlines are harmless.
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line, line_number);
  }
}

}  // namespace

std::vector<RolloutRecord> read_rollout_jsonl(std::istream& in, const std::string& filename) {
  std::vector<RolloutRecord> records;
  for_each_line(in, [&](const std::string& line, int line_number) {
    const json object = parse_line(line, filename, line_number);
    RolloutRecord record;
    record.prompt_id = require_string(object, "prompt_id", filename, line_number);
    record.rollout_index = require_int(object, "rollout_index", filename, line_number);
    record.text = require_string(object, "text", filename, line_number);
    record.gold_answer = require_string(object, "gold_answer", filename, line_number);
    if (object.contains("token_offsets")) {
      if (!object["token_offsets"].is_array())
        throw DataError(filename, line_number, "token_offsets must be an array of pairs");
      std::vector<TokenSpan> offsets;
      for (const json& pair : object["token_offsets"]) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
            !pair[1].is_number_integer())
          throw DataError(filename, line_number, "token_offsets must be an array of pairs");
        offsets.push_back({pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
      }
      record.token_offsets = std::move(offsets);
    }
    if (object.contains("problem") && object["problem"].is_string())
      record.problem = object["problem"].get<std::string>();
    records.push_back(std::move(record));
  });
  return records;
}

std::vector<RubricRecord> read_rubric_jsonl(std::istream& in, const std::string& filename) {
  std::vector<RubricRecord> records;
  for_each_line(in, [&](const std::string& line, int line_number) {
    const json object = parse_line(line, filename, line_number);
    RubricRecord record;
    record.problem_id = require_string(object, "problem_id", filename, line_number);
    record.gold_answer = require_string(object, "gold_answer", filename, line_number);
    record.rubric_text = require_string(object, "rubric_text", filename, line_number);
    if (object.contains("problem") && object["problem"].is_string())
      record.problem = object["problem"].get<std::string>();
    records.push_back(std::move(record));
  });
  return records;
}

std::vector<VerdictRecord> read_verdict_jsonl(std::istream& in, const std::string& filename) {
  std::vector<VerdictRecord> records;
  for_each_line(in, [&](const std::string& line, int line_number) {
    const json object = parse_line(line, filename, line_number);
    VerdictRecord record;
    record.prompt_id = require_string(object, "prompt_id", filename, line_number);
    record.rollout_index = require_int(object, "rollout_index", filename, line_number);
    if (!object.contains("verdicts") || !object["verdicts"].is_array())
      throw DataError(filename, line_number, "missing array field 'verdicts'");
    for (const json& entry : object["verdicts"]) {
      if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_number_integer() ||
          !entry.contains("satisfied") || !entry["satisfied"].is_boolean() ||
          !entry.contains("step") || !entry["step"].is_number_integer())
        throw DataError(filename, line_number, "verdict entries need {id, satisfied, step}");
      record.verdicts.push_back({entry["id"].get<int>(), entry["satisfied"].get<bool>(),
                                 entry["step"].get<int>()});
    }
    records.push_back(std::move(record));
  });
  return records;
}

std::vector<StepVerdictRecord> read_step_verdict_jsonl(std::istream& in,
                                                       const std::string& filename) {
  std::vector<StepVerdictRecord> records;
  for_each_line(in, [&](const std::string& line, int line_number) {
    const json object = parse_line(line, filename, line_number);
    StepVerdictRecord record;
    record.prompt_id = require_string(object, "prompt_id", filename, line_number);
    record.rollout_index = require_int(object, "rollout_index", filename, line_number);
    if (!object.contains("steps") || !object["steps"].is_array())
      throw DataError(filename, line_number, "missing array field 'steps'");
    for (const json& entry : object["steps"]) {
      if (!entry.is_boolean())
        throw DataError(filename, line_number, "steps must be booleans");
      record.steps.push_back(entry.get<bool>());
    }
    records.push_back(std::move(record));
  });
  return records;
}

std::string verdict_record_to_json(const VerdictRecord& record) {
  json verdicts = json::array();
  for (const Verdict& verdict : record.verdicts)
    verdicts.push_back(
        {{"id", verdict.item_id}, {"satisfied", verdict.satisfied}, {"step", verdict.step}});
  const json object = {
      {"schema_version", kSchemaVersion},
      {"prompt_id", record.prompt_id},
      {"rollout_index", record.rollout_index},
      {"verdicts", std::move(verdicts)},
  };
  return object.dump();
}

GroupedRollouts group_rollout_records(const std::vector<RolloutRecord>& records,
                                      const std::string& filename) {
  GroupedRollouts result;
  std::map<std::string, std::size_t> index_of;
  std::vector<std::vector<std::pair<int, const RolloutRecord*>>> members;

  for (const RolloutRecord& record : records) {
    auto [it, inserted] = index_of.try_emplace(record.prompt_id, result.groups.size());
    if (inserted) {
      GroupRollouts group;
      group.prompt_id = record.prompt_id;
      group.gold_answer = record.gold_answer;
      result.groups.push_back(std::move(group));
      members.emplace_back();
    }
    if (record.problem && result.groups[it->second].problem_text.empty())
      result.groups[it->second].problem_text = *record.problem;
    members[it->second].emplace_back(record.rollout_index, &record);
  }

  result.rollout_indices.resize(result.groups.size());
  for (std::size_t g = 0; g < result.groups.size(); ++g) {
    std::sort(members[g].begin(), members[g].end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i + 1 < members[g].size(); ++i)
      if (members[g][i].first == members[g][i + 1].first)
        throw DataError(filename, 0,
                        "duplicate rollout_index " + std::to_string(members[g][i].first) +
                            " for prompt " + result.groups[g].prompt_id);
    for (const auto& [index, record] : members[g]) {
      result.rollout_indices[g].push_back(index);
      if (record->token_offsets)
        result.groups[g].rollouts.push_back(
            make_rollout(record->text, *record->token_offsets, record->gold_answer));
      else
        result.groups[g].rollouts.push_back(make_rollout(record->text, record->gold_answer));
    }
  }
  return result;
}

std::string advantage_record_to_json(const std::string& prompt_id, int rollout_index,
                                     const RolloutAdvantages& advantages,
                                     bool degenerate_group) {
  json offsets = json::object();
  for (const auto& [step, value] : advantages.step_offsets)
    offsets[std::to_string(step)] = value;
  const json object = {
      {"schema_version", kSchemaVersion},
      {"prompt_id", prompt_id},
      {"rollout_index", rollout_index},
      {"base_advantage", advantages.base_advantage},
      {"step_offsets", std::move(offsets)},
      {"token_advantages", advantages.token_advantages},
      {"degenerate", degenerate_group},
  };
  return object.dump();
}

}  // namespace srr
