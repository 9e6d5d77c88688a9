#include "srr/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace srr {

namespace {

using nlohmann::json;

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError(what + " is not a number: '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t consumed = 0;
    const int value = std::stoi(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError(what + " is not an integer: '" + text + "'");
  }
}

void apply_file(RunConfig& config, const json& file) {
  auto number = [&](const char* key, double& target) {
    if (file.contains(key)) {
      if (!file[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
      target = file[key].get<double>();
    }
  };
  auto integer = [&](const json& object, const char* key, int& target) {
    if (object.contains(key)) {
      if (!object[key].is_number_integer())
        throw ConfigError(std::string(key) + " must be an integer");
      target = object[key].get<int>();
    }
  };

  number("budget_suggest", config.reward.budget_suggest);
  number("budget_pitfall", config.reward.budget_pitfall);
  number("budget_bonus", config.reward.budget_bonus);
  number("format_weight", config.reward.format_weight);
  number("epsilon", config.reward.epsilon);
  integer(file, "group_size_hint", config.reward.group_size_hint);

  if (file.contains("judge")) {
    const json& judge = file["judge"];
    if (!judge.is_object()) throw ConfigError("judge must be an object");
    if (judge.contains("endpoint")) config.judge.endpoint = judge["endpoint"].get<std::string>();
    if (judge.contains("model")) config.judge.model = judge["model"].get<std::string>();
    if (judge.contains("temperature")) config.judge.temperature = judge["temperature"].get<double>();
    integer(judge, "max_tokens", config.judge.max_tokens);
    integer(judge, "max_attempts", config.judge.max_attempts);
    integer(judge, "concurrency", config.judge.concurrency);
  }

  if (file.contains("looping")) {
    const json& looping = file["looping"];
    if (!looping.is_object()) throw ConfigError("looping must be an object");
    integer(looping, "self_correction_threshold",
            config.looping.thresholds.self_correction_count);
    if (looping.contains("duplicate_paragraph_threshold"))
      config.looping.thresholds.duplicate_paragraph_fraction =
          looping["duplicate_paragraph_threshold"].get<double>();
    if (looping.contains("lexicon")) {
      if (!looping["lexicon"].is_array()) throw ConfigError("lexicon must be an array");
      config.looping.lexicon.clear();
      for (const json& phrase : looping["lexicon"])
        config.looping.lexicon.push_back(phrase.get<std::string>());
    }
  }
}

void apply_env(RunConfig& config, const EnvLookup& env) {
  auto number = [&](const char* name, double& target) {
    if (const char* value = env(name)) target = parse_double(value, name);
  };
  auto integer = [&](const char* name, int& target) {
    if (const char* value = env(name)) target = parse_int(value, name);
  };
  number("SRR_BUDGET_SUGGEST", config.reward.budget_suggest);
  number("SRR_BUDGET_PITFALL", config.reward.budget_pitfall);
  number("SRR_BUDGET_BONUS", config.reward.budget_bonus);
  number("SRR_FORMAT_WEIGHT", config.reward.format_weight);
  number("SRR_EPSILON", config.reward.epsilon);
  integer("SRR_GROUP_SIZE_HINT", config.reward.group_size_hint);
  if (const char* endpoint = env("SRR_JUDGE_ENDPOINT")) config.judge.endpoint = endpoint;
  if (const char* model = env("SRR_JUDGE_MODEL")) config.judge.model = model;
}

}  // namespace

void RunConfig::validate() const {
  reward.validate();
  if (judge.max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
  if (judge.concurrency < 1) throw std::invalid_argument("concurrency must be at least 1");
  if (judge.max_tokens < 1) throw std::invalid_argument("max_tokens must be at least 1");
  if (looping.thresholds.self_correction_count < 0)
    throw std::invalid_argument("self_correction_threshold must be non-negative");
  if (looping.thresholds.duplicate_paragraph_fraction < 0.0 ||
      looping.thresholds.duplicate_paragraph_fraction > 1.0)
    throw std::invalid_argument("duplicate_paragraph_threshold must lie in [0, 1]");
}

RunConfig resolve_run_config(const std::optional<std::string>& config_json_text,
                             const EnvLookup& env) {
  RunConfig config;
  if (config_json_text) {
    const json file = json::parse(*config_json_text, nullptr, /*allow_exceptions=*/false);
    if (file.is_discarded() || !file.is_object())
      throw ConfigError("config file is not a JSON object");
    apply_file(config, file);
  }
  apply_env(config, env);
  return config;
}

RunConfig load_run_config(const std::optional<std::string>& config_path) {
  std::optional<std::string> text;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("cannot open config file: " + *config_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  return resolve_run_config(text, [](const char* name) { return std::getenv(name); });
}

std::string run_config_to_json(const RunConfig& config) {
  const json object = {
      {"budget_suggest", config.reward.budget_suggest},
      {"budget_pitfall", config.reward.budget_pitfall},
      {"budget_bonus", config.reward.budget_bonus},
      {"format_weight", config.reward.format_weight},
      {"epsilon", config.reward.epsilon},
      {"group_size_hint", config.reward.group_size_hint},
      {"judge",
       {{"endpoint", config.judge.endpoint},
        {"model", config.judge.model},
        {"temperature", config.judge.temperature},
        {"max_tokens", config.judge.max_tokens},
        {"max_attempts", config.judge.max_attempts},
        {"concurrency", config.judge.concurrency}}},
      {"looping",
       {{"self_correction_threshold", config.looping.thresholds.self_correction_count},
        {"duplicate_paragraph_threshold",
         config.looping.thresholds.duplicate_paragraph_fraction},
        {"lexicon", config.looping.lexicon}}},
  };
  return object.dump(2);
}

}  // namespace srr
