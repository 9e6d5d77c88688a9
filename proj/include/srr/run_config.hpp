#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srr/diagnostics.hpp"
#include "srr/judge.hpp"
#include "srr/reward.hpp"

namespace srr {

struct LoopingOptions {
  LoopThresholds thresholds;
  std::vector<std::string> lexicon = default_self_correction_lexicon();
};

// Everything the CLI needs: reward parameters, judge endpoint settings and
// looping thresholds. Resolution order is default < config file < env var
// < CLI flag; flags are applied by the CLI layer on top of resolve_run_config.
struct RunConfig {
  RewardConfig reward;
  JudgeSettings judge;
  LoopingOptions looping;

  void validate() const;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using EnvLookup = std::function<const char*(const char*)>;

// Environment variables: SRR_BUDGET_SUGGEST, SRR_BUDGET_PITFALL,
// SRR_BUDGET_BONUS, SRR_FORMAT_WEIGHT, SRR_EPSILON, SRR_GROUP_SIZE_HINT,
// SRR_JUDGE_ENDPOINT, SRR_JUDGE_MODEL. The bearer token (SRR_JUDGE_TOKEN) is
// read only at transport construction and never lives in config files.
RunConfig resolve_run_config(const std::optional<std::string>& config_json_text,
                             const EnvLookup& env);

// Convenience wrapper reading the file (when given) and std::getenv.
RunConfig load_run_config(const std::optional<std::string>& config_path);

std::string run_config_to_json(const RunConfig& config);

}  // namespace srr
