#pragma once

#include <map>
#include <vector>

#include "srr/rollout.hpp"
#include "srr/rubric.hpp"

namespace srr {

// Type budgets, base-reward mixing weight and normalization epsilon.
// Defaults: budgets 0.8 / -1.0 / 1.0, lambda 0.1, epsilon 1e-6, group size 8.
struct RewardConfig {
  double budget_suggest = 0.8;
  double budget_pitfall = -1.0;
  double budget_bonus = 1.0;
  double format_weight = 0.1;  // lambda in [0, 1]
  double epsilon = 1e-6;
  int group_size_hint = 8;

  // Throws std::invalid_argument on sign or range violations.
  void validate() const;
};

// Signed delta for one judged item: satisfied SUGGEST -> +R_SUG/N_SUG,
// satisfied PITFALL -> -|R_PIT|/N_PIT, satisfied BONUS -> +R_BON/N_BON,
// otherwise 0. ANSWER items never carry a delta (answer correctness is the
// base reward).
double compute_delta(const RubricItem& item, bool satisfied,
                     const TypeCounts& type_counts, const RewardConfig& config);

// One rollout's per-step raw rubric reward: deltas sharing a step sum. A
// step entry exists for every step the judge attributed any item to, even
// when the summed delta is zero — membership drives per-step normalization.
// Whole-solution verdicts (step 0) land under pseudo-step 0; step -1
// verdicts are dropped. Verdicts must already be validated.
std::map<int, double> aggregate_step_deltas(const Rubric& rubric,
                                            const std::vector<Verdict>& validated_verdicts,
                                            const RewardConfig& config);

// Raw per-step deltas for a whole group; rows[i] belongs to rollout i and an
// entry for step k marks membership of i in that step's normalization set.
struct StepDeltaTable {
  std::vector<std::map<int, double>> rows;

  // Sorted union of step keys present in any row.
  std::vector<int> steps() const;
  // Rollout indices holding an entry for step k, in index order.
  std::vector<int> membership(int step) const;
};

// (values - mean) / (population stddev + epsilon). One or zero values, or
// zero spread, yield all zeros: a step seen in a single rollout carries no
// relative signal.
std::vector<double> normalize_step(const std::vector<double>& values, double epsilon);

struct BaseAdvantages {
  std::vector<double> values;
  bool degenerate = false;  // all base rewards equal
};

// Group-normalized outcome advantage with population stddev. All-equal
// rewards normalize to zeros and set the degenerate flag; whether to drop
// such groups is the caller's policy.
BaseAdvantages base_advantage(const std::vector<double>& base_rewards, double epsilon);

// (1 - lambda) * accuracy + lambda * format.
double base_reward(int accuracy_reward, int format_reward, double format_weight);

// Per-rollout result: the scalar outcome advantage, the normalized per-step
// rubric offsets kept for audit (key 0 = whole-solution bucket), and the
// final per-token advantage vector.
struct RolloutAdvantages {
  double base_advantage = 0.0;
  std::map<int, double> step_offsets;
  std::vector<double> token_advantages;
};

struct GroupAdvantages {
  std::vector<RolloutAdvantages> rollouts;
  StepDeltaTable raw_deltas;
  bool degenerate_group = false;
};

// Full decoupled-advantage pipeline for one group: deltas, per-step
// cross-rollout normalization, token broadcast, and the sum of the two
// separately normalized parts. Token t of step k receives
// base + offset[k] (+ offset[0] when a whole-solution bucket exists);
// tokens outside every step receive the base advantage alone.
// Throws std::invalid_argument on an empty group or when
// validated_verdicts.size() != rollout count.
GroupAdvantages compute_group_advantages(const GroupRollouts& group,
                                         const Rubric& rubric,
                                         const std::vector<std::vector<Verdict>>& validated_verdicts,
                                         const RewardConfig& config);

}  // namespace srr
