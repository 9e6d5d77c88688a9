#include "srr/reward.hpp"

#include <cassert>
#include <cmath>
#include <set>
#include <stdexcept>

namespace srr {

void RewardConfig::validate() const {
  if (!(budget_suggest > 0.0))
    throw std::invalid_argument("budget_suggest must be positive");
  if (!(budget_pitfall < 0.0))
    throw std::invalid_argument("budget_pitfall must be negative");
  if (!(budget_bonus > 0.0))
    throw std::invalid_argument("budget_bonus must be positive");
  if (!(format_weight >= 0.0 && format_weight <= 1.0))
    throw std::invalid_argument("format_weight must lie in [0, 1]");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("epsilon must be positive");
  if (group_size_hint < 1)
    throw std::invalid_argument("group_size_hint must be at least 1");
}

double compute_delta(const RubricItem& item, bool satisfied,
                     const TypeCounts& type_counts, const RewardConfig& config) {
  if (item.type == RubricType::kAnswer || !satisfied) return 0.0;
  const int n = type_counts.of(item.type);
  assert(n >= 1 && "type count for a present item cannot be zero");
  switch (item.type) {
    case RubricType::kSuggest: return config.budget_suggest / n;
    case RubricType::kPitfall: return -std::abs(config.budget_pitfall) / n;
    case RubricType::kBonus: return config.budget_bonus / n;
    case RubricType::kAnswer: break;
  }
  return 0.0;
}

std::map<int, double> aggregate_step_deltas(const Rubric& rubric,
                                            const std::vector<Verdict>& validated_verdicts,
                                            const RewardConfig& config) {
  const TypeCounts counts = rubric.type_counts();
  std::map<int, double> row;
  for (const Verdict& verdict : validated_verdicts) {
    if (verdict.step < 0) continue;  // no relevant step
    const RubricItem* item = rubric.find(verdict.item_id);
    assert(item != nullptr && "verdicts must be validated against the rubric");
    if (item == nullptr) continue;
    row[verdict.step] += compute_delta(*item, verdict.satisfied, counts, config);
  }
  return row;
}

std::vector<int> StepDeltaTable::steps() const {
  std::set<int> keys;
  for (const auto& row : rows)
    for (const auto& [step, delta] : row) keys.insert(step);
  return {keys.begin(), keys.end()};
}

std::vector<int> StepDeltaTable::membership(int step) const {
  std::vector<int> members;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].count(step) > 0) members.push_back(static_cast<int>(i));
  return members;
}

std::vector<double> normalize_step(const std::vector<double>& values, double epsilon) {
  const std::size_t m = values.size();
  if (m <= 1) return std::vector<double>(m, 0.0);

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);

  double variance = 0.0;
  for (double v : values) variance += (v - mean) * (v - mean);
  variance /= static_cast<double>(m);
  const double sigma = std::sqrt(variance);

  std::vector<double> normalized(m, 0.0);
  if (sigma == 0.0) return normalized;
  for (std::size_t i = 0; i < m; ++i)
    normalized[i] = (values[i] - mean) / (sigma + epsilon);
  return normalized;
}

BaseAdvantages base_advantage(const std::vector<double>& base_rewards, double epsilon) {
  if (base_rewards.empty())
    throw std::invalid_argument("base_advantage requires a non-empty group");
  const std::size_t n = base_rewards.size();

  double mean = 0.0;
  for (double r : base_rewards) mean += r;
  mean /= static_cast<double>(n);

  double variance = 0.0;
  for (double r : base_rewards) variance += (r - mean) * (r - mean);
  variance /= static_cast<double>(n);
  const double sigma = std::sqrt(variance);

  BaseAdvantages result;
  result.values.assign(n, 0.0);
  result.degenerate = sigma == 0.0;
  if (!result.degenerate)
    for (std::size_t i = 0; i < n; ++i)
      result.values[i] = (base_rewards[i] - mean) / (sigma + epsilon);
  return result;
}

double base_reward(int accuracy_reward, int format_reward, double format_weight) {
  return (1.0 - format_weight) * accuracy_reward + format_weight * format_reward;
}

GroupAdvantages compute_group_advantages(const GroupRollouts& group,
                                         const Rubric& rubric,
                                         const std::vector<std::vector<Verdict>>& validated_verdicts,
                                         const RewardConfig& config) {
  const std::size_t n = group.rollouts.size();
  if (n == 0) throw std::invalid_argument("cannot score an empty group");
  if (validated_verdicts.size() != n)
    throw std::invalid_argument("verdict list count does not match rollout count");

  std::vector<double> base_rewards(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    base_rewards[i] = base_reward(group.rollouts[i].accuracy_reward,
                                  group.rollouts[i].format_reward, config.format_weight);
  const BaseAdvantages base = base_advantage(base_rewards, config.epsilon);

  GroupAdvantages result;
  result.degenerate_group = base.degenerate;
  result.raw_deltas.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    result.raw_deltas.rows[i] =
        aggregate_step_deltas(rubric, validated_verdicts[i], config);

  result.rollouts.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    result.rollouts[i].base_advantage = base.values[i];

  for (int step : result.raw_deltas.steps()) {
    const std::vector<int> members = result.raw_deltas.membership(step);
    std::vector<double> deltas;
    deltas.reserve(members.size());
    for (int i : members) deltas.push_back(result.raw_deltas.rows[i].at(step));
    const std::vector<double> normalized = normalize_step(deltas, config.epsilon);
    for (std::size_t m = 0; m < members.size(); ++m)
      result.rollouts[members[m]].step_offsets[step] = normalized[m];
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Rollout& rollout = group.rollouts[i];
    RolloutAdvantages& adv = result.rollouts[i];
    adv.token_advantages.assign(rollout.token_offsets.size(), adv.base_advantage);

    for (std::size_t k = 0; k < rollout.step_spans.size(); ++k) {
      auto offset = adv.step_offsets.find(static_cast<int>(k) + 1);
      if (offset == adv.step_offsets.end()) continue;
      for (std::size_t t = rollout.step_spans[k].token_begin;
           t < rollout.step_spans[k].token_end; ++t)
        adv.token_advantages[t] += offset->second;
    }

    // The whole-solution bucket overlays every step token of the rollout.
    auto whole = adv.step_offsets.find(0);
    if (whole != adv.step_offsets.end()) {
      for (const StepSpan& span : rollout.step_spans)
        for (std::size_t t = span.token_begin; t < span.token_end; ++t)
          adv.token_advantages[t] += whole->second;
    }
  }
  return result;
}

}  // namespace srr
