#include "srr/sandbox.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace srr::sandbox {

namespace {

constexpr const char* kWords[kVocabSize] = {
    "step",  "calc",    "expand", "combine", "verify",  "simplify",
    "note",  "recheck", "guess",  "pause",   "boxgood", "boxbad",
};

double checked_finite(double value, const char* what) {
  if (!std::isfinite(value))
    throw std::runtime_error(std::string("non-finite value in ") + what);
  return value;
}

}  // namespace

std::string_view symbol_word(int symbol) { return kWords[symbol]; }

std::vector<double> ToyPolicy::action_probabilities(int position) const {
  const double* l = row(position);
  double max_logit = l[0];
  for (int v = 1; v < kVocabSize; ++v) max_logit = std::max(max_logit, l[v]);
  std::vector<double> probs(kVocabSize);
  double sum = 0.0;
  for (int v = 0; v < kVocabSize; ++v) {
    probs[v] = std::exp(l[v] - max_logit);
    sum += probs[v];
  }
  for (int v = 0; v < kVocabSize; ++v) probs[v] /= sum;
  return probs;
}

ToyPolicy make_uniform_policy(int max_length) {
  ToyPolicy policy;
  policy.max_length = max_length;
  policy.logits.assign(static_cast<std::size_t>(max_length) * kVocabSize, 0.0);
  return policy;
}

double SampleRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int SampleRng::sample(const std::vector<double>& probabilities) {
  const double u = uniform();
  double cumulative = 0.0;
  for (std::size_t v = 0; v < probabilities.size(); ++v) {
    cumulative += probabilities[v];
    if (u < cumulative) return static_cast<int>(v);
  }
  return static_cast<int>(probabilities.size()) - 1;
}

SampleBatch generate_rollouts(const ToyPolicy& policy, const std::string& prompt_id,
                              int n, std::uint64_t seed) {
  SampleRng rng(seed);
  return generate_rollouts(policy, prompt_id, n, rng);
}

SampleBatch generate_rollouts(const ToyPolicy& policy, const std::string& prompt_id,
                              int n, SampleRng& rng) {
  if (n < 1) throw std::invalid_argument("group size must be at least 1");
  SampleBatch batch;
  batch.undersized = n < 2;
  batch.group.prompt_id = prompt_id;
  batch.group.gold_answer = kGoldAnswer;

  for (int i = 0; i < n; ++i) {
    std::string text;
    EpisodeLayout layout;
    int steps = 0;
    int tokens = 0;

    for (int position = 0; position < policy.max_length; ++position) {
      const int action = rng.sample(policy.action_probabilities(position));
      layout.actions.push_back(action);
      layout.first_token_index.push_back(tokens);
      if (action == kStep) {
        if (!text.empty()) text.push_back('\n');
        text += "### Step " + std::to_string(++steps) + ":";
        tokens += 3;
      } else if (action == kBoxGood || action == kBoxBad) {
        if (!text.empty()) text.push_back(' ');
        text += action == kBoxGood ? "\\boxed{42}" : "\\boxed{17}";
        tokens += 1;
      } else {
        if (!text.empty()) text.push_back(' ');
        text += kWords[action];
        tokens += 1;
      }
    }

    Rollout rollout = make_rollout(std::move(text), batch.group.gold_answer);
    assert(static_cast<int>(rollout.token_offsets.size()) == tokens);

    // Which step span each action's text landed in.
    layout.action_step.assign(layout.actions.size(), 0);
    for (std::size_t j = 0; j < layout.actions.size(); ++j) {
      const int first = layout.first_token_index[j];
      if (first < 0) continue;
      for (std::size_t k = 0; k < rollout.step_spans.size(); ++k) {
        if (static_cast<std::size_t>(first) >= rollout.step_spans[k].token_begin &&
            static_cast<std::size_t>(first) < rollout.step_spans[k].token_end) {
          layout.action_step[j] = static_cast<int>(k) + 1;
          break;
        }
      }
    }

    batch.group.rollouts.push_back(std::move(rollout));
    batch.layouts.push_back(std::move(layout));
  }
  return batch;
}

RuleRubric default_rule_rubric() {
  RuleRubric rule;
  rule.rubric.problem_id = "toy";
  auto add = [&](RubricType type, std::string text, RulePredicate predicate) {
    RubricItem item;
    item.item_id = static_cast<int>(rule.rubric.items.size()) + 1;
    item.type = type;
    item.criterion_text = std::move(text);
    rule.rubric.items.push_back(std::move(item));
    rule.predicates.push_back(std::move(predicate));
  };
  using Kind = RulePredicate::Kind;
  add(RubricType::kSuggest, "Performs the calc operation in some step.",
      {Kind::kContainsWord, "calc", 0});
  add(RubricType::kSuggest, "Performs the expand operation in some step.",
      {Kind::kContainsWord, "expand", 0});
  add(RubricType::kSuggest, "Performs the combine operation in some step.",
      {Kind::kContainsWord, "combine", 0});
  add(RubricType::kSuggest, "Organizes the solution into at least three steps.",
      {Kind::kMinSteps, "", 3});
  add(RubricType::kPitfall, "Falls back to an unjustified guess.",
      {Kind::kContainsWord, "guess", 0});
  add(RubricType::kBonus, "Cross-checks the result with a verify pass.",
      {Kind::kContainsWord, "verify", 0});
  add(RubricType::kAnswer, "Final boxed answer equals 42.",
      {Kind::kAnswerEquals, "", 0});
  return rule;
}

RuleRubric empty_rule_rubric() {
  RuleRubric rule;
  rule.rubric.problem_id = "toy";
  return rule;
}

std::vector<Verdict> rule_judge(const Rollout& rollout, const RuleRubric& rubric,
                                const std::string& gold_answer) {
  std::vector<Verdict> verdicts;
  verdicts.reserve(rubric.rubric.items.size());

  const std::vector<TokenSpan> tokens = whitespace_token_offsets(rollout.response_text);
  auto token_step = [&](std::size_t token_index) -> int {
    for (std::size_t k = 0; k < rollout.step_spans.size(); ++k)
      if (token_index >= rollout.step_spans[k].token_begin &&
          token_index < rollout.step_spans[k].token_end)
        return static_cast<int>(k) + 1;
    return 0;
  };

  for (std::size_t j = 0; j < rubric.rubric.items.size(); ++j) {
    const RubricItem& item = rubric.rubric.items[j];
    const RulePredicate& predicate = rubric.predicates[j];
    Verdict verdict;
    verdict.item_id = item.item_id;

    switch (predicate.kind) {
      case RulePredicate::Kind::kContainsWord: {
        verdict.satisfied = false;
        verdict.step = -1;
        for (std::size_t t = 0; t < tokens.size(); ++t) {
          const std::string_view token(rollout.response_text.data() + tokens[t].begin,
                                       tokens[t].end - tokens[t].begin);
          if (token == predicate.word) {
            verdict.satisfied = true;
            verdict.step = token_step(t);
            break;
          }
        }
        break;
      }
      case RulePredicate::Kind::kMinSteps:
        verdict.satisfied =
            static_cast<int>(rollout.step_spans.size()) >= predicate.min_steps;
        verdict.step = 0;
        break;
      case RulePredicate::Kind::kAnswerEquals:
        verdict.satisfied =
            compute_accuracy_reward(rollout.extracted_answer, gold_answer) == 1;
        verdict.step = 0;
        break;
    }
    verdicts.push_back(verdict);
  }
  return verdicts;
}

std::string_view to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::kSrarFull: return "srar_full";
    case AblationMode::kNoStepNorm: return "no_step_norm";
    case AblationMode::kMergedAdvantage: return "merged_advantage";
    case AblationMode::kGrpoOnly: return "grpo_only";
  }
  return "unknown";
}

AblationMode ablation_mode_from_string(std::string_view name) {
  if (name == "srar_full") return AblationMode::kSrarFull;
  if (name == "no_step_norm") return AblationMode::kNoStepNorm;
  if (name == "merged_advantage") return AblationMode::kMergedAdvantage;
  if (name == "grpo_only") return AblationMode::kGrpoOnly;
  throw std::invalid_argument("unknown ablation mode: " + std::string(name));
}

GroupAdvantages build_mode_advantages(AblationMode mode, const GroupRollouts& group,
                                      const RuleRubric& rubric,
                                      const std::vector<std::vector<Verdict>>& verdicts,
                                      const RewardConfig& config) {
  const std::size_t n = group.rollouts.size();
  if (n == 0) throw std::invalid_argument("cannot score an empty group");

  if (mode == AblationMode::kSrarFull)
    return compute_group_advantages(group, rubric.rubric, verdicts, config);

  std::vector<double> rewards(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    rewards[i] = base_reward(group.rollouts[i].accuracy_reward,
                             group.rollouts[i].format_reward, config.format_weight);

  GroupAdvantages result;
  result.rollouts.resize(n);
  result.raw_deltas.rows.resize(n);

  if (mode == AblationMode::kGrpoOnly) {
    const BaseAdvantages base = base_advantage(rewards, config.epsilon);
    result.degenerate_group = base.degenerate;
    for (std::size_t i = 0; i < n; ++i) {
      result.rollouts[i].base_advantage = base.values[i];
      result.rollouts[i].token_advantages.assign(
          group.rollouts[i].token_offsets.size(), base.values[i]);
    }
    return result;
  }

  if (verdicts.size() != n)
    throw std::invalid_argument("verdict list count does not match rollout count");
  for (std::size_t i = 0; i < n; ++i)
    result.raw_deltas.rows[i] = aggregate_step_deltas(rubric.rubric, verdicts[i], config);

  if (mode == AblationMode::kNoStepNorm) {
    // Raw per-step deltas stand in for the normalized offsets.
    const BaseAdvantages base = base_advantage(rewards, config.epsilon);
    result.degenerate_group = base.degenerate;
    for (std::size_t i = 0; i < n; ++i) {
      RolloutAdvantages& adv = result.rollouts[i];
      adv.base_advantage = base.values[i];
      adv.step_offsets = result.raw_deltas.rows[i];
      const Rollout& rollout = group.rollouts[i];
      adv.token_advantages.assign(rollout.token_offsets.size(), adv.base_advantage);
      for (std::size_t k = 0; k < rollout.step_spans.size(); ++k) {
        auto offset = adv.step_offsets.find(static_cast<int>(k) + 1);
        if (offset == adv.step_offsets.end()) continue;
        for (std::size_t t = rollout.step_spans[k].token_begin;
             t < rollout.step_spans[k].token_end; ++t)
          adv.token_advantages[t] += offset->second;
      }
      auto whole = adv.step_offsets.find(0);
      if (whole != adv.step_offsets.end())
        for (const StepSpan& span : rollout.step_spans)
          for (std::size_t t = span.token_begin; t < span.token_end; ++t)
            adv.token_advantages[t] += whole->second;
    }
    return result;
  }

  // merged_advantage: one jointly normalized base+rubric scalar per rollout,
  // allocated to the tokens of steps holding rubric attributions. A rollout
  // with no scored step falls back to a whole-response broadcast so its
  // outcome signal is not lost.
  std::vector<double> merged(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    merged[i] = rewards[i];
    for (const auto& [step, delta] : result.raw_deltas.rows[i]) merged[i] += delta;
  }
  const BaseAdvantages joint = base_advantage(merged, config.epsilon);
  result.degenerate_group = joint.degenerate;
  for (std::size_t i = 0; i < n; ++i) {
    RolloutAdvantages& adv = result.rollouts[i];
    adv.base_advantage = joint.values[i];
    const Rollout& rollout = group.rollouts[i];
    const auto& row = result.raw_deltas.rows[i];
    const bool whole_solution_scored = row.count(0) > 0;
    bool any_scored_span = false;
    for (std::size_t k = 0; k < rollout.step_spans.size(); ++k)
      if (whole_solution_scored || row.count(static_cast<int>(k) + 1) > 0)
        any_scored_span = true;
    if (!any_scored_span) {
      adv.token_advantages.assign(rollout.token_offsets.size(), joint.values[i]);
      continue;
    }
    adv.token_advantages.assign(rollout.token_offsets.size(), 0.0);
    for (std::size_t k = 0; k < rollout.step_spans.size(); ++k) {
      if (!whole_solution_scored && row.count(static_cast<int>(k) + 1) == 0) continue;
      for (std::size_t t = rollout.step_spans[k].token_begin;
           t < rollout.step_spans[k].token_end; ++t)
        adv.token_advantages[t] = joint.values[i];
    }
  }
  return result;
}

namespace {

// Token-level advantage seen by action j of episode i; actions that emitted
// no text fall back to `fallback`.
double action_advantage(const EpisodeLayout& layout, const std::vector<double>& tokens,
                        std::size_t j, double fallback) {
  const int first = layout.first_token_index[j];
  if (first < 0) return fallback;
  return tokens[static_cast<std::size_t>(first)];
}

}  // namespace

GradientReport analytic_policy_gradient(const ToyPolicy& policy, const SampleBatch& batch,
                                        const GroupAdvantages& advantages) {
  const std::size_t size = policy.parameter_count();
  GradientReport report;
  report.g_total.assign(size, 0.0);
  report.g_outcome.assign(size, 0.0);
  report.g_rubric.assign(size, 0.0);

  const double n = static_cast<double>(batch.group.rollouts.size());
  for (std::size_t i = 0; i < batch.group.rollouts.size(); ++i) {
    const EpisodeLayout& layout = batch.layouts[i];
    const RolloutAdvantages& adv = advantages.rollouts[i];
    for (std::size_t j = 0; j < layout.actions.size(); ++j) {
      const int action = layout.actions[j];
      const double total =
          action_advantage(layout, adv.token_advantages, j, adv.base_advantage);
      // The rubric part, rebuilt from the per-step offsets rather than by
      // subtracting the outcome part.
      double rubric = 0.0;
      const int step = layout.action_step[j];
      if (step > 0) {
        auto own = adv.step_offsets.find(step);
        if (own != adv.step_offsets.end()) rubric += own->second;
        auto whole = adv.step_offsets.find(0);
        if (whole != adv.step_offsets.end()) rubric += whole->second;
      }
      const std::vector<double> probs =
          policy.action_probabilities(static_cast<int>(j));
      double* g_total = report.g_total.data() + j * kVocabSize;
      double* g_outcome = report.g_outcome.data() + j * kVocabSize;
      double* g_rubric = report.g_rubric.data() + j * kVocabSize;
      for (int v = 0; v < kVocabSize; ++v) {
        const double score = (v == action ? 1.0 : 0.0) - probs[v];
        g_total[v] += total * score / n;
        g_outcome[v] += adv.base_advantage * score / n;
        g_rubric[v] += rubric * score / n;
      }
    }
  }

  for (std::size_t c = 0; c < size; ++c)
    report.max_abs_residual =
        std::max(report.max_abs_residual,
                 std::fabs(report.g_total[c] - report.g_outcome[c] - report.g_rubric[c]));
  return report;
}

std::vector<double> reinforce_gradient(const ToyPolicy& policy, const SampleBatch& batch,
                                       const std::vector<std::vector<double>>& token_advantages) {
  std::vector<double> gradient(policy.parameter_count(), 0.0);
  const double n = static_cast<double>(batch.group.rollouts.size());
  for (std::size_t i = 0; i < batch.group.rollouts.size(); ++i) {
    const EpisodeLayout& layout = batch.layouts[i];
    for (std::size_t j = 0; j < layout.actions.size(); ++j) {
      const double advantage = action_advantage(layout, token_advantages[i], j, 0.0);
      if (advantage == 0.0) continue;
      const int action = layout.actions[j];
      const std::vector<double> probs =
          policy.action_probabilities(static_cast<int>(j));
      double* g = gradient.data() + j * kVocabSize;
      for (int v = 0; v < kVocabSize; ++v)
        g[v] += advantage * ((v == action ? 1.0 : 0.0) - probs[v]) / n;
    }
  }
  return gradient;
}

double surrogate_objective(const ToyPolicy& policy, const SampleBatch& batch,
                           const GroupAdvantages& advantages) {
  double objective = 0.0;
  const double n = static_cast<double>(batch.group.rollouts.size());
  for (std::size_t i = 0; i < batch.group.rollouts.size(); ++i) {
    const EpisodeLayout& layout = batch.layouts[i];
    const RolloutAdvantages& adv = advantages.rollouts[i];
    for (std::size_t j = 0; j < layout.actions.size(); ++j) {
      const double advantage =
          action_advantage(layout, adv.token_advantages, j, adv.base_advantage);
      const std::vector<double> probs =
          policy.action_probabilities(static_cast<int>(j));
      objective += advantage * std::log(probs[static_cast<std::size_t>(layout.actions[j])]) / n;
    }
  }
  return objective;
}

UnbiasednessResult unbiasedness_trial(const ToyPolicy& policy, const TrialRewardSpec& spec,
                                      int trials, int group_size, BaselineKind baseline,
                                      std::uint64_t seed) {
  const std::size_t size = policy.parameter_count();
  std::vector<double> sum_without(size, 0.0);
  std::vector<double> diff_sum(size, 0.0);
  std::vector<double> diff_sumsq(size, 0.0);
  std::vector<double> trial_diff(size, 0.0);

  // The policy is fixed for the whole trial; cache the per-position scores.
  std::vector<std::vector<double>> probs(static_cast<std::size_t>(policy.max_length));
  for (int t = 0; t < policy.max_length; ++t)
    probs[static_cast<std::size_t>(t)] = policy.action_probabilities(t);

  const RuleRubric rubric = default_rule_rubric();
  SampleRng rng(seed);
  const double n = static_cast<double>(group_size);

  for (int trial = 0; trial < trials; ++trial) {
    SampleBatch batch = generate_rollouts(policy, "trial", group_size, rng);

    std::vector<double> base_rewards(batch.group.rollouts.size(), 0.0);
    GroupAdvantages offsets;
    offsets.rollouts.resize(batch.group.rollouts.size());
    if (!spec.zero_rewards) {
      std::vector<std::vector<Verdict>> verdicts;
      verdicts.reserve(batch.group.rollouts.size());
      for (const Rollout& rollout : batch.group.rollouts)
        verdicts.push_back(rule_judge(rollout, rubric, batch.group.gold_answer));
      // The per-step normalized rubric reward is part of the reward
      // definition here and is shared by both estimators.
      offsets = compute_group_advantages(batch.group, rubric.rubric, verdicts, spec.config);
      for (std::size_t i = 0; i < batch.group.rollouts.size(); ++i)
        base_rewards[i] = base_reward(batch.group.rollouts[i].accuracy_reward,
                                      batch.group.rollouts[i].format_reward,
                                      spec.config.format_weight);
    }

    double reward_sum = 0.0;
    for (double r : base_rewards) reward_sum += r;

    std::fill(trial_diff.begin(), trial_diff.end(), 0.0);
    for (std::size_t i = 0; i < batch.group.rollouts.size(); ++i) {
      const EpisodeLayout& layout = batch.layouts[i];
      double b = 0.0;
      if (!spec.zero_rewards) {
        b = baseline == BaselineKind::kLeaveOneOut
                ? (group_size > 1 ? (reward_sum - base_rewards[i]) / (n - 1.0) : 0.0)
                : reward_sum / n;
      }
      for (std::size_t j = 0; j < layout.actions.size(); ++j) {
        double reward = 0.0;
        if (!spec.zero_rewards) {
          reward = base_rewards[i];
          const int step = layout.action_step[j];
          if (step > 0) {
            const auto& step_offsets = offsets.rollouts[i].step_offsets;
            auto own = step_offsets.find(step);
            if (own != step_offsets.end()) reward += own->second;
            auto whole = step_offsets.find(0);
            if (whole != step_offsets.end()) reward += whole->second;
          }
        }
        const int action = layout.actions[j];
        const std::vector<double>& p = probs[j];
        double* without = sum_without.data() + j * kVocabSize;
        double* diff = trial_diff.data() + j * kVocabSize;
        for (int v = 0; v < kVocabSize; ++v) {
          const double score = (v == action ? 1.0 : 0.0) - p[v];
          without[v] += reward * score / n;
          diff[v] += -b * score / n;
        }
      }
    }
    for (std::size_t c = 0; c < size; ++c) {
      diff_sum[c] += trial_diff[c];
      diff_sumsq[c] += trial_diff[c] * trial_diff[c];
    }
  }

  UnbiasednessResult result;
  result.mean_without_baseline.assign(size, 0.0);
  result.mean_with_baseline.assign(size, 0.0);
  result.z_scores.assign(size, 0.0);
  const double t = static_cast<double>(trials);
  for (std::size_t c = 0; c < size; ++c) {
    result.mean_without_baseline[c] = sum_without[c] / t;
    const double mean_diff = diff_sum[c] / t;
    result.mean_with_baseline[c] = result.mean_without_baseline[c] + mean_diff;
    double z = 0.0;
    if (trials > 1) {
      const double variance =
          std::max(0.0, (diff_sumsq[c] - t * mean_diff * mean_diff) / (t - 1.0));
      const double se = std::sqrt(variance / t);
      if (se > 0.0) z = mean_diff / se;
    }
    result.z_scores[c] = z;
    result.max_abs_z = std::max(result.max_abs_z, std::fabs(z));
    result.max_abs_mean_difference =
        std::max(result.max_abs_mean_difference, std::fabs(mean_diff));
  }
  return result;
}

namespace {

double naive_two_pass_std(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double variance = 0.0;
  for (double v : values) variance += (v - mean) * (v - mean);
  return std::sqrt(variance / static_cast<double>(values.size()));
}

// Inline checks of the estimator's structural properties, run every
// iteration at toy scale.
void check_invariants(AblationMode mode, const GroupAdvantages& advantages,
                      const RewardConfig& config, double& zero_sum_residual) {
  double base_sum = 0.0;
  for (const RolloutAdvantages& adv : advantages.rollouts)
    base_sum += adv.base_advantage;
  zero_sum_residual = std::max(zero_sum_residual, std::fabs(base_sum));
  if (std::fabs(base_sum) > 1e-9)
    throw std::runtime_error("outcome advantages do not sum to zero");

  if (mode == AblationMode::kSrarFull) {
    for (int step : advantages.raw_deltas.steps()) {
      const std::vector<int> members = advantages.raw_deltas.membership(step);
      double offset_sum = 0.0;
      std::vector<double> raw;
      std::vector<double> normalized;
      for (int i : members) {
        const auto& offsets = advantages.rollouts[static_cast<std::size_t>(i)].step_offsets;
        offset_sum += offsets.at(step);
        normalized.push_back(offsets.at(step));
        raw.push_back(advantages.raw_deltas.rows[static_cast<std::size_t>(i)].at(step));
      }
      zero_sum_residual = std::max(zero_sum_residual, std::fabs(offset_sum));
      if (std::fabs(offset_sum) > 1e-9)
        throw std::runtime_error("step offsets do not sum to zero");

      if (members.size() >= 2) {
        const double sigma = naive_two_pass_std(raw);
        if (sigma > 0.0) {
          double second_moment = 0.0;
          for (double v : normalized) second_moment += v * v;
          second_moment /= static_cast<double>(normalized.size());
          const double expected =
              sigma * sigma / ((sigma + config.epsilon) * (sigma + config.epsilon));
          if (std::fabs(second_moment - expected) > 1e-9)
            throw std::runtime_error("step second moment deviates from sigma^2/(sigma+eps)^2");
        }
      }
    }
  }

  if (mode != AblationMode::kGrpoOnly) {
    const double lower = config.budget_pitfall;
    const double upper = config.budget_suggest + config.budget_bonus;
    for (const auto& row : advantages.raw_deltas.rows) {
      double total = 0.0;
      for (const auto& [step, delta] : row) total += delta;
      if (total < lower - 1e-9 || total > upper + 1e-9)
        throw std::runtime_error("raw rubric reward escapes the budget bound");
    }
  }
}

}  // namespace

TrainResult train(ToyPolicy policy, const TrainConfig& config) {
  config.reward.validate();
  if (config.iterations < 1 || config.groups_per_iteration < 1 || config.group_size < 1)
    throw std::invalid_argument("train requires positive iteration, group and size counts");

  const RuleRubric rubric =
      config.empty_rubric ? empty_rule_rubric() : default_rule_rubric();
  SampleRng rng(config.seed);

  TrainResult result;
  result.trace.reserve(static_cast<std::size_t>(config.iterations));
  result.parameter_history.reserve(static_cast<std::size_t>(config.iterations));

  for (int iteration = 1; iteration <= config.iterations; ++iteration) {
    std::vector<double> gradient(policy.parameter_count(), 0.0);
    TraceRow row;
    row.iteration = iteration;
    int episodes = 0;

    for (int g = 0; g < config.groups_per_iteration; ++g) {
      const SampleBatch batch =
          generate_rollouts(policy, "toy", config.group_size, rng);

      std::vector<std::vector<Verdict>> verdicts(batch.group.rollouts.size());
      const bool use_rubric =
          config.mode != AblationMode::kGrpoOnly && !rubric.rubric.empty();
      if (use_rubric)
        for (std::size_t i = 0; i < batch.group.rollouts.size(); ++i)
          verdicts[i] = rule_judge(batch.group.rollouts[i], rubric,
                                   batch.group.gold_answer);

      const GroupAdvantages advantages = build_mode_advantages(
          config.mode, batch.group, rubric, verdicts, config.reward);
      check_invariants(config.mode, advantages, config.reward, row.zero_sum_residual);

      std::vector<double> group_gradient;
      if (config.mode == AblationMode::kMergedAdvantage) {
        std::vector<std::vector<double>> token_advantages;
        token_advantages.reserve(advantages.rollouts.size());
        for (const RolloutAdvantages& adv : advantages.rollouts)
          token_advantages.push_back(adv.token_advantages);
        group_gradient = reinforce_gradient(policy, batch, token_advantages);
      } else {
        GradientReport report = analytic_policy_gradient(policy, batch, advantages);
        if (report.max_abs_residual > 1e-12)
          throw std::runtime_error("gradient decomposition residual exceeds 1e-12");
        row.decomposition_residual =
            std::max(row.decomposition_residual, report.max_abs_residual);
        group_gradient = std::move(report.g_total);
      }

      for (std::size_t c = 0; c < gradient.size(); ++c)
        gradient[c] += group_gradient[c] / config.groups_per_iteration;

      for (std::size_t i = 0; i < batch.group.rollouts.size(); ++i) {
        row.mean_reward += base_reward(batch.group.rollouts[i].accuracy_reward,
                                       batch.group.rollouts[i].format_reward,
                                       config.reward.format_weight);
        row.mean_steps += static_cast<double>(batch.group.rollouts[i].step_spans.size());
        ++episodes;
      }
    }

    for (double g : gradient) checked_finite(g, "policy gradient");
    // With a single update per batch the importance ratio starts at 1, where
    // the clipped surrogate's gradient coincides with plain REINFORCE, so
    // both settings apply the same step.
    for (std::size_t c = 0; c < gradient.size(); ++c)
      policy.logits[c] += config.learning_rate * gradient[c];

    row.mean_reward /= episodes;
    row.mean_steps /= episodes;
    result.trace.push_back(row);
    result.parameter_history.push_back(policy.logits);
  }

  result.final_policy = std::move(policy);
  return result;
}

}  // namespace srr::sandbox
