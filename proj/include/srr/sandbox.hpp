#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "srr/reward.hpp"
#include "srr/rollout.hpp"
#include "srr/rubric.hpp"

namespace srr::sandbox {

// Generation task: a position-indexed softmax policy emits one word per
// position for exactly max_length positions. "step" opens a "### Step k:"
// header line, content words extend the current step, and the box words
// emit inline \boxed answers — the last one emitted is the extracted
// answer. An episode with no box word has no answer and forfeits the
// format reward.
enum Symbol : int {
  kStep = 0,
  kCalc,
  kExpand,
  kCombine,
  kVerify,
  kSimplify,
  kNote,
  kRecheck,
  kGuess,
  kPause,
  kBoxGood,
  kBoxBad,
};

inline constexpr int kVocabSize = 12;
inline constexpr const char* kGoldAnswer = "42";

std::string_view symbol_word(int symbol);

// Softmax policy over positions: logits is a max_length x kVocabSize matrix,
// action probabilities at position t are softmax(logits[t]).
struct ToyPolicy {
  int max_length = 16;
  std::vector<double> logits;

  double* row(int position) { return logits.data() + position * kVocabSize; }
  const double* row(int position) const { return logits.data() + position * kVocabSize; }
  std::vector<double> action_probabilities(int position) const;
  std::size_t parameter_count() const { return logits.size(); }
};

ToyPolicy make_uniform_policy(int max_length = 16);

// Deterministic sampler: uniform doubles from the top 53 bits of raw
// mt19937_64 output, actions by inverse CDF. The engine algorithm is pinned
// by the standard, so trajectories are exactly reproducible under a seed.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  int sample(const std::vector<double>& probabilities);

 private:
  std::mt19937_64 engine_;
};

// Maps sampled actions back onto the rendered rollout: the index of the
// first text token each action emitted and the 1-based step span each
// action's text belongs to (0 when outside every step).
struct EpisodeLayout {
  std::vector<int> actions;
  std::vector<int> first_token_index;
  std::vector<int> action_step;
};

struct SampleBatch {
  GroupRollouts group;
  std::vector<EpisodeLayout> layouts;
  bool undersized = false;  // n < 2 gives no relative signal
};

SampleBatch generate_rollouts(const ToyPolicy& policy, const std::string& prompt_id,
                              int n, std::uint64_t seed);
SampleBatch generate_rollouts(const ToyPolicy& policy, const std::string& prompt_id,
                              int n, SampleRng& rng);

// Synthetic rubric whose items are exact predicates over the rendered text.
struct RulePredicate {
  enum class Kind { kContainsWord, kMinSteps, kAnswerEquals };
  Kind kind = Kind::kContainsWord;
  std::string word;
  int min_steps = 0;
};

struct RuleRubric {
  Rubric rubric;
  std::vector<RulePredicate> predicates;  // parallel to rubric.items
};

// SUGGEST: the calc/expand/combine words and a three-step structure check;
// PITFALL: the guess word; BONUS: the verify word; ANSWER: boxed 42.
RuleRubric default_rule_rubric();
RuleRubric empty_rule_rubric();

// Deterministic judge: word predicates attribute to the step containing the
// word's first occurrence (0 in the preamble, -1 when absent); structure and
// answer predicates attribute to the whole solution.
std::vector<Verdict> rule_judge(const Rollout& rollout, const RuleRubric& rubric,
                                const std::string& gold_answer);

enum class AblationMode { kSrarFull, kNoStepNorm, kMergedAdvantage, kGrpoOnly };

std::string_view to_string(AblationMode mode);
AblationMode ablation_mode_from_string(std::string_view name);

// Advantage construction per ablation:
//   srar_full        decoupled outcome advantage + normalized step offsets
//   no_step_norm     decoupled, but raw per-step deltas skip normalization
//   merged_advantage one jointly normalized base+rubric scalar, allocated to
//                    the tokens of steps holding rubric attributions
//   grpo_only        outcome advantage broadcast everywhere, rubric ignored
GroupAdvantages build_mode_advantages(AblationMode mode, const GroupRollouts& group,
                                      const RuleRubric& rubric,
                                      const std::vector<std::vector<Verdict>>& verdicts,
                                      const RewardConfig& config);

// Exact score-function gradient of the surrogate objective
// (1/n) sum_i sum_t A_i(t) log pi(a_t | t), flattened like ToyPolicy::logits.
struct GradientReport {
  std::vector<double> g_total;
  std::vector<double> g_outcome;
  std::vector<double> g_rubric;
  double max_abs_residual = 0.0;  // max |g_total - g_outcome - g_rubric|
};

GradientReport analytic_policy_gradient(const ToyPolicy& policy, const SampleBatch& batch,
                                        const GroupAdvantages& advantages);

// One-pass gradient for advantage vectors without a decoupled split.
std::vector<double> reinforce_gradient(const ToyPolicy& policy, const SampleBatch& batch,
                                       const std::vector<std::vector<double>>& token_advantages);

// Surrogate objective value with frozen advantages, for finite differences.
double surrogate_objective(const ToyPolicy& policy, const SampleBatch& batch,
                           const GroupAdvantages& advantages);

enum class BaselineKind { kLeaveOneOut, kInclusive };

struct TrialRewardSpec {
  bool zero_rewards = false;
  RewardConfig config;
};

// Monte-Carlo comparison of the score-function estimator with and without a
// mean-reward baseline. Leave-one-out baselines are action-independent, so
// the two estimators agree in expectation; inclusive baselines carry the
// O(1/n) inclusion bias.
struct UnbiasednessResult {
  std::vector<double> mean_with_baseline;
  std::vector<double> mean_without_baseline;
  std::vector<double> z_scores;  // of the paired per-trial difference
  double max_abs_z = 0.0;
  double max_abs_mean_difference = 0.0;
};

UnbiasednessResult unbiasedness_trial(const ToyPolicy& policy, const TrialRewardSpec& spec,
                                      int trials, int group_size, BaselineKind baseline,
                                      std::uint64_t seed);

struct TrainConfig {
  AblationMode mode = AblationMode::kSrarFull;
  int iterations = 600;
  int groups_per_iteration = 8;
  int group_size = 8;
  double learning_rate = 0.1;
  bool clipped_ratio = false;
  double clip_epsilon = 0.2;
  bool empty_rubric = false;
  RewardConfig reward;
  std::uint64_t seed = 1;
};

struct TraceRow {
  int iteration = 0;
  double mean_reward = 0.0;  // mean base reward over the iteration's episodes
  double mean_steps = 0.0;
  double zero_sum_residual = 0.0;
  double decomposition_residual = 0.0;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  ToyPolicy final_policy;
  // Logits snapshot after every update, for exact trajectory comparison.
  std::vector<std::vector<double>> parameter_history;
};

// REINFORCE with the mode's advantage (optionally the single-epoch clipped
// surrogate). Verifies the zero-sum, bound, second-moment and decomposition
// properties inline every iteration; throws std::runtime_error on a
// non-finite gradient or a violated invariant.
TrainResult train(ToyPolicy policy, const TrainConfig& config);

}  // namespace srr::sandbox
