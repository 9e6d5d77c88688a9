#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "srr/rollout.hpp"
#include "srr/rubric.hpp"

namespace srr {

// Looping detector criteria:
//   (i)   more than self_correction_count lexicon phrase occurrences,
//   (ii)  "### Step 1" printed more than once,
//   (iii) any other printed step number occurring at least twice,
//   (iv)  duplicated paragraph fraction strictly above
//         duplicate_paragraph_fraction.
struct LoopThresholds {
  int self_correction_count = 20;
  double duplicate_paragraph_fraction = 0.10;
};

enum class LoopCriterion {
  kSelfCorrection,
  kRestartedStepOne,
  kRepeatedHeadings,
  kDuplicateParagraphs,
};

std::string_view to_string(LoopCriterion criterion);

struct LoopReport {
  bool is_looping = false;
  std::vector<LoopCriterion> triggered;
  int self_correction_count = 0;
  double duplicate_paragraph_fraction = 0.0;
};

// The phrase list ships in config so reported numbers stay auditable.
const std::vector<std::string>& default_self_correction_lexicon();

// Each criterion is evaluated independently; any hit marks the response as
// looping. Phrase occurrences are counted as non-overlapping substrings,
// summed over the lexicon. Paragraphs are blank-line-separated blocks
// compared exactly after whitespace normalization; the duplicated fraction
// is (blocks - distinct blocks) / blocks.
LoopReport detect_looping(std::string_view response_text,
                          const std::vector<std::string>& lexicon,
                          const LoopThresholds& thresholds = {});

// Trajectory counts by (answer correct) x (all steps correct). total may
// exceed the four-way sum when some trajectories could not be judged.
struct ProcessOutcomeTally {
  std::int64_t answer_ok_steps_ok = 0;
  std::int64_t answer_ok_steps_bad = 0;
  std::int64_t answer_bad_steps_ok = 0;
  std::int64_t answer_bad_steps_bad = 0;
  std::int64_t total = 0;

  std::int64_t four_way_sum() const {
    return answer_ok_steps_ok + answer_ok_steps_bad + answer_bad_steps_ok +
           answer_bad_steps_bad;
  }
};

struct FrrMtr {
  double frr_percent = 0.0;  // faithful reasoning rate
  double mtr_percent = 0.0;  // misaligned trajectory rate
};

// FRR = 100 * (answer ok, steps ok) / total;
// MTR = 100 * (answer ok, steps bad + answer bad, steps ok) / total.
// Full precision; rounding belongs to the presentation layer.
// Throws std::invalid_argument when total < 1 or the four-way sum exceeds it.
FrrMtr frr_mtr(const ProcessOutcomeTally& tally);

// Step-level judgement counts split by final-answer correctness.
struct StepJudgementCounts {
  std::int64_t correct_steps_answer_ok = 0;
  std::int64_t wrong_steps_answer_ok = 0;
  std::int64_t correct_steps_answer_bad = 0;
  std::int64_t wrong_steps_answer_bad = 0;
};

struct IndiscriminateShares {
  // Share of steps judged wrong among all steps of answer-correct responses.
  double wrong_share_answer_ok_percent = 0.0;
  // Share of steps judged correct among all steps of answer-wrong responses.
  double correct_share_answer_bad_percent = 0.0;
};

// Throws std::invalid_argument when either per-answer-side total is zero.
IndiscriminateShares indiscriminate_stats(const StepJudgementCounts& counts);

// Cohen's kappa over paired binary labels: (p_o - p_e) / (1 - p_e) with
// marginal chance agreement. Throws std::invalid_argument on empty or
// mismatched input, or when p_e = 1 (kappa undefined).
double cohens_kappa(const std::vector<bool>& rater_a, const std::vector<bool>& rater_b);

// Point-biserial correlation between a binary variable and a continuous one
// (population variances). Throws std::invalid_argument when either variable
// has zero variance or sizes mismatch.
double point_biserial(const std::vector<bool>& binary, const std::vector<double>& values);

// Mean correctness as a percentage. Throws on empty input.
double avg_at_k(const std::vector<bool>& correct);

struct FormatComplianceRates {
  double headers = 0.0;
  double boxed = 0.0;
  double both = 0.0;
};

// Fractions of the batch with step headers, with a boxed answer, and with
// both (the format reward). Throws on an empty batch.
FormatComplianceRates format_compliance(const std::vector<Rollout>& batch);

struct CountStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double median = 0.0;
  int min = 0;
  int max = 0;
};

struct CorpusStats {
  std::size_t total_samples = 0;
  CountStats total;
  std::array<CountStats, 4> by_type;  // indexed by RubricType
  std::map<int, std::size_t> total_count_histogram;
  // (pitfall count, bonus count) -> samples
  std::map<std::pair<int, int>, std::size_t> pitfall_bonus_cooccurrence;
};

// Population statistics over per-sample item counts, by type and in total.
// Throws on an empty corpus.
CorpusStats corpus_stats(const std::vector<Rubric>& corpus);

enum class TrajectoryCategory {
  kAnswerOkStepsOk,
  kAnswerOkStepsBad,
  kAnswerBadStepsOk,
  kAnswerBadStepsBad,
};

std::string_view to_string(TrajectoryCategory category);

// Steps count as all-correct only when every verdict is true and the list is
// non-empty.
TrajectoryCategory categorize_trajectory(bool answer_correct,
                                         const std::vector<bool>& step_verdicts);

}  // namespace srr
