#include "srr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace srr {

namespace {

int count_occurrences(std::string_view text, std::string_view phrase) {
  if (phrase.empty()) return 0;
  int count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(phrase, pos)) != std::string_view::npos) {
    ++count;
    pos += phrase.size();
  }
  return count;
}

// Blank-line-separated blocks, whitespace-normalized for exact comparison.
std::vector<std::string> normalized_paragraphs(std::string_view text) {
  std::vector<std::string> blocks;
  std::string current;
  bool line_has_content = false;

  auto flush_block = [&]() {
    while (!current.empty() && current.back() == ' ') current.pop_back();
    if (!current.empty()) blocks.push_back(current);
    current.clear();
  };

  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);

    line_has_content = false;
    for (char c : line) {
      if (c == ' ' || c == '\t' || c == '\r') {
        if (!current.empty() && current.back() != ' ') current.push_back(' ');
      } else {
        current.push_back(c);
        line_has_content = true;
      }
    }
    if (!line_has_content) {
      // Blank line: close the running block.
      flush_block();
    } else if (!current.empty() && current.back() != ' ') {
      current.push_back(' ');
    }

    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  flush_block();
  return blocks;
}

}  // namespace

std::string_view to_string(LoopCriterion criterion) {
  switch (criterion) {
    case LoopCriterion::kSelfCorrection: return "self_correction";
    case LoopCriterion::kRestartedStepOne: return "restarted_step1";
    case LoopCriterion::kRepeatedHeadings: return "repeated_headings";
    case LoopCriterion::kDuplicateParagraphs: return "duplicate_paragraphs";
  }
  return "unknown";
}

const std::vector<std::string>& default_self_correction_lexicon() {
  static const std::vector<std::string> kLexicon = {
      "Wait",
      "wait,",
      "Actually",
      "Hmm",
      "Let me reconsider",
      "Let me re-check",
      "Let me recompute",
      "On second thought",
  };
  return kLexicon;
}

LoopReport detect_looping(std::string_view response_text,
                          const std::vector<std::string>& lexicon,
                          const LoopThresholds& thresholds) {
  LoopReport report;

  for (const std::string& phrase : lexicon)
    report.self_correction_count += count_occurrences(response_text, phrase);
  if (report.self_correction_count > thresholds.self_correction_count)
    report.triggered.push_back(LoopCriterion::kSelfCorrection);

  const std::vector<StepHeader> headers = scan_step_headers(response_text);
  std::unordered_map<long long, int> heading_counts;
  for (const StepHeader& header : headers) ++heading_counts[header.number];
  if (heading_counts[1] > 1)
    report.triggered.push_back(LoopCriterion::kRestartedStepOne);
  bool repeated_other = false;
  for (const auto& [number, count] : heading_counts)
    if (number != 1 && count >= 2) repeated_other = true;
  if (repeated_other)
    report.triggered.push_back(LoopCriterion::kRepeatedHeadings);

  const std::vector<std::string> blocks = normalized_paragraphs(response_text);
  if (!blocks.empty()) {
    std::unordered_set<std::string> distinct(blocks.begin(), blocks.end());
    report.duplicate_paragraph_fraction =
        static_cast<double>(blocks.size() - distinct.size()) /
        static_cast<double>(blocks.size());
  }
  if (report.duplicate_paragraph_fraction > thresholds.duplicate_paragraph_fraction)
    report.triggered.push_back(LoopCriterion::kDuplicateParagraphs);

  report.is_looping = !report.triggered.empty();
  return report;
}

FrrMtr frr_mtr(const ProcessOutcomeTally& tally) {
  if (tally.total < 1)
    throw std::invalid_argument("frr_mtr requires total >= 1");
  if (tally.four_way_sum() > tally.total)
    throw std::invalid_argument("four-way tally exceeds total");
  FrrMtr result;
  const double total = static_cast<double>(tally.total);
  result.frr_percent = 100.0 * static_cast<double>(tally.answer_ok_steps_ok) / total;
  result.mtr_percent =
      100.0 *
      static_cast<double>(tally.answer_ok_steps_bad + tally.answer_bad_steps_ok) / total;
  return result;
}

IndiscriminateShares indiscriminate_stats(const StepJudgementCounts& counts) {
  const std::int64_t answer_ok_total =
      counts.correct_steps_answer_ok + counts.wrong_steps_answer_ok;
  const std::int64_t answer_bad_total =
      counts.correct_steps_answer_bad + counts.wrong_steps_answer_bad;
  if (answer_ok_total <= 0 || answer_bad_total <= 0)
    throw std::invalid_argument("indiscriminate_stats requires steps on both sides");
  IndiscriminateShares shares;
  shares.wrong_share_answer_ok_percent =
      100.0 * static_cast<double>(counts.wrong_steps_answer_ok) /
      static_cast<double>(answer_ok_total);
  shares.correct_share_answer_bad_percent =
      100.0 * static_cast<double>(counts.correct_steps_answer_bad) /
      static_cast<double>(answer_bad_total);
  return shares;
}

double cohens_kappa(const std::vector<bool>& rater_a, const std::vector<bool>& rater_b) {
  if (rater_a.empty() || rater_a.size() != rater_b.size())
    throw std::invalid_argument("cohens_kappa requires paired non-empty labels");
  const double n = static_cast<double>(rater_a.size());
  double both_yes = 0, both_no = 0, a_yes = 0, b_yes = 0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    a_yes += rater_a[i];
    b_yes += rater_b[i];
    both_yes += rater_a[i] && rater_b[i];
    both_no += !rater_a[i] && !rater_b[i];
  }
  const double p_o = (both_yes + both_no) / n;
  const double p_e = (a_yes / n) * (b_yes / n) + (1.0 - a_yes / n) * (1.0 - b_yes / n);
  if (p_e == 1.0)
    throw std::invalid_argument("cohens_kappa undefined: chance agreement is 1");
  return (p_o - p_e) / (1.0 - p_e);
}

double point_biserial(const std::vector<bool>& binary, const std::vector<double>& values) {
  if (binary.empty() || binary.size() != values.size())
    throw std::invalid_argument("point_biserial requires paired non-empty input");
  const double n = static_cast<double>(binary.size());

  double ones = 0;
  for (bool b : binary) ones += b;
  const double p = ones / n;
  if (p == 0.0 || p == 1.0)
    throw std::invalid_argument("point_biserial undefined: binary variable is constant");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double variance = 0.0;
  for (double v : values) variance += (v - mean) * (v - mean);
  variance /= n;
  if (variance == 0.0)
    throw std::invalid_argument("point_biserial undefined: values have zero variance");

  double mean_one = 0.0, mean_zero = 0.0;
  for (std::size_t i = 0; i < binary.size(); ++i) {
    if (binary[i]) mean_one += values[i];
    else mean_zero += values[i];
  }
  mean_one /= ones;
  mean_zero /= (n - ones);

  return (mean_one - mean_zero) / std::sqrt(variance) * std::sqrt(p * (1.0 - p));
}

double avg_at_k(const std::vector<bool>& correct) {
  if (correct.empty()) throw std::invalid_argument("avg_at_k requires samples");
  double sum = 0.0;
  for (bool c : correct) sum += c;
  return 100.0 * sum / static_cast<double>(correct.size());
}

FormatComplianceRates format_compliance(const std::vector<Rollout>& batch) {
  if (batch.empty()) throw std::invalid_argument("format_compliance requires rollouts");
  FormatComplianceRates rates;
  for (const Rollout& rollout : batch) {
    const bool headers = !rollout.step_spans.empty();
    const bool boxed = rollout.extracted_answer.has_value();
    rates.headers += headers;
    rates.boxed += boxed;
    rates.both += headers && boxed;
  }
  const double n = static_cast<double>(batch.size());
  rates.headers /= n;
  rates.boxed /= n;
  rates.both /= n;
  return rates;
}

namespace {

CountStats count_stats(std::vector<int> counts) {
  CountStats stats;
  const double n = static_cast<double>(counts.size());
  double sum = 0.0;
  for (int c : counts) sum += c;
  stats.mean = sum / n;
  double variance = 0.0;
  for (int c : counts) variance += (c - stats.mean) * (c - stats.mean);
  stats.stddev = std::sqrt(variance / n);
  std::sort(counts.begin(), counts.end());
  const std::size_t half = counts.size() / 2;
  stats.median = counts.size() % 2 == 1
                     ? counts[half]
                     : (counts[half - 1] + counts[half]) / 2.0;
  stats.min = counts.front();
  stats.max = counts.back();
  return stats;
}

}  // namespace

CorpusStats corpus_stats(const std::vector<Rubric>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("corpus_stats requires rubrics");
  CorpusStats stats;
  stats.total_samples = corpus.size();

  std::vector<int> totals;
  std::array<std::vector<int>, 4> per_type;
  for (const Rubric& rubric : corpus) {
    const TypeCounts counts = rubric.type_counts();
    totals.push_back(counts.total());
    for (int t = 0; t < 4; ++t)
      per_type[t].push_back(counts.counts[static_cast<std::size_t>(t)]);
    ++stats.total_count_histogram[counts.total()];
    ++stats.pitfall_bonus_cooccurrence[{counts.of(RubricType::kPitfall),
                                        counts.of(RubricType::kBonus)}];
  }
  stats.total = count_stats(totals);
  for (int t = 0; t < 4; ++t)
    stats.by_type[static_cast<std::size_t>(t)] = count_stats(per_type[static_cast<std::size_t>(t)]);
  return stats;
}

std::string_view to_string(TrajectoryCategory category) {
  switch (category) {
    case TrajectoryCategory::kAnswerOkStepsOk: return "answer_ok_steps_ok";
    case TrajectoryCategory::kAnswerOkStepsBad: return "answer_ok_steps_bad";
    case TrajectoryCategory::kAnswerBadStepsOk: return "answer_bad_steps_ok";
    case TrajectoryCategory::kAnswerBadStepsBad: return "answer_bad_steps_bad";
  }
  return "unknown";
}

TrajectoryCategory categorize_trajectory(bool answer_correct,
                                         const std::vector<bool>& step_verdicts) {
  const bool steps_ok = !step_verdicts.empty() &&
                        std::all_of(step_verdicts.begin(), step_verdicts.end(),
                                    [](bool v) { return v; });
  if (answer_correct)
    return steps_ok ? TrajectoryCategory::kAnswerOkStepsOk
                    : TrajectoryCategory::kAnswerOkStepsBad;
  return steps_ok ? TrajectoryCategory::kAnswerBadStepsOk
                  : TrajectoryCategory::kAnswerBadStepsBad;
}

}  // namespace srr
