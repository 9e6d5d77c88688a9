#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace srr {

enum class RubricType { kSuggest = 0, kPitfall = 1, kBonus = 2, kAnswer = 3 };

std::string_view to_string(RubricType type);

struct RubricItem {
  int item_id = 0;  // 1-based, unique within a rubric
  RubricType type = RubricType::kSuggest;
  std::string criterion_text;
};

// Number of rubric items per type (the N_tau divisors of the type budgets).
struct TypeCounts {
  std::array<int, 4> counts{};

  int of(RubricType type) const { return counts[static_cast<int>(type)]; }
  int& of(RubricType type) { return counts[static_cast<int>(type)]; }
  int total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

// Per-problem criterion list. An empty rubric is a valid value (scoring then
// reduces to plain group-normalized outcome advantages); parse_rubric_text
// additionally enforces the corpus-format invariants.
struct Rubric {
  std::string problem_id;
  std::vector<RubricItem> items;

  TypeCounts type_counts() const;
  bool empty() const { return items.empty(); }
  const RubricItem* find(int item_id) const;
};

// Item counts past this are unusual enough to warrant a warning.
inline constexpr int kRubricItemWarningThreshold = 12;

struct RubricParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses the tagged one-item-per-line format: lines beginning with
// <SUGGEST>, <PITFALL>, <BONUS> or <ANSWER> become items with 1-based ids in
// document order; all other lines are ignored. Throws RubricParseError when
// there are no items, no SUGGEST item, or the ANSWER count is not exactly 1.
Rubric parse_rubric_text(std::string problem_id, std::string_view tagged_text);

// Inverse of parse_rubric_text: one "<TYPE> text" line per item.
std::string serialize_rubric_text(const Rubric& rubric);

// Non-fatal oddities (currently: item count above the warning threshold).
std::vector<std::string> rubric_warnings(const Rubric& rubric);

// One judge decision: whether item_id is satisfied and which step it judges.
// step domain: -1 (no relevant step), 0 (whole solution), 1..K.
struct Verdict {
  int item_id = 0;
  bool satisfied = false;
  int step = -1;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Outcome of screening one rollout's verdicts against a rubric. Rejections
// are counted by reason, never repaired; items the judge omitted are listed
// but not fabricated.
struct VerdictValidation {
  std::vector<Verdict> valid;
  int rejected_unknown_item = 0;
  int rejected_duplicate_item = 0;
  int rejected_step_out_of_range = 0;
  std::vector<int> missing_item_ids;

  int rejected_total() const {
    return rejected_unknown_item + rejected_duplicate_item + rejected_step_out_of_range;
  }
};

// step_count is the rollout's positional step count K; valid steps are
// {-1, 0, 1..K}. Throws std::invalid_argument when step_count < 0.
VerdictValidation validate_verdicts(const Rubric& rubric,
                                    const std::vector<Verdict>& verdicts,
                                    int step_count);

}  // namespace srr
