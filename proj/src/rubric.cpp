#include "srr/rubric.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <utility>

namespace srr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::optional<RubricType> tag_type(std::string_view line, std::size_t& tag_len) {
  struct Tag {
    std::string_view text;
    RubricType type;
  };
  static constexpr Tag kTags[] = {
      {"<SUGGEST>", RubricType::kSuggest},
      {"<PITFALL>", RubricType::kPitfall},
      {"<BONUS>", RubricType::kBonus},
      {"<ANSWER>", RubricType::kAnswer},
  };
  for (const Tag& tag : kTags) {
    if (line.substr(0, tag.text.size()) == tag.text) {
      tag_len = tag.text.size();
      return tag.type;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(RubricType type) {
  switch (type) {
    case RubricType::kSuggest: return "SUGGEST";
    case RubricType::kPitfall: return "PITFALL";
    case RubricType::kBonus: return "BONUS";
    case RubricType::kAnswer: return "ANSWER";
  }
  return "UNKNOWN";
}

TypeCounts Rubric::type_counts() const {
  TypeCounts counts;
  for (const RubricItem& item : items) ++counts.of(item.type);
  return counts;
}

const RubricItem* Rubric::find(int item_id) const {
  for (const RubricItem& item : items)
    if (item.item_id == item_id) return &item;
  return nullptr;
}

Rubric parse_rubric_text(std::string problem_id, std::string_view tagged_text) {
  Rubric rubric;
  rubric.problem_id = std::move(problem_id);

  std::size_t line_start = 0;
  int line_number = 0;
  while (line_start <= tagged_text.size()) {
    std::size_t line_end = tagged_text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = tagged_text.size();
    ++line_number;

    std::string_view line = trim(tagged_text.substr(line_start, line_end - line_start));
    std::size_t tag_len = 0;
    if (auto type = tag_type(line, tag_len)) {
      std::string_view text = trim(line.substr(tag_len));
      if (text.empty())
        throw RubricParseError(rubric.problem_id + ": empty criterion on line " +
                               std::to_string(line_number));
      RubricItem item;
      item.item_id = static_cast<int>(rubric.items.size()) + 1;
      item.type = *type;
      item.criterion_text = std::string(text);
      rubric.items.push_back(std::move(item));
    }

    if (line_end == tagged_text.size()) break;
    line_start = line_end + 1;
  }

  if (rubric.items.empty())
    throw RubricParseError(rubric.problem_id + ": no tagged rubric items found");
  const TypeCounts counts = rubric.type_counts();
  if (counts.of(RubricType::kAnswer) == 0)
    throw RubricParseError(rubric.problem_id + ": missing <ANSWER> item");
  if (counts.of(RubricType::kAnswer) > 1)
    throw RubricParseError(rubric.problem_id + ": more than one <ANSWER> item");
  if (counts.of(RubricType::kSuggest) == 0)
    throw RubricParseError(rubric.problem_id + ": missing <SUGGEST> item");
  return rubric;
}

std::string serialize_rubric_text(const Rubric& rubric) {
  std::string out;
  for (const RubricItem& item : rubric.items) {
    out += '<';
    out += to_string(item.type);
    out += "> ";
    out += item.criterion_text;
    out += '\n';
  }
  return out;
}

std::vector<std::string> rubric_warnings(const Rubric& rubric) {
  std::vector<std::string> warnings;
  if (static_cast<int>(rubric.items.size()) > kRubricItemWarningThreshold)
    warnings.push_back(rubric.problem_id + ": " + std::to_string(rubric.items.size()) +
                       " items exceeds the warning threshold of " +
                       std::to_string(kRubricItemWarningThreshold));
  return warnings;
}

VerdictValidation validate_verdicts(const Rubric& rubric,
                                    const std::vector<Verdict>& verdicts,
                                    int step_count) {
  if (step_count < 0)
    throw std::invalid_argument("step_count must be non-negative");

  VerdictValidation result;
  std::set<int> seen;
  for (const Verdict& verdict : verdicts) {
    if (rubric.find(verdict.item_id) == nullptr) {
      ++result.rejected_unknown_item;
      continue;
    }
    if (!seen.insert(verdict.item_id).second) {
      ++result.rejected_duplicate_item;
      continue;
    }
    if (verdict.step < -1 || verdict.step > step_count) {
      ++result.rejected_step_out_of_range;
      continue;
    }
    result.valid.push_back(verdict);
  }
  for (const RubricItem& item : rubric.items) {
    bool present = std::any_of(result.valid.begin(), result.valid.end(),
                               [&](const Verdict& v) { return v.item_id == item.item_id; });
    if (!present) result.missing_item_ids.push_back(item.item_id);
  }
  return result;
}

}  // namespace srr
