#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srr {

// Half-open [begin, end) character range of one token in the response text.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

// One "### Step N:" block. Token indices are half-open [token_begin,
// token_end); the range is empty when no token starts inside the step's
// character range. step_number is the printed N — duplicates are preserved
// and ordering is positional.
struct StepSpan {
  long long step_number = 0;
  std::size_t token_begin = 0;
  std::size_t token_end = 0;
  std::size_t header_char_offset = 0;

  bool has_tokens() const { return token_end > token_begin; }

  friend bool operator==(const StepSpan&, const StepSpan&) = default;
};

// A step header found in the raw text: the printed number and the character
// offset of its "###".
struct StepHeader {
  long long number = 0;
  std::size_t offset = 0;
};

// One sampled response with its parsed structure and verifiable base rewards.
struct Rollout {
  std::string response_text;
  std::vector<TokenSpan> token_offsets;
  std::vector<StepSpan> step_spans;
  std::optional<std::string> extracted_answer;
  int accuracy_reward = 0;  // 0 or 1
  int format_reward = 0;    // 0 or 1
};

// All rollouts sampled for one prompt. problem_text is optional context for
// judge prompts; empty means only the prompt_id is known.
struct GroupRollouts {
  std::string prompt_id;
  std::string gold_answer;
  std::string problem_text;
  std::vector<Rollout> rollouts;
};

// Maximal runs of non-whitespace bytes. The built-in tokenizer for fixtures
// and offline runs; any tokenizer's offset mapping can be supplied instead.
std::vector<TokenSpan> whitespace_token_offsets(std::string_view text);

// Throws std::invalid_argument unless offsets are in-range, non-overlapping
// and non-decreasing in begin.
void validate_token_offsets(std::string_view text,
                            const std::vector<TokenSpan>& offsets);

// Scans for lines of the form [ws] "### Step" [ws] <integer> [ws] ":".
std::vector<StepHeader> scan_step_headers(std::string_view text);

// One StepSpan per header, in document order. A step's character range runs
// from its header to the char before the next header (or end of text); a
// token belongs to the step containing its begin offset. Text before the
// first header belongs to no step. No headers -> empty list.
std::vector<StepSpan> parse_step_spans(std::string_view response_text,
                                       const std::vector<TokenSpan>& token_offsets);

// Content of the last balanced "\boxed{...}", whitespace-trimmed.
// Occurrences whose braces never balance are ignored.
std::optional<std::string> extract_boxed_answer(std::string_view response_text);

// 1 iff the rollout has at least one step span and an extracted answer.
int compute_format_reward(const Rollout& rollout);

// 1 iff extracted is present and equivalent to gold: exact match after
// whitespace / LaTeX-wrapper normalization, or equal as exact rationals.
int compute_accuracy_reward(const std::optional<std::string>& extracted,
                            const std::string& gold);

// Strips whitespace, surrounding $...$ / \(...\) wrappers and normalizes
// \dfrac, \tfrac to \frac.
std::string normalize_answer_text(std::string_view answer);

// Exact rational comparison: both sides parse as integer, decimal, a/b or
// \frac{a}{b} and have equal value. Non-numeric input -> false.
bool numerically_equivalent(std::string_view a, std::string_view b);

// Full parse pipeline: spans, answer extraction and base rewards.
Rollout make_rollout(std::string response_text, std::vector<TokenSpan> token_offsets,
                     const std::string& gold_answer);

// Same, tokenized with whitespace_token_offsets.
Rollout make_rollout(std::string response_text, const std::string& gold_answer);

}  // namespace srr
