#include "srr/rollout.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace srr {

namespace {

using boost::multiprecision::cpp_int;

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

// A rational p/q with q > 0, built from exact integer arithmetic so that
// contest answers like "288/5" and "57.6" compare equal.
struct Rational {
  cpp_int num;
  cpp_int den;  // > 0
};

std::optional<cpp_int> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  if (i == s.size()) return std::nullopt;
  cpp_int value = 0;
  for (; i < s.size(); ++i) {
    if (!is_digit(s[i])) return std::nullopt;
    value = value * 10 + (s[i] - '0');
  }
  return negative ? -value : value;
}

// Integer or decimal literal, e.g. "-12", "57.6", ".5".
std::optional<Rational> parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  cpp_int num = 0;
  cpp_int den = 1;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_point) return std::nullopt;
      seen_point = true;
      continue;
    }
    if (!is_digit(c)) return std::nullopt;
    any_digit = true;
    num = num * 10 + (c - '0');
    if (seen_point) den *= 10;
  }
  if (!any_digit) return std::nullopt;
  if (negative) num = -num;
  return Rational{num, den};
}

std::optional<Rational> parse_rational(std::string_view s);

// \frac{a}{b} with optional leading sign.
std::optional<Rational> parse_frac(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  constexpr std::string_view kFrac = "\\frac";
  if (s.substr(0, kFrac.size()) != kFrac) return std::nullopt;
  s.remove_prefix(kFrac.size());
  auto read_group = [&]() -> std::optional<std::string_view> {
    if (s.empty() || s.front() != '{') return std::nullopt;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}' && --depth == 0) {
        std::string_view inner = s.substr(1, i - 1);
        s.remove_prefix(i + 1);
        return inner;
      }
    }
    return std::nullopt;
  };
  auto a = read_group();
  if (!a) return std::nullopt;
  auto b = read_group();
  if (!b || !s.empty()) return std::nullopt;
  auto ra = parse_rational(*a);
  auto rb = parse_rational(*b);
  if (!ra || !rb || rb->num == 0) return std::nullopt;
  Rational r{ra->num * rb->den, ra->den * rb->num};
  if (r.den < 0) {
    r.num = -r.num;
    r.den = -r.den;
  }
  if (negative) r.num = -r.num;
  return r;
}

std::optional<Rational> parse_rational(std::string_view s) {
  if (auto dec = parse_decimal(s)) return dec;
  if (auto frac = parse_frac(s)) return frac;
  auto slash = s.find('/');
  if (slash != std::string_view::npos && slash + 1 < s.size()) {
    auto num = parse_integer(s.substr(0, slash));
    auto den = parse_integer(s.substr(slash + 1));
    if (num && den && *den != 0) {
      Rational r{*num, *den};
      if (r.den < 0) {
        r.num = -r.num;
        r.den = -r.den;
      }
      return r;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<TokenSpan> whitespace_token_offsets(std::string_view text) {
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ws(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !is_ws(text[i])) ++i;
    spans.push_back({start, i});
  }
  return spans;
}

void validate_token_offsets(std::string_view text,
                            const std::vector<TokenSpan>& offsets) {
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const TokenSpan& t = offsets[i];
    if (t.end < t.begin || t.end > text.size())
      throw std::invalid_argument("token offset " + std::to_string(i) + " out of range");
    if (i > 0 && t.begin < prev_end)
      throw std::invalid_argument("token offsets overlap at index " + std::to_string(i));
    if (i > 0 && t.begin < offsets[i - 1].begin)
      throw std::invalid_argument("token offsets decrease at index " + std::to_string(i));
    prev_end = t.end;
  }
}

std::vector<StepHeader> scan_step_headers(std::string_view text) {
  constexpr std::string_view kTag = "### Step";
  std::vector<StepHeader> headers;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();

    std::size_t i = line_start;
    while (i < line_end && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i + kTag.size() <= line_end && text.substr(i, kTag.size()) == kTag) {
      std::size_t j = i + kTag.size();
      while (j < line_end && (text[j] == ' ' || text[j] == '\t')) ++j;
      std::size_t digits_start = j;
      long long number = 0;
      while (j < line_end && is_digit(text[j]) && j - digits_start < 18) {
        number = number * 10 + (text[j] - '0');
        ++j;
      }
      if (j > digits_start) {
        while (j < line_end && (text[j] == ' ' || text[j] == '\t')) ++j;
        if (j < line_end && text[j] == ':') headers.push_back({number, i});
      }
    }

    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return headers;
}

std::vector<StepSpan> parse_step_spans(std::string_view response_text,
                                       const std::vector<TokenSpan>& token_offsets) {
  validate_token_offsets(response_text, token_offsets);
  const std::vector<StepHeader> headers = scan_step_headers(response_text);
  std::vector<StepSpan> spans;
  spans.reserve(headers.size());

  std::size_t token = 0;
  for (std::size_t h = 0; h < headers.size(); ++h) {
    const std::size_t range_begin = headers[h].offset;
    const std::size_t range_end =
        h + 1 < headers.size() ? headers[h + 1].offset : response_text.size();
    while (token < token_offsets.size() && token_offsets[token].begin < range_begin)
      ++token;
    StepSpan span;
    span.step_number = headers[h].number;
    span.header_char_offset = headers[h].offset;
    span.token_begin = token;
    while (token < token_offsets.size() && token_offsets[token].begin < range_end)
      ++token;
    span.token_end = token;
    spans.push_back(span);
  }
  return spans;
}

std::optional<std::string> extract_boxed_answer(std::string_view response_text) {
  constexpr std::string_view kBoxed = "\\boxed{";
  std::optional<std::string> answer;
  std::size_t pos = 0;
  while (true) {
    std::size_t at = response_text.find(kBoxed, pos);
    if (at == std::string_view::npos) break;
    std::size_t content_start = at + kBoxed.size();
    int depth = 1;
    for (std::size_t i = content_start; i < response_text.size(); ++i) {
      if (response_text[i] == '{') ++depth;
      else if (response_text[i] == '}' && --depth == 0) {
        answer = std::string(
            trim(response_text.substr(content_start, i - content_start)));
        break;
      }
    }
    pos = content_start;
  }
  return answer;
}

int compute_format_reward(const Rollout& rollout) {
  return !rollout.step_spans.empty() && rollout.extracted_answer.has_value() ? 1 : 0;
}

std::string normalize_answer_text(std::string_view answer) {
  std::string compact;
  compact.reserve(answer.size());
  for (char c : answer)
    if (!is_ws(c)) compact.push_back(c);

  // Strip math-mode wrappers, repeatedly in case of $\(...\)$ style nesting.
  bool stripped = true;
  while (stripped) {
    stripped = false;
    if (compact.size() >= 2 && compact.front() == '$' && compact.back() == '$') {
      compact = compact.substr(1, compact.size() - 2);
      stripped = true;
    }
    if (compact.size() >= 4 && compact.starts_with("\\(") && compact.ends_with("\\)")) {
      compact = compact.substr(2, compact.size() - 4);
      stripped = true;
    }
  }

  for (std::string_view variant : {std::string_view("\\dfrac"), std::string_view("\\tfrac")}) {
    std::size_t at = 0;
    while ((at = compact.find(variant, at)) != std::string::npos)
      compact.replace(at, variant.size(), "\\frac");
  }
  return compact;
}

bool numerically_equivalent(std::string_view a, std::string_view b) {
  auto ra = parse_rational(normalize_answer_text(a));
  if (!ra) return false;
  auto rb = parse_rational(normalize_answer_text(b));
  if (!rb) return false;
  return ra->num * rb->den == rb->num * ra->den;
}

int compute_accuracy_reward(const std::optional<std::string>& extracted,
                            const std::string& gold) {
  if (!extracted.has_value()) return 0;
  const std::string ne = normalize_answer_text(*extracted);
  const std::string ng = normalize_answer_text(gold);
  if (!ne.empty() && ne == ng) return 1;
  return numerically_equivalent(ne, ng) ? 1 : 0;
}

Rollout make_rollout(std::string response_text, std::vector<TokenSpan> token_offsets,
                     const std::string& gold_answer) {
  Rollout rollout;
  rollout.response_text = std::move(response_text);
  rollout.token_offsets = std::move(token_offsets);
  rollout.step_spans = parse_step_spans(rollout.response_text, rollout.token_offsets);
  rollout.extracted_answer = extract_boxed_answer(rollout.response_text);
  rollout.format_reward = compute_format_reward(rollout);
  rollout.accuracy_reward = compute_accuracy_reward(rollout.extracted_answer, gold_answer);
  return rollout;
}

Rollout make_rollout(std::string response_text, const std::string& gold_answer) {
  std::vector<TokenSpan> offsets = whitespace_token_offsets(response_text);
  return make_rollout(std::move(response_text), std::move(offsets), gold_answer);
}

}  // namespace srr
