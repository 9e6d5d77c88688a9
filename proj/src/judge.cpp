#include "srr/judge.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace srr {

namespace {

using nlohmann::json;

// Strips ``` fence lines so fenced JSON parses like bare JSON.
std::string strip_code_fences(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::string_view line(text.data() + line_start, line_end - line_start);
    std::string_view stripped = line;
    while (!stripped.empty() && (stripped.front() == ' ' || stripped.front() == '\t'))
      stripped.remove_prefix(1);
    if (stripped.substr(0, 3) != "```") {
      out.append(line);
      out.push_back('\n');
    }
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return out;
}

// Matching ']' for the '[' at `open`, honoring JSON strings and escapes.
std::size_t matching_bracket(const std::string& text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[') ++depth;
    else if (c == ']' && --depth == 0) return i;
  }
  return std::string::npos;
}

bool is_word_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
}

bool contains_standalone(const std::string& text, std::string_view word) {
  std::size_t pos = 0;
  while ((pos = text.find(word, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t after = pos + word.size();
    const bool right_ok = after >= text.size() || !is_word_char(text[after]);
    if (left_ok && right_ok) return true;
    pos += 1;
  }
  return false;
}

}  // namespace

std::vector<Verdict> parse_rubric_verdicts(const std::string& raw_reply) {
  const std::string text = strip_code_fences(raw_reply);
  std::size_t open = 0;
  while ((open = text.find('[', open)) != std::string::npos) {
    const std::size_t close = matching_bracket(text, open);
    if (close == std::string::npos) {
      ++open;
      continue;
    }
    const json parsed = json::parse(text.substr(open, close - open + 1), nullptr,
                                    /*allow_exceptions=*/false);
    if (parsed.is_array()) {
      std::vector<Verdict> verdicts;
      bool well_formed = true;
      for (const json& entry : parsed) {
        if (!entry.is_object() || !entry.contains("id") || !entry.contains("satisfied") ||
            !entry.contains("step") || !entry["id"].is_number_integer() ||
            !entry["satisfied"].is_boolean() || !entry["step"].is_number_integer()) {
          well_formed = false;
          break;
        }
        verdicts.push_back({entry["id"].get<int>(), entry["satisfied"].get<bool>(),
                            entry["step"].get<int>()});
      }
      if (well_formed) return verdicts;
    }
    ++open;
  }
  throw JudgeFormatError("no verdict array found in judge reply");
}

bool parse_step_verdict(const std::string& raw_reply) {
  const bool incorrect = contains_standalone(raw_reply, "INCORRECT");
  const bool correct = contains_standalone(raw_reply, "CORRECT");
  if (incorrect) return false;
  if (correct) return true;
  throw JudgeFormatError("reply contains neither CORRECT nor INCORRECT");
}

HttpTransport::HttpTransport() : options_() {}

HttpTransport::HttpTransport(Options options) : options_(std::move(options)) {}

std::string HttpTransport::complete(const JudgeRequest& request, int /*attempt*/) {
  // Split "scheme://host[:port]/path" into client base and request path.
  const std::size_t scheme_end = request.endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw TransportError("endpoint must include a scheme: " + request.endpoint);
  const std::size_t path_start = request.endpoint.find('/', scheme_end + 3);
  const std::string base = path_start == std::string::npos
                               ? request.endpoint
                               : request.endpoint.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : request.endpoint.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);

  httplib::Headers headers;
  if (!options_.bearer_token.empty())
    headers.emplace("Authorization", "Bearer " + options_.bearer_token);

  const json body = {
      {"model", request.model},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };

  const httplib::Result result =
      client.Post(path, headers, body.dump(), "application/json");
  if (!result)
    throw TransportError("request to " + request.endpoint + " failed: " +
                         httplib::to_string(result.error()));
  if (result->status != 200)
    throw TransportError("endpoint returned status " + std::to_string(result->status));

  const json reply = json::parse(result->body, nullptr, /*allow_exceptions=*/false);
  if (!reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array() ||
      reply["choices"].empty())
    throw TransportError("reply body is not a chat completion");
  const json& choice = reply["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string())
    throw TransportError("chat completion carries no message content");
  return choice["message"]["content"].get<std::string>();
}

void ScriptedTransport::script(std::string tag, std::vector<std::string> replies) {
  scripts_[std::move(tag)] = std::move(replies);
}

void ScriptedTransport::set_default_reply(std::string reply) {
  default_reply_ = std::move(reply);
  has_default_ = true;
}

std::string ScriptedTransport::complete(const JudgeRequest& request, int attempt) {
  const auto script = scripts_.find(request.tag);
  if (script != scripts_.end() && !script->second.empty()) {
    const std::size_t index =
        std::min(static_cast<std::size_t>(attempt), script->second.size() - 1);
    return script->second[index];
  }
  if (has_default_) return default_reply_;
  throw TransportError("no scripted reply for tag " + request.tag);
}

GroupJudgeResult judge_group(const GroupRollouts& group, const Rubric& rubric,
                             Transport& transport, const JudgeSettings& settings) {
  const std::size_t n = group.rollouts.size();
  GroupJudgeResult result;
  result.verdicts.resize(n);
  result.validations.resize(n);
  result.raw_replies.resize(n);

  std::vector<RolloutJudgeFailure> failures(n);
  std::vector<char> failed(n, 0);

  auto judge_one = [&](std::size_t i) {
    const Rollout& rollout = group.rollouts[i];
    JudgeRequest request;
    request.endpoint = settings.endpoint;
    request.model = settings.model;
    request.temperature = settings.temperature;
    request.max_tokens = settings.max_tokens;
    request.tag = group.prompt_id + "#" + std::to_string(i);
    request.prompt = render_prompt(
        TemplateId::kRubricJudge,
        {{"problem", group.problem_text.empty() ? group.prompt_id : group.problem_text},
         {"rubric_items", format_rubric_items(rubric)},
         {"response", rollout.response_text},
         {"extracted_answer", rollout.extracted_answer.value_or("(none)")}});

    std::string last_error;
    for (int attempt = 0; attempt < settings.max_attempts; ++attempt) {
      std::string raw;
      try {
        raw = transport.complete(request, attempt);
      } catch (const TransportError& error) {
        last_error = error.what();
        continue;
      }
      result.raw_replies[i].push_back(raw);
      try {
        const std::vector<Verdict> parsed = parse_rubric_verdicts(raw);
        result.validations[i] = validate_verdicts(
            rubric, parsed, static_cast<int>(rollout.step_spans.size()));
        result.verdicts[i] = result.validations[i].valid;
        return;
      } catch (const JudgeFormatError& error) {
        last_error = error.what();
      }
    }
    failed[i] = 1;
    failures[i] = {static_cast<int>(i), last_error, settings.max_attempts};
  };

  const int workers =
      std::max(1, std::min<int>(settings.concurrency, static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) judge_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
          judge_one(i);
      });
    for (std::thread& thread : pool) thread.join();
  }

  for (std::size_t i = 0; i < n; ++i)
    if (failed[i]) result.failures.push_back(failures[i]);
  return result;
}

TrajectoryLabel verify_trajectory(const Rollout& rollout, const std::string& gold_answer) {
  return compute_accuracy_reward(rollout.extracted_answer, gold_answer) == 1
             ? TrajectoryLabel::kCorrect
             : TrajectoryLabel::kFlawed;
}

}  // namespace srr
