#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "srr/rollout.hpp"
#include "srr/rubric.hpp"

namespace srr {

enum class TemplateId {
  kRolloutGen,
  kRubricDistill,
  kFormatTrain,
  kRubricJudge,
  kStepJudge,
  kRubricValidity,
};

std::string_view to_string(TemplateId id);
TemplateId template_id_from_string(std::string_view name);

struct PromptTemplate {
  TemplateId id;
  std::string_view body;
  std::vector<std::string_view> placeholders;
};

const PromptTemplate& prompt_template(TemplateId id);

struct MissingBindingError : std::runtime_error {
  explicit MissingBindingError(const std::string& placeholder)
      : std::runtime_error("missing binding for placeholder {" + placeholder + "}"),
        placeholder(placeholder) {}
  std::string placeholder;
};

// Byte-exact substitution of every declared placeholder; unused bindings are
// ignored. Throws MissingBindingError naming the first unbound placeholder.
std::string render_prompt(TemplateId id, const std::map<std::string, std::string>& bindings);

// Numbered "id. [TYPE] criterion" lines for the {rubric_items} placeholder.
std::string format_rubric_items(const Rubric& rubric);

struct JudgeFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pulls the first well-formed JSON array of {id, satisfied, step} objects
// out of the reply, tolerating markdown fences and surrounding prose.
// Throws JudgeFormatError when no such array parses.
std::vector<Verdict> parse_rubric_verdicts(const std::string& raw_reply);

// Standalone CORRECT -> true, standalone INCORRECT -> false; INCORRECT wins
// when both appear. Throws JudgeFormatError when neither token is present.
bool parse_step_verdict(const std::string& raw_reply);

struct JudgeRequest {
  std::string endpoint;
  std::string model;
  std::string prompt;
  std::string tag;  // stable routing key, e.g. "<prompt_id>#<rollout_index>"
  double temperature = 0.0;
  int max_tokens = 2048;
};

class Transport {
 public:
  virtual ~Transport() = default;
  // attempt is 0-based. Throws TransportError on delivery failure.
  virtual std::string complete(const JudgeRequest& request, int attempt) = 0;
};

// Chat-completion HTTP transport: POST {model, messages, temperature,
// max_tokens} to the endpoint URL, read choices[0].message.content.
class HttpTransport final : public Transport {
 public:
  struct Options {
    std::string bearer_token;     // usually from SRR_JUDGE_TOKEN
    int timeout_seconds = 120;
  };
  HttpTransport();
  explicit HttpTransport(Options options);
  std::string complete(const JudgeRequest& request, int attempt) override;

 private:
  Options options_;
};

// Deterministic offline transport. Replies are keyed by request tag; each
// attempt consumes the next scripted reply (the last one repeats). Unknown
// tags fall back to the default reply when one is set.
class ScriptedTransport final : public Transport {
 public:
  void script(std::string tag, std::vector<std::string> replies);
  void set_default_reply(std::string reply);
  std::string complete(const JudgeRequest& request, int attempt) override;

 private:
  std::map<std::string, std::vector<std::string>> scripts_;
  std::string default_reply_;
  bool has_default_ = false;
};

struct JudgeSettings {
  std::string endpoint;
  std::string model = "gpt-judge";
  double temperature = 0.0;
  int max_tokens = 2048;
  int max_attempts = 3;
  int concurrency = 8;
};

struct RolloutJudgeFailure {
  int rollout_index = 0;
  std::string reason;
  int attempts = 0;
};

struct GroupJudgeResult {
  // One validated verdict list per rollout; empty when judging failed.
  std::vector<std::vector<Verdict>> verdicts;
  std::vector<VerdictValidation> validations;
  std::vector<RolloutJudgeFailure> failures;
  // Raw reply per rollout per attempt, in attempt order, for the audit log.
  std::vector<std::vector<std::string>> raw_replies;
};

// Judges every rollout of a group against the rubric, retrying per rollout
// on judge-format errors up to max_attempts. A rollout that exhausts its
// retries ends up with an empty verdict list and a failure entry; the rest
// of the group is unaffected.
GroupJudgeResult judge_group(const GroupRollouts& group, const Rubric& rubric,
                             Transport& transport, const JudgeSettings& settings);

enum class TrajectoryLabel { kCorrect, kFlawed };

// Correct iff the extracted answer matches the ground truth.
TrajectoryLabel verify_trajectory(const Rollout& rollout, const std::string& gold_answer);

}  // namespace srr
