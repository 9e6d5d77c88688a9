#include "srr/judge.hpp"

namespace srr {

namespace {

constexpr std::string_view kRolloutGen =
    R"(Solve the following math problem step by step. Please strictly follow these formatting instructions:

1. Step Format: Organize your reasoning into clear steps. Start each step with the header "### Step N:" (e.g., ### Step 1:, ### Step 2:).
2. Final Answer: The last line of your response must be enclosed in tags like this: "<answer>Answer</answer>", where Answer is the calculated result.

Problem: {Problem})";

constexpr std::string_view kRubricDistill =
    R"(You are designing a grading rubric for math problem solutions.

The original problem statement is: {problem_text}

You are given n model solutions with a correctness label. For each numbered solution: {solutions_block}

The true correct answer for this problem is: <ANSWER>{gold_answer}</ANSWER>

Based on the samples and the true answer, create a concise, verifiable rubric. Output ONLY structured items using the tags below (one item per line):

- <SUGGEST>: Mandatory. One scoring checkpoint per line. Each checkpoint checks whether the candidate CoT covers a key reasoning step from the standard solution path. Make it specific and objectively checkable from the text.
- <PITFALL>: Optional. Only include if you are confident. Flags reasoning traps or common errors to avoid.
- <BONUS>: Optional. Only include if you are confident. Rewards especially clever, efficient, or elegant reasoning patterns.
- <ANSWER>: Mandatory. One line that checks whether the final answer matches the ground truth above (allow equivalent numeric forms).

Guidelines:
- Select only the most essential scoring points; total lines <= 8 (SUGGEST/ANSWER mandatory; PITFALL/BONUS only if sure). Do NOT pad to the limit; stop once the main reasoning chain is covered.
- Each <SUGGEST> is exactly one scoring point and must be independently verifiable by an LLM judge from the candidate response.
- Do NOT include formatting or output-structure checks (e.g., headers, tags, markdown). Focus solely on mathematical / logical content steps and correctness of the final answer.
- Do not reference the given samples explicitly; generalize the rubric.
- Keep wording concise and actionable; no extra commentary before or after.)";

constexpr std::string_view kFormatTrain =
    R"(Solve the following math problem step by step. Follow these formatting rules:

1. Steps: Break your solution into multiple clear steps. Begin each step with "### Step N:" (e.g., ### Step 1:, ### Step 2:, ### Step 3:).
2. Final Answer: End your response with the answer inside \boxed{}.

Problem: {Problem})";

constexpr std::string_view kRubricJudge =
    R"(Problem
{problem}

Rubric Items
{rubric_items}

Student Solution
{response}

Student's Final Answer
{extracted_answer}

Task
For every rubric item listed above, evaluate the student's solution.

Rules:
- SUGGEST -> satisfied: true if the student correctly performed that reasoning step.
- PITFALL -> satisfied: true if the student made that mistake (fell into the pitfall).
- BONUS -> satisfied: true if the student used that approach.

For step: the 1-indexed step number (### Step N) most closely associated with this item. Use 0 if it spans the whole solution; use -1 if there is no relevant step.

Return ONLY a valid JSON array:
[
  {"id": <int>, "satisfied": <bool>, "step": <int>},
  ...
])";

constexpr std::string_view kStepJudge =
    R"(You are a math reasoning step verifier. Given a math problem and a sequence of reasoning steps, determine whether the CURRENT STEP is logically correct.

Problem
{question}

Ground Truth Answer
{answer}

Previous Steps (assumed correct for this evaluation)
{previous_steps}

Current Step to Evaluate
{current_step_title}
{current_step_content}

Instructions
Analyze whether the current step contains correct reasoning, calculations, and logic. Consider:
1. Are the mathematical operations correct?
2. Is the logic/deduction valid?
3. Are there any errors in the step?

Respond with EXACTLY one of:
- "CORRECT" if the step is logically and mathematically correct
- "INCORRECT" if the step contains any error)";

constexpr std::string_view kRubricValidity =
    R"(You are a mathematics expert evaluating the quality of a rubric item for a math problem.

Math Problem
{problem}

Ground Truth Answer
{ground_truth}

Rubric Item
Type: {rubric_type}
Content: {rubric_text}

Rubric Type Definitions
- SUGGEST: A recommended reasoning step or approach for solving the problem.
- PITFALL: A common mistake or error that students might make.
- BONUS: An alternative valid approach or insight.
- ANSWER: The expected final answer.

Your Task
Judge whether this rubric item is valid for the given math problem:
1. Is the content mathematically correct?
2. Is it relevant to this specific problem?
3. Is the type label (SUGGEST/PITFALL/BONUS/ANSWER) appropriate?

Respond with ONLY a JSON object (no markdown, no extra text):
{"valid": true or false, "reason": "brief explanation"})";

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kRolloutGen: return "rollout_gen";
    case TemplateId::kRubricDistill: return "rubric_distill";
    case TemplateId::kFormatTrain: return "format_train";
    case TemplateId::kRubricJudge: return "rubric_judge";
    case TemplateId::kStepJudge: return "step_judge";
    case TemplateId::kRubricValidity: return "rubric_validity";
  }
  return "unknown";
}

TemplateId template_id_from_string(std::string_view name) {
  if (name == "rollout_gen") return TemplateId::kRolloutGen;
  if (name == "rubric_distill") return TemplateId::kRubricDistill;
  if (name == "format_train") return TemplateId::kFormatTrain;
  if (name == "rubric_judge") return TemplateId::kRubricJudge;
  if (name == "step_judge") return TemplateId::kStepJudge;
  if (name == "rubric_validity") return TemplateId::kRubricValidity;
  throw std::invalid_argument("unknown template id: " + std::string(name));
}

const PromptTemplate& prompt_template(TemplateId id) {
  static const std::map<TemplateId, PromptTemplate> kTemplates = {
      {TemplateId::kRolloutGen, {TemplateId::kRolloutGen, kRolloutGen, {"Problem"}}},
      {TemplateId::kRubricDistill,
       {TemplateId::kRubricDistill, kRubricDistill,
        {"problem_text", "solutions_block", "gold_answer"}}},
      {TemplateId::kFormatTrain, {TemplateId::kFormatTrain, kFormatTrain, {"Problem"}}},
      {TemplateId::kRubricJudge,
       {TemplateId::kRubricJudge, kRubricJudge,
        {"problem", "rubric_items", "response", "extracted_answer"}}},
      {TemplateId::kStepJudge,
       {TemplateId::kStepJudge, kStepJudge,
        {"question", "answer", "previous_steps", "current_step_title",
         "current_step_content"}}},
      {TemplateId::kRubricValidity,
       {TemplateId::kRubricValidity, kRubricValidity,
        {"problem", "ground_truth", "rubric_type", "rubric_text"}}},
  };
  return kTemplates.at(id);
}

std::string render_prompt(TemplateId id, const std::map<std::string, std::string>& bindings) {
  const PromptTemplate& tmpl = prompt_template(id);
  for (std::string_view name : tmpl.placeholders)
    if (bindings.find(std::string(name)) == bindings.end())
      throw MissingBindingError(std::string(name));

  // Single pass over the original template body, so binding values that
  // happen to contain placeholder tokens are never re-substituted.
  std::string rendered;
  rendered.reserve(tmpl.body.size());
  std::size_t i = 0;
  while (i < tmpl.body.size()) {
    bool substituted = false;
    if (tmpl.body[i] == '{') {
      for (std::string_view name : tmpl.placeholders) {
        if (tmpl.body.substr(i + 1, name.size()) == name &&
            i + 1 + name.size() < tmpl.body.size() &&
            tmpl.body[i + 1 + name.size()] == '}') {
          rendered += bindings.at(std::string(name));
          i += name.size() + 2;
          substituted = true;
          break;
        }
      }
    }
    if (!substituted) {
      rendered.push_back(tmpl.body[i]);
      ++i;
    }
  }
  return rendered;
}

std::string format_rubric_items(const Rubric& rubric) {
  std::string lines;
  for (const RubricItem& item : rubric.items) {
    lines += std::to_string(item.item_id);
    lines += ". [";
    lines += to_string(item.type);
    lines += "] ";
    lines += item.criterion_text;
    lines += '\n';
  }
  if (!lines.empty()) lines.pop_back();
  return lines;
}

}  // namespace srr
