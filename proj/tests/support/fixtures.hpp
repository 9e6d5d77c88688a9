#pragma once

// Shared hand-built fixtures: the two-rollout group G1 exercised end to end
// by the reward, judge and CLI tests, and the labeled looping corpus.

#include <string>
#include <vector>

#include "srr/diagnostics.hpp"
#include "srr/reward.hpp"
#include "srr/rollout.hpp"
#include "srr/rubric.hpp"

namespace srr::testing {

inline Rubric g1_rubric() {
  return parse_rubric_text(
      "g1",
      "<SUGGEST> States the product identity linking the two given equations.\n"
      "<SUGGEST> Expands the product and isolates the target expression.\n"
      "<PITFALL> Drops the cross terms when expanding the product.\n"
      "<ANSWER> Final value reported equals 10.\n");
}

inline GroupRollouts g1_group() {
  GroupRollouts group;
  group.prompt_id = "g1";
  group.gold_answer = "10";
  group.problem_text = "Two positive reals have product identities; find the target value.";
  group.rollouts.push_back(make_rollout(
      "### Step 1: multiply the equations\n"
      "### Step 2: expand and isolate\n"
      "\\boxed{10}",
      "10"));
  group.rollouts.push_back(make_rollout(
      "### Step 1: multiply the equations\n"
      "### Step 2: drop the cross terms\n"
      "\\boxed{7}",
      "10"));
  return group;
}

inline std::vector<std::vector<Verdict>> g1_verdicts() {
  return {
      {{1, true, 1}, {2, true, 2}, {3, false, 2}, {4, true, 0}},
      {{1, true, 1}, {2, false, 2}, {3, true, 2}, {4, false, 0}},
  };
}

// Raw judge replies that parse into g1_verdicts(), for the scripted
// transport. Index 0 is plain JSON, index 1 is fenced with prose around it.
inline std::vector<std::string> g1_judge_replies() {
  return {
      R"([{"id":1,"satisfied":true,"step":1},{"id":2,"satisfied":true,"step":2},)"
      R"({"id":3,"satisfied":false,"step":2},{"id":4,"satisfied":true,"step":0}])",
      "Here is my evaluation [after checking].\n"
      "```json\n"
      "[{\"id\":1,\"satisfied\":true,\"step\":1},{\"id\":2,\"satisfied\":false,\"step\":2},\n"
      " {\"id\":3,\"satisfied\":true,\"step\":2},{\"id\":4,\"satisfied\":false,\"step\":0}]\n"
      "```\n",
  };
}

// ---------------------------------------------------------------------------
// Looping corpus: ten texts labeled with the exact criteria they trigger.

struct LoopingFixture {
  std::string name;
  std::string text;
  bool looping = false;
  std::vector<LoopCriterion> expected;
};

namespace detail {

inline std::string repeat_phrases(const std::string& phrase, int count,
                                  const std::string& filler) {
  std::string out;
  for (int i = 0; i < count; ++i)
    out += phrase + " " + filler + " " + std::to_string(i) + ".\n";
  return out;
}

}  // namespace detail

inline std::vector<LoopingFixture> looping_corpus() {
  std::vector<LoopingFixture> corpus;

  corpus.push_back({"self_correction_25",
                    "### Step 1: factor the polynomial\n"
                    "The roots follow from the quadratic formula.\n" +
                        detail::repeat_phrases("Wait", 25, "the discriminant needs sign") +
                        "### Step 2: conclude\n\\boxed{4}\n",
                    true,
                    {LoopCriterion::kSelfCorrection}});

  corpus.push_back({"restarted_step1",
                    "### Step 1: set coordinates\nPlace the origin at the center.\n"
                    "### Step 1: set coordinates again\nUse the tangency point instead.\n"
                    "### Step 2: solve\n\\boxed{12}\n",
                    true,
                    {LoopCriterion::kRestartedStepOne}});

  corpus.push_back({"repeated_heading",
                    "### Step 1: define variables\nLet n be the count.\n"
                    "### Step 2: count arrangements\nFirst attempt at the recurrence.\n"
                    "### Step 2: count arrangements\nSecond attempt with a new base case.\n"
                    "\\boxed{9}\n",
                    true,
                    {LoopCriterion::kRepeatedHeadings}});

  corpus.push_back({"duplicate_paragraphs",
                    "### Step 1: expand the sum\n\n"
                    "Split the series into even and odd parts.\n\n"
                    "The even part telescopes to a closed form.\n\n"
                    "The even part telescopes to a closed form.\n\n"
                    "The odd part telescopes to a closed form.\n\n"
                    "The odd part telescopes to a closed form.\n\n"
                    "Check convergence at the boundary.\n\n"
                    "Sum both closed forms.\n\n"
                    "Subtract the constant term.\n\n"
                    "Verify with the first three partial sums.\n\n"
                    "State the reduced fraction.\n\n"
                    "\\boxed{5}\n",
                    true,
                    {LoopCriterion::kDuplicateParagraphs}});

  // Degenerate revision spiral in the style of a truncated contest response:
  // 31 self-correction phrases and a restarted opening step.
  corpus.push_back({"revision_spiral",
                    "### Step 1: understand the configuration\n"
                    "The pentagon has two fixed angles, so build it from two triangles.\n" +
                        detail::repeat_phrases("Wait", 12, "the rotation direction flips") +
                        detail::repeat_phrases("Hmm", 10, "that vector is not perpendicular") +
                        detail::repeat_phrases("Actually", 9, "recompute the base angle") +
                        "### Step 1: understand the configuration\n"
                        "Start over with the apex at the origin.\n"
                        "### Step 2: minimize the distance sum\n"
                        "The weighted point is inside the hull so the bound applies\n",
                    true,
                    {LoopCriterion::kSelfCorrection, LoopCriterion::kRestartedStepOne}});

  corpus.push_back({"clean_three_step",
                    "### Step 1: translate the condition\nNo three chosen chairs are adjacent.\n"
                    "### Step 2: count with a recurrence\nThe count satisfies a linear recurrence.\n"
                    "### Step 3: reduce modulo 1000\n\\boxed{907}\n",
                    false,
                    {}});

  corpus.push_back({"clean_single_step",
                    "### Step 1: compute directly\nThe product of the two equations gives the "
                    "value at once.\n\\boxed{10}\n",
                    false,
                    {}});

  corpus.push_back({"boundary_twenty_phrases",
                    "### Step 1: bound the integral\n" +
                        detail::repeat_phrases("Wait", 20, "tighten the estimate") +
                        "### Step 2: conclude\n\\boxed{2}\n",
                    false,
                    {}});

  corpus.push_back({"boundary_ten_percent_duplicates",
                    "Opening remark on the construction.\n\n"
                    "Second paragraph introduces the lattice.\n\n"
                    "Third paragraph counts the interior points.\n\n"
                    "Fourth paragraph applies the area identity.\n\n"
                    "Fifth paragraph checks a small case.\n\n"
                    "Sixth paragraph generalizes the pattern.\n\n"
                    "Seventh paragraph handles the boundary.\n\n"
                    "Eighth paragraph sums the contributions.\n\n"
                    "Ninth paragraph simplifies the fraction.\n\n"
                    "Ninth paragraph simplifies the fraction.\n",
                    false,
                    {}});

  corpus.push_back({"clean_long_response",
                    "### Step 1: set up the recursion\n\n"
                    "Define the sequence by its first two terms.\n\n"
                    "### Step 2: find the characteristic roots\n\n"
                    "Both roots are real and distinct, so the general term follows.\n\n"
                    "### Step 3: match the initial conditions\n\n"
                    "Solve the two-by-two system for the coefficients.\n\n"
                    "### Step 4: evaluate\n\n"
                    "Actually the closed form simplifies nicely here.\n\n"
                    "\\boxed{144}\n",
                    false,
                    {}});

  return corpus;
}

}  // namespace srr::testing
