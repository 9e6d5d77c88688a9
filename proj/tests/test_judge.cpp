#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "srr/judge.hpp"
#include "srr/jsonl.hpp"
#include "support/fixtures.hpp"

using namespace srr;
using srr::testing::g1_group;
using srr::testing::g1_judge_replies;
using srr::testing::g1_rubric;
using srr::testing::g1_verdicts;

TEST_CASE("rubric_judge prompt renders every item line exactly once, in order") {
  const Rubric rubric = g1_rubric();
  const std::string prompt = render_prompt(
      TemplateId::kRubricJudge,
      {{"problem", "the paired equation problem"},
       {"rubric_items", format_rubric_items(rubric)},
       {"response", "### Step 1: work"},
       {"extracted_answer", "10"}});

  CHECK(prompt.find("Return ONLY a valid JSON array") != std::string::npos);
  std::size_t previous = 0;
  for (const RubricItem& item : rubric.items) {
    const std::size_t first = prompt.find(item.criterion_text);
    REQUIRE(first != std::string::npos);
    CHECK(prompt.find(item.criterion_text, first + 1) == std::string::npos);
    CHECK(first > previous);
    previous = first;
  }
  // Placeholder braces are gone; the JSON schema braces remain.
  CHECK(prompt.find("{problem}") == std::string::npos);
  CHECK(prompt.find("{\"id\": <int>") != std::string::npos);
}

TEST_CASE("each template carries its anchor instruction") {
  CHECK(render_prompt(TemplateId::kStepJudge,
                      {{"question", "q"},
                       {"answer", "a"},
                       {"previous_steps", "none"},
                       {"current_step_title", "### Step 1:"},
                       {"current_step_content", "body"}})
            .find("Respond with EXACTLY one of") != std::string::npos);
  CHECK(render_prompt(TemplateId::kRubricDistill,
                      {{"problem_text", "p"}, {"solutions_block", "s"}, {"gold_answer", "g"}})
            .find("create a concise, verifiable rubric") != std::string::npos);
  CHECK(render_prompt(TemplateId::kFormatTrain, {{"Problem", "p"}})
            .find("Begin each step with") != std::string::npos);
  CHECK(render_prompt(TemplateId::kRolloutGen, {{"Problem", "p"}})
            .find("<answer>Answer</answer>") != std::string::npos);
  CHECK(render_prompt(TemplateId::kRubricValidity,
                      {{"problem", "p"},
                       {"ground_truth", "g"},
                       {"rubric_type", "SUGGEST"},
                       {"rubric_text", "t"}})
            .find("Respond with ONLY a JSON object") != std::string::npos);
}

TEST_CASE("missing bindings fail naming the placeholder") {
  try {
    render_prompt(TemplateId::kRubricJudge,
                  {{"problem", "p"}, {"rubric_items", "r"}, {"extracted_answer", "a"}});
    FAIL("expected MissingBindingError");
  } catch (const MissingBindingError& error) {
    CHECK(error.placeholder == "response");
  }
}

TEST_CASE("substitution is byte-exact") {
  const std::string prompt = render_prompt(
      TemplateId::kFormatTrain, {{"Problem", "keep {braces} and $dollars$ intact"}});
  CHECK(prompt.find("keep {braces} and $dollars$ intact") != std::string::npos);

  // A binding value that itself looks like a placeholder is left alone.
  const std::string hostile = render_prompt(
      TemplateId::kRubricJudge, {{"problem", "quoting {response} here"},
                                 {"rubric_items", "1. [SUGGEST] x"},
                                 {"response", "the actual solution"},
                                 {"extracted_answer", "1"}});
  CHECK(hostile.find("quoting {response} here") != std::string::npos);
  CHECK(hostile.find("quoting the actual solution") == std::string::npos);
}

TEST_CASE("verdict parsing tolerates fences and prose") {
  const std::string plain = R"([{"id":1,"satisfied":true,"step":2}])";
  const std::vector<Verdict> parsed = parse_rubric_verdicts(plain);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0] == Verdict{1, true, 2});

  const std::string fenced = "```json\n" + plain + "\n```";
  CHECK(parse_rubric_verdicts(fenced) == parsed);

  const std::string prose =
      "Sure [let me think]. After checking items:\n" + plain + "\nDone.";
  CHECK(parse_rubric_verdicts(prose) == parsed);

  const std::string negative = R"([{"id":3,"satisfied":false,"step":-1}])";
  CHECK(parse_rubric_verdicts(negative)[0] == Verdict{3, false, -1});

  CHECK(parse_rubric_verdicts("[]").empty());
  CHECK_THROWS_AS(parse_rubric_verdicts("I cannot evaluate this."), JudgeFormatError);
  CHECK_THROWS_AS(parse_rubric_verdicts(R"({"id":1})"), JudgeFormatError);
  CHECK_THROWS_AS(parse_rubric_verdicts("[1, 2, 3]"), JudgeFormatError);
  CHECK_THROWS_AS(parse_rubric_verdicts(R"([{"id":1.5,"satisfied":true,"step":1}])"),
                  JudgeFormatError);
}

TEST_CASE("step verdict parsing") {
  CHECK(parse_step_verdict("CORRECT") == true);
  CHECK(parse_step_verdict("INCORRECT") == false);
  CHECK(parse_step_verdict("\"CORRECT\"") == true);
  CHECK(parse_step_verdict("The step is CORRECT.") == true);
  // INCORRECT wins when both tokens appear.
  CHECK(parse_step_verdict("CORRECT at first glance, but INCORRECT overall") == false);
  // Embedded words are not standalone tokens.
  CHECK(parse_step_verdict("INCORRECTLY phrased but CORRECT") == true);
  CHECK_THROWS_AS(parse_step_verdict("maybe"), JudgeFormatError);
  CHECK_THROWS_AS(parse_step_verdict("correct"), JudgeFormatError);
}

TEST_CASE("scripted judge on G1 reproduces the shared verdict table") {
  const GroupRollouts group = g1_group();
  ScriptedTransport transport;
  const std::vector<std::string> replies = g1_judge_replies();
  transport.script("g1#0", {replies[0]});
  transport.script("g1#1", {replies[1]});

  JudgeSettings settings;
  settings.max_attempts = 3;
  settings.concurrency = 1;
  const GroupJudgeResult result = judge_group(group, g1_rubric(), transport, settings);
  CHECK(result.failures.empty());
  CHECK(result.verdicts == g1_verdicts());
  CHECK(result.raw_replies[0].size() == 1);
}

TEST_CASE("per-rollout retries recover from garbage replies") {
  const GroupRollouts group = g1_group();
  const std::vector<std::string> replies = g1_judge_replies();
  ScriptedTransport transport;
  transport.script("g1#0", {"no json here", "still nothing", replies[0]});
  transport.script("g1#1", {replies[1]});

  JudgeSettings settings;
  settings.max_attempts = 3;
  settings.concurrency = 2;
  const GroupJudgeResult result = judge_group(group, g1_rubric(), transport, settings);
  CHECK(result.failures.empty());
  CHECK(result.verdicts == g1_verdicts());
  CHECK(result.raw_replies[0].size() == 3);  // two failures plus the success
}

TEST_CASE("exhausted retries empty one rollout without touching the rest") {
  const GroupRollouts group = g1_group();
  const std::vector<std::string> replies = g1_judge_replies();
  ScriptedTransport transport;
  transport.script("g1#0", {"garbage"});  // repeats for every attempt
  transport.script("g1#1", {replies[1]});

  JudgeSettings settings;
  settings.max_attempts = 3;
  settings.concurrency = 4;
  const GroupJudgeResult result = judge_group(group, g1_rubric(), transport, settings);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].rollout_index == 0);
  CHECK(result.failures[0].attempts == 3);
  CHECK(result.verdicts[0].empty());
  CHECK(result.verdicts[1] == g1_verdicts()[1]);
}

TEST_CASE("scripted judging is deterministic across runs and concurrency levels") {
  auto run_once = [](int concurrency) {
    ScriptedTransport transport;
    const std::vector<std::string> replies = g1_judge_replies();
    transport.script("g1#0", {replies[0]});
    transport.script("g1#1", {replies[1]});
    JudgeSettings settings;
    settings.concurrency = concurrency;
    const GroupJudgeResult result =
        judge_group(g1_group(), g1_rubric(), transport, settings);
    std::string serialized;
    for (std::size_t i = 0; i < result.verdicts.size(); ++i) {
      VerdictRecord record{"g1", static_cast<int>(i), result.verdicts[i]};
      serialized += verdict_record_to_json(record) + "\n";
    }
    return serialized;
  };
  const std::string first = run_once(1);
  CHECK(first == run_once(1));
  CHECK(first == run_once(8));
}

TEST_CASE("http transport speaks the chat-completion convention") {
  nlohmann::json captured_body;
  std::string captured_auth;
  httplib::Server server;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& request, httplib::Response& response) {
                captured_body = nlohmann::json::parse(request.body);
                if (request.has_header("Authorization"))
                  captured_auth = request.get_header_value("Authorization");
                const nlohmann::json reply = {
                    {"choices",
                     {{{"message",
                        {{"role", "assistant"},
                         {"content", g1_judge_replies()[0]}}}}}}};
                response.set_content(reply.dump(), "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&]() { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpTransport::Options options;
  options.bearer_token = "sesame";
  HttpTransport transport(options);

  JudgeRequest request;
  request.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  request.model = "judge-model";
  request.prompt = "evaluate the rubric items";
  request.temperature = 0.0;
  request.max_tokens = 512;
  const std::string reply = transport.complete(request, 0);
  CHECK(parse_rubric_verdicts(reply) == g1_verdicts()[0]);

  CHECK(captured_body["model"] == "judge-model");
  CHECK(captured_body["temperature"] == 0.0);
  CHECK(captured_body["max_tokens"] == 512);
  REQUIRE(captured_body["messages"].size() == 1);
  CHECK(captured_body["messages"][0]["role"] == "user");
  CHECK(captured_body["messages"][0]["content"] == "evaluate the rubric items");
  CHECK(captured_auth == "Bearer sesame");

  server.stop();
  server_thread.join();
}

TEST_CASE("http transport surfaces server errors as transport errors") {
  httplib::Server server;
  server.Post("/judge", [](const httplib::Request&, httplib::Response& response) {
    response.status = 500;
    response.set_content("overloaded", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&]() { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpTransport transport;
  JudgeRequest request;
  request.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/judge";
  CHECK_THROWS_AS(transport.complete(request, 0), TransportError);

  request.endpoint = "missing-scheme";
  CHECK_THROWS_AS(transport.complete(request, 0), TransportError);

  server.stop();
  server_thread.join();
}

TEST_CASE("trajectory verification is the accuracy comparator") {
  CHECK(verify_trajectory(make_rollout("### Step 1: s \\boxed{37}", "37"), "37") ==
        TrajectoryLabel::kCorrect);
  CHECK(verify_trajectory(make_rollout("no answer at all", "37"), "37") ==
        TrajectoryLabel::kFlawed);
  CHECK(verify_trajectory(make_rollout("\\boxed{25/12}", "25/12"), "25/12") ==
        TrajectoryLabel::kCorrect);
  CHECK(verify_trajectory(make_rollout("\\boxed{\\frac{25}{12}}", "25/12"), "25/12") ==
        TrajectoryLabel::kCorrect);
}
