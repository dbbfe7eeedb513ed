// Copyright 2026 The scrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scrl/bank.hpp"

using namespace scrl;
namespace fs = std::filesystem;

namespace {

const std::string kData = SCRL_TEST_DATA_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemRecord ball_problem() {
  std::ifstream in(kData + "/data/problems.jsonl");
  auto problems = read_problems(in);
  REQUIRE(problems.size() == 1);
  return problems[0];
}

SubproblemSet ball_subproblems() {
  return validate_subproblem_json(slurp(kData + "/data/generator/triangle-bounce-2009.json"),
                                  ball_problem(), 4);
}

SchemaError schema_error_of(const std::string& text, std::size_t k = 2,
                            const std::string& answer = "7") {
  ProblemRecord p{"p", "stmt", answer, ""};
  try {
    validate_subproblem_json(text, p, k);
  } catch (const SchemaError& e) {
    return e;
  }
  FAIL("no schema error for: " << text);
  return SchemaError(SchemaErrorKind::kParse, "", "");
}

// Records every call; replies from a queue.
class SpyTransport final : public HttpTransport {
 public:
  std::vector<HttpResponse> replies;
  std::vector<std::string> urls, bodies;
  std::vector<std::map<std::string, std::string>> headers;
  std::size_t calls = 0;

  HttpResponse post(const std::string& url, const std::map<std::string, std::string>& h,
                    const std::string& body, double) override {
    std::lock_guard<std::mutex> lock(mu_);
    urls.push_back(url);
    headers.push_back(h);
    bodies.push_back(body);
    const HttpResponse r = replies.empty() ? HttpResponse{500, ""}
                                           : replies[std::min(calls, replies.size() - 1)];
    ++calls;
    if (r.status == 0) fail(ErrorCode::kNetwork, "connection refused");
    return r;
  }

 private:
  std::mutex mu_;
};

class ScriptedClient final : public GeneratorClient {
 public:
  std::vector<std::string> replies;  // "!net" throws a network error
  std::vector<ChatRequest> seen;
  std::string complete(const ChatRequest& request) override {
    seen.push_back(request);
    const std::string& r = replies[std::min(request.attempt, replies.size() - 1)];
    if (r == "!net") fail(ErrorCode::kNetwork, "timed out");
    return r;
  }
  std::string id() const override { return "scripted"; }
};

std::string completion_body(const std::string& content) {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}});
  return j.dump();
}

const char* kValidK2 =
    R"({"question_1": {"statement": "a", "ground_truth": "3"},
        "question_2": {"statement": "b", "ground_truth": "7"}})";

}  // namespace

TEST_CASE("curriculum and original prompts match the golden renderings byte for byte") {
  const ProblemRecord p = ball_problem();
  CHECK(render_curriculum_prompt(p, ball_subproblems()) == slurp(kData + "/golden/curriculum_k4.txt"));
  CHECK(render_original_prompt(p) == slurp(kData + "/golden/original.txt"));
}

TEST_CASE("curriculum prompt for K = 2") {
  ProblemRecord p{"x", "Find y.", "7", ""};
  SubproblemSet s{{{"Find x.", "3"}, {"Find y.", "7"}}};
  const std::string text = render_curriculum_prompt(p, s);
  CHECK(text.find("Problem1: Find x.\nProblem2: Find y.\n\nThis task has 2 problems.\n") != std::string::npos);
  CHECK(text.find("Please solve Problem 1 to Problem 2 in order.") != std::string::npos);
  CHECK(text.find("<p1></p1>\n<p2></p2>\nFor each block") != std::string::npos);
  CHECK(text.find("Problem3") == std::string::npos);
}

TEST_CASE("generation messages") {
  const std::string sys4 = generation_system_message(4);
  CHECK(sys4.find("Generate exactly 4 progressive subproblems q_1, q_2, q_3, q_4.") != std::string::npos);
  CHECK(sys4.find("1. q_4 must be equivalent") != std::string::npos);
  CHECK(sys4.find("q_1 < q_2 < q_3 < q_4.") != std::string::npos);
  CHECK(sys4.find("3. q_2/q_3 should be naturally informed by q_1/q_2,") != std::string::npos);
  CHECK(sys4.substr(sys4.size() - 17) == "Output JSON only.");
  const std::string sys2 = generation_system_message(2);
  CHECK(sys2.find("3. q_2 should be naturally informed by q_1,") != std::string::npos);
  CHECK(sys2.find("q_1 < q_2.") != std::string::npos);
  CHECK(generation_system_message(3).find("3. q_2 should be naturally informed by q_1,") != std::string::npos);

  const ProblemRecord p = ball_problem();
  const std::string user = generation_user_message(p, 4);
  CHECK(user.find("  \"question_4\": {\"statement\": \"...\", \"ground_truth\": \"...\"}\n}") !=
        std::string::npos);
  CHECK(user.find("Original Final Answer: 502\n") != std::string::npos);
  CHECK(user.find("Reference Solution: " + p.reference_solution) != std::string::npos);
  CHECK_THROWS(generation_system_message(1));
}

TEST_CASE("the fixture reply validates to the expected subproblems") {
  const SubproblemSet s = ball_subproblems();
  REQUIRE(s.size() == 4);
  CHECK(s.items[0].ground_truth == "2(a + b) - 3");
  CHECK(s.items[1].ground_truth == "1007");
  CHECK(s.items[2].ground_truth == "505");
  CHECK(s.items[3].ground_truth == "502");
}

TEST_CASE("every schema error kind is reported with its location") {
  struct Case {
    std::string text;
    SchemaErrorKind kind;
    std::string path;
  };
  const std::vector<Case> cases = {
      {"  \n", SchemaErrorKind::kEmptyDocument, ""},
      {"{\"question_1\": ", SchemaErrorKind::kParse, ""},
      {"[1, 2]", SchemaErrorKind::kNotObject, ""},
      {R"({"question_1": {"statement": "a", "statement": "b", "ground_truth": "3"},
           "question_2": {"statement": "b", "ground_truth": "7"}})",
       SchemaErrorKind::kDuplicateKey, "/question_1/statement"},
      {R"({"question_1": {"statement": "a", "ground_truth": "3"}})", SchemaErrorKind::kMissingQuestion,
       "/question_2"},
      {R"({"question_1": {"statement": "a", "ground_truth": "3"},
           "question_2": {"statement": "b", "ground_truth": "7"}, "notes": "x"})",
       SchemaErrorKind::kUnexpectedKey, "/notes"},
      {R"({"question_1": "a", "question_2": {"statement": "b", "ground_truth": "7"}})",
       SchemaErrorKind::kQuestionNotObject, "/question_1"},
      {R"({"question_1": {"statement": "a"}, "question_2": {"statement": "b", "ground_truth": "7"}})",
       SchemaErrorKind::kMissingField, "/question_1/ground_truth"},
      {R"({"question_1": {"statement": "a", "ground_truth": 3},
           "question_2": {"statement": "b", "ground_truth": "7"}})",
       SchemaErrorKind::kFieldNotString, "/question_1/ground_truth"},
      {R"({"question_1": {"statement": " ", "ground_truth": "3"},
           "question_2": {"statement": "b", "ground_truth": "7"}})",
       SchemaErrorKind::kEmptyField, "/question_1/statement"},
      {R"({"question_1": {"statement": "a", "ground_truth": "3", "hint": "h"},
           "question_2": {"statement": "b", "ground_truth": "7"}})",
       SchemaErrorKind::kUnexpectedField, "/question_1/hint"},
      {R"({"question_1": {"statement": "a", "ground_truth": "3"},
           "question_2": {"statement": "b", "ground_truth": "8"}})",
       SchemaErrorKind::kFinalAnswerMismatch, "/question_2/ground_truth"},
  };
  REQUIRE(cases.size() == kSchemaErrorKinds);
  std::set<std::string> names;
  for (const Case& c : cases) {
    CAPTURE(c.text);
    const SchemaError e = schema_error_of(c.text);
    CHECK(e.kind() == c.kind);
    CHECK(e.path() == c.path);
    CHECK(e.code() == ErrorCode::kValidation);
    CHECK(std::string(e.what()).find(schema_error_name(c.kind)) == 0);
    names.insert(std::string(schema_error_name(c.kind)));
  }
  CHECK(names.size() == kSchemaErrorKinds);
}

TEST_CASE("missing question_3 is named") {
  const std::string text =
      R"({"question_1": {"statement": "a", "ground_truth": "1"},
          "question_2": {"statement": "b", "ground_truth": "2"},
          "question_4": {"statement": "d", "ground_truth": "7"}})";
  const SchemaError e = schema_error_of(text, 4);
  CHECK(e.kind() == SchemaErrorKind::kMissingQuestion);
  CHECK(std::string(e.what()).find("question_3") != std::string::npos);
}

TEST_CASE("a last ground truth of 6 against a final answer of 502 is rejected") {
  nlohmann::json j = nlohmann::json::parse(slurp(kData + "/data/generator/triangle-bounce-2009.json"));
  j["question_4"]["ground_truth"] = "6";
  try {
    validate_subproblem_json(j.dump(), ball_problem(), 4);
    FAIL("accepted");
  } catch (const SchemaError& e) {
    CHECK(e.kind() == SchemaErrorKind::kFinalAnswerMismatch);
    CHECK(std::string(e.what()).find("502") != std::string::npos);
  }
  // Equivalent spellings pass.
  j["question_4"]["ground_truth"] = "502.0";
  CHECK_NOTHROW(validate_subproblem_json(j.dump(), ball_problem(), 4));
  CHECK_THROWS_AS(validate_subproblem_json(j.dump(), ball_problem(), 1), Error);
}

TEST_CASE("retries: malformed twice, then valid") {
  ScriptedClient client;
  client.replies = {"not json", R"({"question_1": {"statement": "a", "ground_truth": "3"}})", kValidK2};
  ProblemRecord p{"p", "stmt", "7", ""};
  const SubproblemSet s = generate_subproblems(client, p, 2, 3);
  CHECK(s.size() == 2);
  REQUIRE(client.seen.size() == 3);
  CHECK(client.seen[0].user.find("previous reply was rejected") == std::string::npos);
  CHECK(client.seen[1].user.find("rejected: parse_error") != std::string::npos);
  CHECK(client.seen[2].user.find("rejected: missing_question") != std::string::npos);
  CHECK(client.seen[2].system == generation_system_message(2));
}

TEST_CASE("retry exhaustion classes") {
  ProblemRecord p{"p", "stmt", "7", ""};
  {
    ScriptedClient client;
    client.replies = {"{}"};
    try {
      generate_subproblems(client, p, 2, 2);
      FAIL("no error");
    } catch (const GenerationError& e) {
      CHECK(e.kind() == GenerationFailure::kSchema);
      CHECK(e.code() == ErrorCode::kValidation);
    }
    CHECK(client.seen.size() == 3);
  }
  {
    ScriptedClient client;
    client.replies = {"!net"};
    try {
      generate_subproblems(client, p, 2, 1);
      FAIL("no error");
    } catch (const GenerationError& e) {
      CHECK(e.kind() == GenerationFailure::kNetwork);
      CHECK(e.code() == ErrorCode::kNetwork);
    }
  }
  {
    ScriptedClient client;
    client.replies = {"!net", "[]"};
    CHECK_THROWS_AS(generate_subproblems(client, p, 2, 1), GenerationError);
    try {
      generate_subproblems(client, p, 2, 1);
    } catch (const GenerationError& e) {
      CHECK(e.kind() == GenerationFailure::kExhausted);
    }
  }
  {
    ScriptedClient client;
    client.replies = {"!net", kValidK2};
    CHECK(generate_subproblems(client, p, 2, 1).size() == 2);
  }
}

TEST_CASE("fixture mode never touches the transport") {
  auto spy = std::make_shared<SpyTransport>();
  GeneratorConfig cfg;
  cfg.fixture_dir = kData + "/data/generator";
  auto client = make_generator(cfg, spy);
  CHECK(client->replay());
  std::ifstream in(kData + "/data/problems.jsonl");
  const BankGeneration g = generate_bank(*client, read_problems(in), 4, 3, 4);
  CHECK(spy->calls == 0);
  REQUIRE(g.entries.size() == 1);
  CHECK(g.failures.empty());
  CHECK(g.entries[0].created_at == "1970-01-01T00:00:00Z");
  std::ostringstream out;
  save_bank(out, g.entries);
  CHECK(out.str() == slurp(kData + "/data/bank.jsonl"));
}

TEST_CASE("fixture sequences replay by attempt") {
  const fs::path dir = fs::temp_directory_path() / "scrl_fixture_seq";
  fs::create_directories(dir);
  nlohmann::json seq = nlohmann::json::array({"oops", kValidK2});
  std::ofstream(dir / "p.json") << seq.dump();
  FixtureClient client(dir.string());
  ProblemRecord p{"p", "stmt", "7", ""};
  CHECK(generate_subproblems(client, p, 2, 1).size() == 2);
  CHECK_THROWS_AS(generate_subproblems(client, p, 2, 0), GenerationError);
  ProblemRecord missing{"absent", "stmt", "7", ""};
  try {
    generate_subproblems(client, missing, 2, 0);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  fs::remove_all(dir);
}

TEST_CASE("HTTP client request shape and response handling") {
  auto spy = std::make_shared<SpyTransport>();
  spy->replies = {{200, completion_body(kValidK2)}};
  GeneratorConfig cfg;
  cfg.endpoint = "http://localhost:9/v1/chat/completions";
  cfg.model = "test-model";
  cfg.api_key = "k123";
  auto client = make_generator(cfg, spy);
  CHECK(client->id() == "test-model");
  ProblemRecord p{"p", "stmt", "7", ""};
  CHECK(generate_subproblems(*client, p, 2, 0).size() == 2);
  REQUIRE(spy->calls == 1);
  CHECK(spy->urls[0] == cfg.endpoint);
  CHECK(spy->headers[0].at("Authorization") == "Bearer k123");
  CHECK(spy->headers[0].at("Content-Type") == "application/json");
  const auto body = nlohmann::json::parse(spy->bodies[0]);
  CHECK(body["model"] == "test-model");
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == generation_system_message(2));
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == generation_user_message(p, 2));

  // 503, then a dropped connection, then success.
  auto flaky = std::make_shared<SpyTransport>();
  flaky->replies = {{503, ""}, {0, ""}, {200, completion_body(kValidK2)}};
  auto client2 = make_generator(cfg, flaky);
  CHECK(generate_subproblems(*client2, p, 2, 2).size() == 2);
  CHECK(flaky->calls == 3);

  auto broken = std::make_shared<SpyTransport>();
  broken->replies = {{200, "{\"choices\": []}"}};
  auto client3 = make_generator(cfg, broken);
  try {
    generate_subproblems(*client3, p, 2, 0);
    FAIL("no error");
  } catch (const GenerationError& e) {
    CHECK(e.kind() == GenerationFailure::kNetwork);
  }
}

TEST_CASE("bank generation keeps input order under concurrency and reports failures") {
  auto spy = std::make_shared<SpyTransport>();
  spy->replies = {{200, completion_body(kValidK2)}};
  GeneratorConfig cfg;
  auto client = make_generator(cfg, spy);
  std::vector<ProblemRecord> problems;
  for (int i = 0; i < 12; ++i) {
    problems.push_back({"p" + std::to_string(i), "stmt", i == 5 ? "9" : "7", ""});
  }
  const BankGeneration g = generate_bank(*client, problems, 2, 0, 4);
  REQUIRE(g.entries.size() == 11);
  REQUIRE(g.failures.size() == 1);
  CHECK(g.failures[0].problem_id == "p5");
  CHECK(g.failures[0].code == ErrorCode::kValidation);
  for (std::size_t i = 0, j = 0; i < problems.size(); ++i) {
    if (i == 5) continue;
    CHECK(g.entries[j++].problem.id == problems[i].id);
  }
  CHECK(g.entries[0].generator_id == "gpt-4o-mini");
  CHECK(g.entries[0].created_at.size() == 20);
}

TEST_CASE("bank round trip is byte-stable") {
  const std::string original = slurp(kData + "/data/bank.jsonl");
  std::istringstream in(original);
  const BankLoad load = load_bank(in, true);
  REQUIRE(load.entries.size() == 1);
  CHECK(load.errors.empty());
  CHECK(load.entries[0].subproblems == ball_subproblems());
  std::ostringstream out;
  save_bank(out, load.entries);
  CHECK(out.str() == original);

  const fs::path path = fs::temp_directory_path() / "scrl_bank_rt.jsonl";
  save_bank_file(path.string(), load.entries);
  CHECK(load_bank_file(path.string(), true).entries == load.entries);
  fs::remove(path);
}

TEST_CASE("lenient and strict loading") {
  const std::string good = slurp(kData + "/data/bank.jsonl");
  nlohmann::ordered_json bad = nlohmann::ordered_json::parse(good);
  bad["problem"]["id"] = "other";
  bad["subproblems"][3]["ground_truth"] = "6";
  nlohmann::ordered_json dup = nlohmann::ordered_json::parse(good);
  const std::string text = good + "{not json\n" + bad.dump() + "\n\n" + dup.dump() + "\n";

  std::istringstream lenient(text);
  const BankLoad load = load_bank(lenient, false);
  CHECK(load.entries.size() == 1);
  REQUIRE(load.errors.size() == 3);
  CHECK(load.errors[0].first == 2);
  CHECK(load.errors[1].first == 3);
  CHECK(load.errors[1].second.find("final_answer_mismatch") != std::string::npos);
  CHECK(load.errors[2].first == 5);
  CHECK(load.errors[2].second.find("duplicate") != std::string::npos);

  std::istringstream strict(text);
  try {
    load_bank(strict, true);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kValidation);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_bank_file("/nonexistent/bank.jsonl", false), Error);
}

TEST_CASE("mixed K is rejected") {
  BankEntry a{{"a", "s", "7", ""}, {{{"x", "3"}, {"y", "7"}}}, "g", "t"};
  BankEntry b{{"b", "s", "7", ""}, {{{"x", "3"}, {"z", "5"}, {"y", "7"}}}, "g", "t"};
  std::ostringstream out;
  save_bank(out, {a, b});
  std::istringstream in(out.str());
  const BankLoad load = load_bank(in, false);
  CHECK(load.entries.size() == 1);
  REQUIRE(load.errors.size() == 1);
  CHECK(load.errors[0].second.find("differs") != std::string::npos);
  std::istringstream in2(out.str());
  CHECK_THROWS_AS(load_bank(in2, true), Error);
}

TEST_CASE("entry fields are checked on load") {
  const std::vector<std::string> lines = {
      R"({"problem":{"id":"a","statement":"s","final_answer":"7"},"k":2,"subproblems":[{"statement":"x","ground_truth":"3"},{"statement":"y","ground_truth":"7"}],"generator_id":"g","created_at":"t","extra":1})",
      R"({"problem":{"id":"a","statement":"s","final_answer":"7"},"k":3,"subproblems":[{"statement":"x","ground_truth":"3"},{"statement":"y","ground_truth":"7"}],"generator_id":"g","created_at":"t"})",
      R"({"problem":{"id":"a","statement":"s","final_answer":"7"},"k":1,"subproblems":[{"statement":"y","ground_truth":"7"}],"generator_id":"g","created_at":"t"})",
      R"({"problem":{"id":"a","statement":"s"},"k":2,"subproblems":[],"generator_id":"g","created_at":"t"})",
  };
  for (const std::string& line : lines) {
    CAPTURE(line);
    std::istringstream in(line + "\n");
    CHECK_THROWS_AS(load_bank(in, true), Error);
  }
  std::istringstream ok(R"({"problem":{"id":"a","statement":"s","final_answer":"7"},"k":2,"subproblems":[{"statement":"x","ground_truth":"3"},{"statement":"y","ground_truth":"7"}],"generator_id":"g","created_at":"t"})");
  CHECK(load_bank(ok, true).entries.size() == 1);
}

TEST_CASE("problem files") {
  std::istringstream dup("{\"id\":\"a\",\"statement\":\"s\",\"final_answer\":\"1\"}\n"
                         "{\"id\":\"a\",\"statement\":\"s\",\"final_answer\":\"1\"}\n");
  CHECK_THROWS_AS(read_problems(dup), Error);
  std::istringstream bad("{\"id\":\"a\"}\n");
  CHECK_THROWS_AS(read_problems(bad), Error);
}
