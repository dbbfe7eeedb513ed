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


// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scrl/scrl.h"

using doctest::Approx;

namespace {

const std::string kData = SCRL_TEST_DATA_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string take(char* s) {
  std::string out = s ? s : "";
  scrl_string_free(s);
  return out;
}

struct Config {
  scrl_config* p = nullptr;
  Config() { REQUIRE(scrl_config_new(&p) == SCRL_OK); }
  ~Config() { scrl_config_free(p); }
};

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(scrl_status_name(SCRL_OK)) == "ok");
  CHECK(std::string(scrl_status_name(SCRL_ERR_CONSTRUCTION)) == "construction");
  CHECK(std::strlen(scrl_version()) > 0);
  double out = 0;
  CHECK(scrl_pass_at_k(4, 2, 2, nullptr) == SCRL_ERR_CONTRACT);
  CHECK(std::string(scrl_last_error()).find("NULL") != std::string::npos);
  CHECK(scrl_pass_at_k(4, 2, 2, &out) == SCRL_OK);
  CHECK(std::string(scrl_last_error()).empty());
  CHECK(scrl_pass_at_k(4, 2, 5, &out) == SCRL_ERR_CONTRACT);
}

TEST_CASE("last error is per thread") {
  double out = 0;
  CHECK(scrl_pass_at_k(4, 2, 9, &out) != SCRL_OK);
  std::string other;
  std::thread t([&] {
    double v = 0;
    scrl_pass_at_k(4, 2, 2, &v);
    other = scrl_last_error();
  });
  t.join();
  CHECK(other.empty());
  CHECK_FALSE(std::string(scrl_last_error()).empty());
}

TEST_CASE("config through the C interface") {
  Config cfg;
  const char* v = nullptr;
  REQUIRE(scrl_config_get(cfg.p, "group_size", &v) == SCRL_OK);
  CHECK(std::string(v) == "8");
  CHECK(scrl_config_set(cfg.p, "group-size", "6") == SCRL_OK);
  REQUIRE(scrl_config_get(cfg.p, "group_size", &v) == SCRL_OK);
  CHECK(std::string(v) == "6");
  CHECK(scrl_config_set(cfg.p, "no_such_key", "1") == SCRL_ERR_VALIDATION);
  CHECK(scrl_config_get(cfg.p, "no_such_key", &v) == SCRL_ERR_VALIDATION);
  CHECK(scrl_config_set(cfg.p, "eps_low", "3") == SCRL_OK);
  CHECK(scrl_config_set(cfg.p, "steps", "-1") == SCRL_OK);
  CHECK(scrl_config_resolve(cfg.p) == SCRL_ERR_VALIDATION);
  const std::string e = scrl_last_error();
  CHECK(e.find("eps_low") != std::string::npos);
  CHECK(e.find("steps") != std::string::npos);
  CHECK(scrl_config_load_file(cfg.p, "/nonexistent.cfg") == SCRL_ERR_IO);

  // Commands refuse an unresolved config.
  CHECK(scrl_cmd_bank_validate(cfg.p, (kData + "/data/bank.jsonl").c_str(), 0, nullptr) ==
        SCRL_ERR_CONTRACT);

  CHECK(scrl_config_key_count() > 20);
  const char *name, *def, *help, *choices;
  bool saw_algo = false;
  for (size_t i = 0; i < scrl_config_key_count(); ++i) {
    REQUIRE(scrl_config_key_info(i, &name, &def, &help, &choices) == SCRL_OK);
    CHECK(std::strlen(help) > 0);
    if (std::string(name) == "algo") {
      saw_algo = true;
      CHECK(std::string(choices) == "grpo|scrl");
    }
  }
  CHECK(saw_algo);
  CHECK(scrl_config_key_info(scrl_config_key_count(), &name, nullptr, nullptr, nullptr) ==
        SCRL_ERR_CONTRACT);
  char* dump = nullptr;
  REQUIRE(scrl_config_dump(cfg.p, &dump) == SCRL_OK);
  CHECK(take(dump).find("group_size = 6  # flag") != std::string::npos);
}

TEST_CASE("progress correction and normalization") {
  const int raw[] = {1, 1, 0, 1};
  int corrected[4];
  size_t progress = 9;
  REQUIRE(scrl_progress_correct(raw, 4, 1, corrected, &progress) == SCRL_OK);
  CHECK(std::vector<int>(corrected, corrected + 4) == std::vector<int>{1, 1, 0, 0});
  CHECK(progress == 2);
  REQUIRE(scrl_progress_correct(raw, 4, 0, corrected, &progress) == SCRL_OK);
  CHECK(progress == 0);
  const int bad[] = {2};
  CHECK(scrl_progress_correct(bad, 1, 1, corrected, &progress) == SCRL_ERR_CONTRACT);

  const double v[] = {1, 0, 0, 0};
  double a[4];
  REQUIRE(scrl_normalize_group(v, 4, a) == SCRL_OK);
  CHECK(a[0] == Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(a[1] == Approx(-1 / std::sqrt(3.0)).epsilon(1e-15));

  // Rows (1,1,0,0), (1,0,0,0): column 1 degenerate, column 2 split.
  const int rewards[] = {1, 1, 0, 0, 1, 0, 0, 0};
  double adv[8];
  REQUIRE(scrl_subproblem_normalize(rewards, 2, 4, adv) == SCRL_OK);
  CHECK(adv[0] == 0.0);
  CHECK(adv[1] == Approx(1.0));
  CHECK(adv[5] == Approx(-1.0));
  CHECK(adv[3] == 0.0);
  const int not_prefix[] = {0, 1, 1, 1};
  CHECK(scrl_subproblem_normalize(not_prefix, 2, 2, adv) != SCRL_OK);
}

TEST_CASE("pass@k and clipping") {
  double p = 0;
  REQUIRE(scrl_pass_at_k(4, 2, 2, &p) == SCRL_OK);
  CHECK(p == Approx(5.0 / 6.0).epsilon(1e-15));
  double t = 0;
  REQUIRE(scrl_clipped_token_term(1.5, 1.0, 0.2, 0.2, &t) == SCRL_OK);
  CHECK(t == Approx(1.2));
  REQUIRE(scrl_clipped_token_term(0.5, -1.0, 0.2, 0.2, &t) == SCRL_OK);
  CHECK(t == Approx(-0.8));
  CHECK(scrl_clipped_token_term(1.0, 1.0, 0.0, 0.2, &t) == SCRL_ERR_CONTRACT);
}

TEST_CASE("scoring a tagged response") {
  const char* truths[] = {"3", "1/2"};
  int rewards[2], wf = -1;
  REQUIRE(scrl_score_response("<p1>\\boxed{3}</p1><p2>\\boxed{0.5}</p2>", 2, truths, "numeric",
                              rewards, &wf) == SCRL_OK);
  CHECK(wf == 1);
  CHECK(rewards[0] == 1);
  CHECK(rewards[1] == 1);
  REQUIRE(scrl_score_response("<p1>\\boxed{3}</p1><p2>\\boxed{0.5}</p2>", 2, truths, "exact",
                              rewards, &wf) == SCRL_OK);
  CHECK(rewards[1] == 0);
  REQUIRE(scrl_score_response("<p2>\\boxed{3}</p2>", 2, truths, nullptr, rewards, &wf) == SCRL_OK);
  CHECK(wf == 0);
  CHECK(rewards[0] == 0);
  CHECK(scrl_score_response("x", 2, truths, "fuzzy", rewards, &wf) == SCRL_ERR_VALIDATION);
}

TEST_CASE("prompt rendering matches the golden files") {
  const std::string problems = slurp(kData + "/data/problems.jsonl");
  // Statement and subproblems recovered from the fixture bank line.
  const std::string reply = slurp(kData + "/data/generator/triangle-bounce-2009.json");
  const std::string golden = slurp(kData + "/golden/curriculum_k4.txt");
  std::vector<std::string> subs;
  std::istringstream lines(golden);
  std::string line, statement;
  while (std::getline(lines, line)) {
    if (line.rfind("Problem Statement: ", 0) == 0) statement = line.substr(19);
    if (line.rfind("Problem", 0) == 0 && line.size() > 9 && line[7] >= '1' && line[7] <= '9') {
      subs.push_back(line.substr(line.find(": ") + 2));
    }
  }
  REQUIRE(subs.size() == 4);
  std::vector<const char*> ptrs;
  for (const auto& s : subs) ptrs.push_back(s.c_str());
  char* out = nullptr;
  REQUIRE(scrl_render_curriculum_prompt(statement.c_str(), ptrs.data(), 4, &out) == SCRL_OK);
  CHECK(take(out) == golden);
  REQUIRE(scrl_render_original_prompt(statement.c_str(), &out) == SCRL_OK);
  CHECK(take(out) == slurp(kData + "/golden/original.txt"));
  CHECK(problems.find(statement) != std::string::npos);
  CHECK(reply.find("\"502\"") != std::string::npos);
}

TEST_CASE("schema validation reports kind and path") {
  int kind = -1;
  char* path = nullptr;
  const std::string reply = slurp(kData + "/data/generator/triangle-bounce-2009.json");
  CHECK(scrl_validate_subproblem_json(reply.c_str(), "502", 4, &kind, &path) == SCRL_OK);
  CHECK(kind == -1);
  CHECK(path == nullptr);
  CHECK(scrl_validate_subproblem_json(reply.c_str(), "6", 4, &kind, &path) == SCRL_ERR_VALIDATION);
  CHECK(std::string(scrl_schema_error_name(kind)) == "final_answer_mismatch");
  CHECK(take(path) == "/question_4/ground_truth");
  path = nullptr;
  CHECK(scrl_validate_subproblem_json("{\"question_1\": {}}", "1", 2, &kind, &path) ==
        SCRL_ERR_VALIDATION);
  CHECK(std::string(scrl_schema_error_name(kind)) == "missing_question");
  CHECK(take(path) == "/question_2");
  CHECK(std::string(scrl_schema_error_name(99)) == "unknown");
  CHECK(scrl_validate_subproblem_json("{}", "1", 1, &kind, nullptr) == SCRL_ERR_CONTRACT);
}

TEST_CASE("toy dead-zone handle") {
  scrl_toy* toy = nullptr;
  REQUIRE(scrl_toy_dead_zone(0.001, 0.4, 2, 7, 8, 0, &toy) == SCRL_OK);
  double p = 1;
  REQUIRE(scrl_toy_solve_probability(toy, &p) == SCRL_OK);
  CHECK(p < 0.001);
  double pc[2];
  REQUIRE(scrl_toy_curriculum_probabilities(toy, pc, 2) == SCRL_OK);
  CHECK(pc[0] >= 0.4);
  CHECK(pc[0] <= 0.6);
  CHECK(scrl_toy_curriculum_probabilities(toy, pc, 3) == SCRL_ERR_CONTRACT);
  double g_grpo = 0, g_scrl = 0;
  REQUIRE(scrl_toy_expected_gradient_norm(toy, "grpo", 8, 0.6, &g_grpo) == SCRL_OK);
  REQUIRE(scrl_toy_expected_gradient_norm(toy, "scrl", 8, 0.6, &g_scrl) == SCRL_OK);
  CHECK(g_scrl > 100 * g_grpo);
  CHECK(scrl_toy_expected_gradient_norm(toy, "ppo", 8, 0.6, &g_scrl) == SCRL_ERR_VALIDATION);
  scrl_toy_free(toy);
  CHECK(scrl_toy_dead_zone(0.5, 0.4, 2, 7, 8, 0, &toy) == SCRL_ERR_CONTRACT);
  CHECK(scrl_toy_dead_zone(0.001, 0.5, 3, 7, 8, 0, &toy) == SCRL_ERR_CONSTRUCTION);
}

TEST_CASE("commands through the C interface") {
  Config cfg;
  REQUIRE(scrl_config_resolve(cfg.p) == SCRL_OK);
  char* summary = nullptr;
  REQUIRE(scrl_cmd_bank_validate(cfg.p, (kData + "/data/bank.jsonl").c_str(), 1, &summary) == SCRL_OK);
  CHECK(take(summary).find("1 entries, K = 4") != std::string::npos);
  CHECK(scrl_cmd_bank_validate(cfg.p, "/nonexistent.jsonl", 0, nullptr) == SCRL_ERR_IO);

  const auto dir = std::filesystem::temp_directory_path() / "scrl_capi";
  std::filesystem::create_directories(dir);
  const std::string in = (dir / "pk.jsonl").string(), out = (dir / "pk.csv").string();
  std::ofstream(in) << "{\"problem_id\": \"a\", \"n\": 4, \"c\": 2}\n";
  const size_t ks[] = {2};
  REQUIRE(scrl_cmd_passk(cfg.p, in.c_str(), out.c_str(), ks, 1, nullptr) == SCRL_OK);
  CHECK(slurp(out) == "problem_id,n,c,pass@2\na,4,2,0.833333\nmean,,,0.833333\n");
  const size_t too_big[] = {5};
  CHECK(scrl_cmd_passk(cfg.p, in.c_str(), out.c_str(), too_big, 1, nullptr) == SCRL_ERR_VALIDATION);
  CHECK(scrl_cmd_passk(cfg.p, in.c_str(), out.c_str(), nullptr, 1, nullptr) == SCRL_ERR_CONTRACT);

  Config small;
  scrl_config_set(small.p, "steps", "3");
  scrl_config_set(small.p, "bank_size", "2");
  REQUIRE(scrl_config_resolve(small.p) == SCRL_OK);
  const std::string trace = (dir / "trace.csv").string();
  REQUIRE(scrl_cmd_train_toy(small.p, 0, trace.c_str(), &summary) == SCRL_OK);
  CHECK(take(summary).find("scrl: 3 steps") == 0);
  const std::string csv = slurp(trace);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  std::filesystem::remove_all(dir);
}
