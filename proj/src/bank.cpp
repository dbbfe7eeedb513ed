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


#include "scrl/bank.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "scrl/verification.hpp"

namespace scrl {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kSystemLine =
    "Please reason step by step, and put your final answer within \\boxed{}.";

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

[[noreturn]] void schema_fail(SchemaErrorKind kind, std::string path, const std::string& what) {
  std::string message = std::string(schema_error_name(kind)) + ": " + what;
  if (!path.empty()) message += " (at " + path + ")";
  throw SchemaError(kind, std::move(path), message);
}

std::string question_key(std::size_t j) { return "question_" + std::to_string(j); }

// Parses while watching for repeated keys in any object; the first
// repetition is reported with its JSON pointer.
json parse_checked(std::string_view text) {
  struct Frame {
    bool is_object = false;
    std::set<std::string> keys;
    std::string current;
  };
  std::vector<Frame> stack;
  std::string duplicate;
  auto pointer = [&](const std::string& last) {
    std::string p;
    for (const Frame& f : stack)
      if (f.is_object && &f != &stack.back()) p += "/" + f.current;
    return p + "/" + last;
  };
  json::parser_callback_t cb = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start: stack.push_back({true, {}, {}}); break;
      case json::parse_event_t::array_start: stack.push_back({false, {}, {}}); break;
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        if (!stack.empty()) stack.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        Frame& top = stack.back();
        if (!top.keys.insert(key).second && duplicate.empty()) duplicate = pointer(key);
        top.current = key;
        break;
      }
      default: break;
    }
    return true;
  };
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), cb);
  } catch (const json::exception& e) {
    schema_fail(SchemaErrorKind::kParse, "", e.what());
  }
  if (!doc.is_object()) schema_fail(SchemaErrorKind::kNotObject, "", "top level must be an object");
  if (!duplicate.empty()) schema_fail(SchemaErrorKind::kDuplicateKey, duplicate, "key appears twice");
  return doc;
}

void check_final_answer(const std::string& ground_truth, const ProblemRecord& problem,
                        const std::string& path) {
  if (!numeric_equivalent(ground_truth, problem.final_answer)) {
    schema_fail(SchemaErrorKind::kFinalAnswerMismatch, path,
                "last ground truth '" + ground_truth + "' is not equivalent to the final answer '" +
                    problem.final_answer + "'");
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const json& field(const json& obj, const char* name, json::value_t type, const std::string& where) {
  if (!obj.contains(name)) fail(ErrorCode::kValidation, where + ": missing field '" + name + "'");
  const json& v = obj.at(name);
  if (v.type() != type) fail(ErrorCode::kValidation, where + ": field '" + name + "' has the wrong type");
  return v;
}

ProblemRecord problem_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::kValidation, where + ": problem must be an object");
  ProblemRecord p;
  p.id = field(j, "id", json::value_t::string, where).get<std::string>();
  p.statement = field(j, "statement", json::value_t::string, where).get<std::string>();
  p.final_answer = field(j, "final_answer", json::value_t::string, where).get<std::string>();
  p.reference_solution = j.contains("reference_solution")
                             ? field(j, "reference_solution", json::value_t::string, where).get<std::string>()
                             : std::string();
  if (blank(p.id)) fail(ErrorCode::kValidation, where + ": empty problem id");
  return p;
}

ordered_json problem_to_json(const ProblemRecord& p) {
  ordered_json j;
  j["id"] = p.id;
  j["statement"] = p.statement;
  j["final_answer"] = p.final_answer;
  j["reference_solution"] = p.reference_solution;
  return j;
}

BankEntry entry_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::kValidation, where + ": entry must be an object");
  static const std::set<std::string> known = {"problem", "k", "subproblems", "generator_id",
                                              "created_at"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::kValidation, where + ": unexpected field '" + key + "'");
  }
  BankEntry e;
  e.problem = problem_from_json(field(j, "problem", json::value_t::object, where), where);
  const json& k = j.at("k");
  if (!k.is_number_unsigned()) fail(ErrorCode::kValidation, where + ": field 'k' must be a positive integer");
  for (const json& s : field(j, "subproblems", json::value_t::array, where)) {
    if (!s.is_object()) fail(ErrorCode::kValidation, where + ": subproblem must be an object");
    e.subproblems.items.push_back(
        {field(s, "statement", json::value_t::string, where).get<std::string>(),
         field(s, "ground_truth", json::value_t::string, where).get<std::string>()});
  }
  if (k.get<std::size_t>() != e.subproblems.size()) {
    fail(ErrorCode::kValidation, where + ": 'k' disagrees with the number of subproblems");
  }
  e.generator_id = field(j, "generator_id", json::value_t::string, where).get<std::string>();
  e.created_at = field(j, "created_at", json::value_t::string, where).get<std::string>();
  return e;
}

}  // namespace

std::string_view schema_error_name(SchemaErrorKind kind) {
  switch (kind) {
    case SchemaErrorKind::kEmptyDocument: return "empty_document";
    case SchemaErrorKind::kParse: return "parse_error";
    case SchemaErrorKind::kNotObject: return "not_object";
    case SchemaErrorKind::kDuplicateKey: return "duplicate_key";
    case SchemaErrorKind::kMissingQuestion: return "missing_question";
    case SchemaErrorKind::kUnexpectedKey: return "unexpected_key";
    case SchemaErrorKind::kQuestionNotObject: return "question_not_object";
    case SchemaErrorKind::kMissingField: return "missing_field";
    case SchemaErrorKind::kFieldNotString: return "field_not_string";
    case SchemaErrorKind::kEmptyField: return "empty_field";
    case SchemaErrorKind::kUnexpectedField: return "unexpected_field";
    case SchemaErrorKind::kFinalAnswerMismatch: return "final_answer_mismatch";
  }
  return "unknown";
}

SchemaError::SchemaError(SchemaErrorKind kind, std::string path, const std::string& message)
    : Error(ErrorCode::kValidation, message), kind_(kind), path_(std::move(path)) {}

SubproblemSet validate_subproblem_json(std::string_view text, const ProblemRecord& problem,
                                       std::size_t k) {
  require(k >= 2, "validate_subproblem_json: K must be at least 2");
  if (blank(text)) schema_fail(SchemaErrorKind::kEmptyDocument, "", "reply is empty");
  const json doc = parse_checked(text);

  for (std::size_t j = 1; j <= k; ++j) {
    if (!doc.contains(question_key(j))) {
      schema_fail(SchemaErrorKind::kMissingQuestion, "/" + question_key(j),
                  "missing key \"" + question_key(j) + "\"");
    }
  }
  for (const auto& [key, value] : doc.items()) {
    bool expected = false;
    for (std::size_t j = 1; j <= k && !expected; ++j) expected = key == question_key(j);
    if (!expected) schema_fail(SchemaErrorKind::kUnexpectedKey, "/" + key, "unexpected key \"" + key + "\"");
  }

  SubproblemSet set;
  for (std::size_t j = 1; j <= k; ++j) {
    const std::string path = "/" + question_key(j);
    const json& q = doc.at(question_key(j));
    if (!q.is_object()) schema_fail(SchemaErrorKind::kQuestionNotObject, path, "question must be an object");
    Subproblem item;
    for (const char* name : {"statement", "ground_truth"}) {
      const std::string fpath = path + "/" + name;
      if (!q.contains(name)) schema_fail(SchemaErrorKind::kMissingField, fpath, "missing field");
      if (!q.at(name).is_string()) schema_fail(SchemaErrorKind::kFieldNotString, fpath, "must be a string");
      const std::string value = q.at(name).get<std::string>();
      if (blank(value)) schema_fail(SchemaErrorKind::kEmptyField, fpath, "must not be empty");
      (std::string_view(name) == "statement" ? item.statement : item.ground_truth) = value;
    }
    for (const auto& [key, value] : q.items()) {
      if (key != "statement" && key != "ground_truth") {
        schema_fail(SchemaErrorKind::kUnexpectedField, path + "/" + key, "unexpected field");
      }
    }
    set.items.push_back(std::move(item));
  }
  check_final_answer(set.items.back().ground_truth, problem,
                     "/" + question_key(k) + "/ground_truth");
  return set;
}

void validate_entry(const BankEntry& entry) {
  const auto& items = entry.subproblems.items;
  if (blank(entry.problem.id)) schema_fail(SchemaErrorKind::kEmptyField, "/problem/id", "must not be empty");
  if (items.size() < 2) {
    schema_fail(SchemaErrorKind::kMissingQuestion, "/subproblems",
                "at least 2 subproblems are required, got " + std::to_string(items.size()));
  }
  for (std::size_t j = 0; j < items.size(); ++j) {
    const std::string path = "/subproblems/" + std::to_string(j);
    if (blank(items[j].statement)) schema_fail(SchemaErrorKind::kEmptyField, path + "/statement", "must not be empty");
    if (blank(items[j].ground_truth)) schema_fail(SchemaErrorKind::kEmptyField, path + "/ground_truth", "must not be empty");
  }
  check_final_answer(items.back().ground_truth, entry.problem,
                     "/subproblems/" + std::to_string(items.size() - 1) + "/ground_truth");
}

std::string render_curriculum_prompt(const ProblemRecord& problem, const SubproblemSet& subs) {
  const std::size_t k = subs.size();
  const std::string ks = std::to_string(k);
  std::string out;
  out += "<|im_start|>system\n";
  out += kSystemLine;
  out += "<|im_end|>\n<|im_start|>user\n";
  out += "Problem Statement: " + problem.statement + "\n";
  for (std::size_t j = 0; j < k; ++j) {
    out += "Problem" + std::to_string(j + 1) + ": " + subs.items[j].statement + "\n";
  }
  out += "\nThis task has " + ks + " problems.\n";
  out += "Please solve Problem 1 to Problem " + ks + " in order.\n";
  out += "Output MUST contain exactly " + ks + " blocks in this order:\n";
  for (std::size_t j = 1; j <= k; ++j) {
    out += "<p" + std::to_string(j) + "></p" + std::to_string(j) + ">\n";
  }
  out += "For each block <pN>...</pN>, include reasoning and end with final answer in "
         "\\boxed{answer}.<|im_end|>\n";
  out += "<|im_start|>assistant\n";
  return out;
}

std::string render_original_prompt(const ProblemRecord& problem) {
  std::string out = "<|im_start|>system\n";
  out += kSystemLine;
  out += "<|im_end|>\n<|im_start|>user\n";
  out += problem.statement;
  out += "<|im_end|>\n<|im_start|>assistant\n";
  return out;
}

std::string generation_system_message(std::size_t k) {
  require(k >= 2, "generation prompt needs K >= 2");
  auto q = [](std::size_t j) { return "q_" + std::to_string(j); };
  auto joined = [&](std::size_t from, std::size_t to, std::string_view sep) {
    std::string s;
    for (std::size_t j = from; j <= to; ++j) {
      if (j > from) s += sep;
      s += q(j);
    }
    return s;
  };
  // The informed/informing ranges are q_2..q_{K-1} and q_1..q_{K-2} for
  // K = 4; they clamp to one question each for smaller K.
  const std::size_t informed_end = std::max<std::size_t>(2, k - 1);
  const std::size_t informing_end = informed_end - 1;

  std::string out = "You are a math curriculum designer for RL training. Generate exactly " +
                    std::to_string(k) + " progressive subproblems " + joined(1, k, ", ") + ".\n\n";
  out += "Hard constraints:\n";
  out += "1. " + q(k) + " must be equivalent to the original final question and same grading target.\n";
  out += "2. Difficulty strictly increases: " + joined(1, k, " < ") + ".\n";
  out += "3. " + joined(2, informed_end, "/") + " should be naturally informed by " +
         joined(1, informing_end, "/") + ", but each question must be self-contained.\n";
  out += "4. Each question must have a single clean numerical-expression ground_truth.\n";
  out += "5. Avoid open-ended proof/explanation-only questions.\n";
  out += "6. Use reference_solution to design the progressive dependency and correctness.\n\n";
  out += "Output JSON only.";
  return out;
}

std::string generation_user_message(const ProblemRecord& problem, std::size_t k) {
  require(k >= 2, "generation prompt needs K >= 2");
  std::string out = "Given the original problem and final answer, generate JSON with schema:\n{\n";
  for (std::size_t j = 1; j <= k; ++j) {
    out += "  \"" + question_key(j) + "\": {\"statement\": \"...\", \"ground_truth\": \"...\"}";
    out += j < k ? ",\n" : "\n";
  }
  out += "}\n\n";
  out += "Original Problem: " + problem.statement + "\n";
  out += "Original Final Answer: " + problem.final_answer + "\n";
  out += "Reference Solution: " + problem.reference_solution;
  return out;
}

// --- generation ---------------------------------------------------------

FixtureClient::FixtureClient(std::string directory) : directory_(std::move(directory)) {}

std::string FixtureClient::complete(const ChatRequest& request) {
  const std::string path = directory_ + "/" + request.problem_id + ".json";
  const std::string text = read_file(path);
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_array() && !doc.empty() &&
      std::all_of(doc.begin(), doc.end(), [](const json& v) { return v.is_string(); })) {
    const std::size_t i = std::min(request.attempt, doc.size() - 1);
    return doc[i].get<std::string>();
  }
  return text;
}

HttpGeneratorClient::HttpGeneratorClient(GeneratorConfig config,
                                         std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  require(transport_ != nullptr, "HTTP generator needs a transport");
}

std::string HttpGeneratorClient::complete(const ChatRequest& request) {
  ordered_json body;
  body["model"] = config_.model;
  body["messages"] = ordered_json::array({{{"role", "system"}, {"content", request.system}},
                                          {{"role", "user"}, {"content", request.user}}});
  body["temperature"] = 0;
  std::map<std::string, std::string> headers = {{"Content-Type", "application/json"}};
  if (!config_.api_key.empty()) headers["Authorization"] = "Bearer " + config_.api_key;

  const HttpResponse res = transport_->post(config_.endpoint, headers, body.dump(),
                                            config_.timeout_seconds);
  if (res.status < 200 || res.status >= 300) {
    fail(ErrorCode::kNetwork, "generator endpoint returned HTTP " + std::to_string(res.status));
  }
  const json reply = json::parse(res.body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
      reply["choices"].empty()) {
    fail(ErrorCode::kNetwork, "generator endpoint sent a malformed completion response");
  }
  const json& message = reply["choices"][0]["message"];
  if (!message.is_object() || !message.contains("content") || !message["content"].is_string()) {
    fail(ErrorCode::kNetwork, "generator response has no message content");
  }
  return message["content"].get<std::string>();
}

std::unique_ptr<GeneratorClient> make_generator(const GeneratorConfig& config,
                                                std::shared_ptr<HttpTransport> transport) {
  if (!config.fixture_dir.empty()) return std::make_unique<FixtureClient>(config.fixture_dir);
  if (!transport) transport = make_default_transport();
  return std::make_unique<HttpGeneratorClient>(config, std::move(transport));
}

std::string_view generation_failure_name(GenerationFailure kind) {
  switch (kind) {
    case GenerationFailure::kNetwork: return "network";
    case GenerationFailure::kSchema: return "schema";
    case GenerationFailure::kExhausted: return "retries_exhausted";
  }
  return "unknown";
}

GenerationError::GenerationError(GenerationFailure kind, const std::string& message)
    : Error(kind == GenerationFailure::kSchema ? ErrorCode::kValidation : ErrorCode::kNetwork,
            message),
      kind_(kind) {}

SubproblemSet generate_subproblems(GeneratorClient& client, const ProblemRecord& problem,
                                   std::size_t k, std::size_t max_retries) {
  ChatRequest request;
  request.problem_id = problem.id;
  request.system = generation_system_message(k);
  const std::string base_user = generation_user_message(problem, k);

  std::size_t network_failures = 0, schema_failures = 0;
  std::string feedback, last_error;
  for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
    request.attempt = attempt;
    request.user = base_user;
    if (!feedback.empty()) {
      request.user += "\n\nYour previous reply was rejected: " + feedback +
                      ". Output JSON only, following the schema exactly.";
    }
    std::string reply;
    try {
      reply = client.complete(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNetwork) throw;
      ++network_failures;
      last_error = e.what();
      continue;
    }
    try {
      return validate_subproblem_json(reply, problem, k);
    } catch (const SchemaError& e) {
      ++schema_failures;
      feedback = e.what();
      last_error = e.what();
    }
  }
  const std::string tries = std::to_string(max_retries + 1) + " attempt(s)";
  if (schema_failures == 0) {
    throw GenerationError(GenerationFailure::kNetwork,
                          "network failure for '" + problem.id + "' after " + tries + ": " + last_error);
  }
  if (network_failures == 0) {
    throw GenerationError(GenerationFailure::kSchema, "persistent schema violation for '" +
                                                          problem.id + "' after " + tries + ": " +
                                                          last_error);
  }
  throw GenerationError(GenerationFailure::kExhausted,
                        "retries exhausted for '" + problem.id + "' after " + tries + ": " + last_error);
}

BankGeneration generate_bank(GeneratorClient& client, const std::vector<ProblemRecord>& problems,
                             std::size_t k, std::size_t max_retries, std::size_t max_in_flight) {
  const std::size_t n = problems.size();
  std::vector<std::optional<BankEntry>> results(n);
  std::vector<std::string> errors(n);
  std::vector<ErrorCode> codes(n, ErrorCode::kValidation);
  const std::string stamp = client.replay() ? "1970-01-01T00:00:00Z" : utc_now();
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        BankEntry e;
        e.problem = problems[i];
        e.subproblems = generate_subproblems(client, problems[i], k, max_retries);
        e.generator_id = client.id();
        e.created_at = stamp;
        results[i] = std::move(e);
      } catch (const Error& err) {
        errors[i] = err.what();
        codes[i] = err.code();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(max_in_flight, n));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  BankGeneration out;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) {
      out.entries.push_back(std::move(*results[i]));
    } else {
      out.failures.push_back({problems[i].id, errors[i], codes[i]});
    }
  }
  return out;
}

// --- persistence --------------------------------------------------------

std::vector<ProblemRecord> read_problems(std::istream& in) {
  std::vector<ProblemRecord> out;
  std::set<std::string> ids;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (blank(line)) continue;
    const std::string where = "line " + std::to_string(lineno);
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::kValidation, where + ": not valid JSON");
    ProblemRecord p = problem_from_json(j, where);
    if (!ids.insert(p.id).second) fail(ErrorCode::kValidation, where + ": duplicate problem id '" + p.id + "'");
    out.push_back(std::move(p));
  }
  return out;
}

BankLoad load_bank(std::istream& in, bool strict) {
  BankLoad out;
  std::set<std::string> ids;
  std::size_t bank_k = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (blank(line)) continue;
    const std::string where = "line " + std::to_string(lineno);
    try {
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) fail(ErrorCode::kValidation, "not valid JSON");
      BankEntry e = entry_from_json(j, "entry");
      validate_entry(e);
      if (bank_k == 0) bank_k = e.subproblems.size();
      if (e.subproblems.size() != bank_k) {
        fail(ErrorCode::kValidation, "K = " + std::to_string(e.subproblems.size()) +
                                         " differs from the bank's K = " + std::to_string(bank_k));
      }
      if (!ids.insert(e.problem.id).second) {
        fail(ErrorCode::kValidation, "duplicate problem id '" + e.problem.id + "'");
      }
      out.entries.push_back(std::move(e));
    } catch (const Error& err) {
      if (strict) fail(ErrorCode::kValidation, where + ": " + err.what());
      out.errors.emplace_back(lineno, err.what());
    }
  }
  return out;
}

void save_bank(std::ostream& out, const std::vector<BankEntry>& entries) {
  for (const BankEntry& e : entries) {
    ordered_json j;
    j["problem"] = problem_to_json(e.problem);
    j["k"] = e.subproblems.size();
    ordered_json subs = ordered_json::array();
    for (const Subproblem& s : e.subproblems.items) {
      ordered_json item;
      item["statement"] = s.statement;
      item["ground_truth"] = s.ground_truth;
      subs.push_back(std::move(item));
    }
    j["subproblems"] = std::move(subs);
    j["generator_id"] = e.generator_id;
    j["created_at"] = e.created_at;
    out << j.dump() << '\n';
  }
}

BankLoad load_bank_file(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open bank '" + path + "'");
  return load_bank(in, strict);
}

void save_bank_file(const std::string& path, const std::vector<BankEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write bank '" + path + "'");
  save_bank(out, entries);
  if (!out) fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace scrl
