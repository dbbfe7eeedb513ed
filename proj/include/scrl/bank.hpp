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


// Subproblem banks: schema validation, prompt rendering, generation and
// JSON-lines persistence.

#ifndef SCRL_BANK_HPP_
#define SCRL_BANK_HPP_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "scrl/error.hpp"

namespace scrl {

struct ProblemRecord {
  std::string id;
  std::string statement;
  std::string final_answer;
  std::string reference_solution;

  friend bool operator==(const ProblemRecord&, const ProblemRecord&) = default;
};

struct Subproblem {
  std::string statement;
  std::string ground_truth;

  friend bool operator==(const Subproblem&, const Subproblem&) = default;
};

struct SubproblemSet {
  std::vector<Subproblem> items;

  std::size_t size() const { return items.size(); }
  friend bool operator==(const SubproblemSet&, const SubproblemSet&) = default;
};

struct BankEntry {
  ProblemRecord problem;
  SubproblemSet subproblems;
  std::string generator_id;
  std::string created_at;  // ISO 8601, UTC

  friend bool operator==(const BankEntry&, const BankEntry&) = default;
};

// Schema failures of a generator reply. Each kind has a stable name.
enum class SchemaErrorKind {
  kEmptyDocument,
  kParse,
  kNotObject,
  kDuplicateKey,
  kMissingQuestion,
  kUnexpectedKey,
  kQuestionNotObject,
  kMissingField,
  kFieldNotString,
  kEmptyField,
  kUnexpectedField,
  kFinalAnswerMismatch,
};

inline constexpr std::size_t kSchemaErrorKinds = 12;

std::string_view schema_error_name(SchemaErrorKind kind);

// A validation error with its schema kind and a JSON pointer to the
// offending location ("" for the document itself).
class SchemaError : public Error {
 public:
  SchemaError(SchemaErrorKind kind, std::string path, const std::string& message);

  SchemaErrorKind kind() const { return kind_; }
  const std::string& path() const { return path_; }

 private:
  SchemaErrorKind kind_;
  std::string path_;
};

// Parses a reply of the form {"question_1": {"statement", "ground_truth"},
// ..., "question_K": {...}} with no other keys or fields. The last ground
// truth must be answer-equivalent to problem.final_answer. Throws
// SchemaError; a contract error when k < 2.
SubproblemSet validate_subproblem_json(std::string_view text, const ProblemRecord& problem,
                                       std::size_t k);

// Invariants of a stored entry (K >= 2, non-empty fields, final-answer
// equivalence). Throws SchemaError.
void validate_entry(const BankEntry& entry);

// Chat-formatted prompts.
std::string render_curriculum_prompt(const ProblemRecord& problem, const SubproblemSet& subs);
std::string render_original_prompt(const ProblemRecord& problem);

// Generation messages for K subproblems.
std::string generation_system_message(std::size_t k);
std::string generation_user_message(const ProblemRecord& problem, std::size_t k);

// --- generation ---------------------------------------------------------

struct ChatRequest {
  std::string problem_id;
  std::string system;
  std::string user;
  std::size_t attempt = 0;  // 0-based
};

class GeneratorClient {
 public:
  virtual ~GeneratorClient() = default;
  // Reply text. Throws Error(kNetwork) when the service cannot be reached.
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
  virtual bool replay() const { return false; }  // fixture-backed
};

// Canned replies from <dir>/<problem id>.json. A file holding a JSON array
// of strings replays them in attempt order (the last one repeats); any
// other content is the reply itself.
class FixtureClient final : public GeneratorClient {
 public:
  explicit FixtureClient(std::string directory);
  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return "fixture"; }
  bool replay() const override { return true; }

 private:
  std::string directory_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Raw POST. Implementations throw Error(kNetwork) on connection failures.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url,
                            const std::map<std::string, std::string>& headers,
                            const std::string& body, double timeout_seconds) = 0;
};

// cpp-httplib backed transport (http and https).
std::shared_ptr<HttpTransport> make_default_transport();

struct GeneratorConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  double timeout_seconds = 60.0;
  std::size_t max_retries = 3;
  std::string api_key;       // sent as a bearer token when non-empty
  std::string fixture_dir;   // non-empty selects fixture mode
  std::size_t max_in_flight = 4;
};

// Chat-completion client: {"model", "messages": [system, user]} in,
// choices[0].message.content out.
class HttpGeneratorClient final : public GeneratorClient {
 public:
  HttpGeneratorClient(GeneratorConfig config, std::shared_ptr<HttpTransport> transport);
  std::string complete(const ChatRequest& request) override;
  std::string id() const override { return config_.model; }

 private:
  GeneratorConfig config_;
  std::shared_ptr<HttpTransport> transport_;
};

// Fixture client when config.fixture_dir is set (the transport is never
// touched), HTTP client otherwise.
std::unique_ptr<GeneratorClient> make_generator(const GeneratorConfig& config,
                                                std::shared_ptr<HttpTransport> transport);

enum class GenerationFailure { kNetwork, kSchema, kExhausted };

std::string_view generation_failure_name(GenerationFailure kind);

// Terminal generation failure: every attempt hit the network (kNetwork),
// every attempt returned invalid output (kSchema), or a mix (kExhausted).
class GenerationError : public Error {
 public:
  GenerationError(GenerationFailure kind, const std::string& message);
  GenerationFailure kind() const { return kind_; }

 private:
  GenerationFailure kind_;
};

// Sends the generation messages, validates the reply, and on a schema
// failure retries with the error appended to the user message, up to
// max_retries extra attempts.
SubproblemSet generate_subproblems(GeneratorClient& client, const ProblemRecord& problem,
                                   std::size_t k, std::size_t max_retries = 3);

struct GenerationFailureRecord {
  std::string problem_id;
  std::string message;
  ErrorCode code = ErrorCode::kValidation;
};

struct BankGeneration {
  std::vector<BankEntry> entries;  // input order, failures skipped
  std::vector<GenerationFailureRecord> failures;
};

// Generates a bank with at most max_in_flight concurrent requests. Fixture
// clients stamp created_at as the Unix epoch so output is reproducible.
BankGeneration generate_bank(GeneratorClient& client, const std::vector<ProblemRecord>& problems,
                             std::size_t k, std::size_t max_retries, std::size_t max_in_flight);

// --- persistence --------------------------------------------------------

std::vector<ProblemRecord> read_problems(std::istream& in);

struct BankLoad {
  std::vector<BankEntry> entries;
  std::vector<std::pair<std::size_t, std::string>> errors;  // 1-based line
};

// One entry per line. Lenient mode skips bad lines and reports them;
// strict mode throws a validation error naming the first bad line. Every
// entry must share the first valid entry's K, and ids must be unique.
BankLoad load_bank(std::istream& in, bool strict);
void save_bank(std::ostream& out, const std::vector<BankEntry>& entries);

BankLoad load_bank_file(const std::string& path, bool strict);
void save_bank_file(const std::string& path, const std::vector<BankEntry>& entries);

}  // namespace scrl

#endif  // SCRL_BANK_HPP_
