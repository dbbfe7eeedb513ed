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

#ifndef SCRL_ERROR_HPP_
#define SCRL_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace scrl {

// Error classes. The numeric values of the last four match the CLI exit codes.
enum class ErrorCode {
  kContract = 5,      // precondition violated by the caller
  kValidation = 1,    // malformed input data
  kIo = 2,
  kNetwork = 3,
  kConstruction = 4,  // infeasible construction or enumeration cap exceeded
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// Contract check for caller-supplied preconditions.
inline void require(bool condition, std::string_view what) {
  if (!condition) fail(ErrorCode::kContract, std::string(what));
}

}  // namespace scrl

#endif  // SCRL_ERROR_HPP_
