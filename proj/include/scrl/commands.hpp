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


// Subcommand bodies shared by the C API and the command-line tool. Each
// takes a resolved AppConfig, writes its output file ("-" is stdout) and
// returns a one-line summary. Failures throw scrl::Error.

#ifndef SCRL_COMMANDS_HPP_
#define SCRL_COMMANDS_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include "scrl/bank.hpp"
#include "scrl/config.hpp"

namespace scrl {

GeneratorConfig generator_config(const AppConfig& cfg);

// Writes the successful entries, then throws when any problem failed
// (network class if any failure was a network failure).
std::string cmd_bank_generate(const AppConfig& cfg, const std::string& problems_path,
                              const std::string& out_path,
                              std::shared_ptr<HttpTransport> transport = nullptr);

// Lists every bad line in the thrown error; strict stops at the first.
std::string cmd_bank_validate(const AppConfig& cfg, const std::string& bank_path, bool strict);

// Toy training on bank_size random chain tasks, or on one dead-zone
// instance built from delta, p_star, k, modulus, group_size and seed.
std::string cmd_train_toy(const AppConfig& cfg, bool dead_zone, const std::string& trace_path);

// Single instance at delta: JSON report. Sweep: CSV over deltas x seeds.
std::string cmd_egim(const AppConfig& cfg, bool sweep, const std::string& out_path);

// Writes results for the good records, then throws listing the bad lines.
std::string cmd_credit(const AppConfig& cfg, const std::string& in_path,
                       const std::string& out_path);

// Empty ks selects the default grid (cells with k > n left blank). An
// explicit k larger than some record's n is a validation error.
std::string cmd_passk(const AppConfig& cfg, const std::string& in_path,
                      const std::string& out_path, std::span<const std::size_t> ks);

}  // namespace scrl

#endif  // SCRL_COMMANDS_HPP_
