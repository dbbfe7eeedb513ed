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


#include "scrl/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "scrl/credit.hpp"
#include "scrl/evaluation.hpp"
#include "scrl/random.hpp"
#include "scrl/sweep.hpp"
#include "scrl/toy.hpp"

namespace scrl {
namespace {

void require_resolved(const AppConfig& cfg) {
  require(cfg.resolved(), "configuration must be resolved before running a command");
}

// Runs fn on the named output; "-" is stdout.
template <typename Fn>
void with_output(const std::string& path, Fn fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path + "'");
  fn(out);
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

template <typename Fn>
auto with_input(const std::string& path, Fn fn) {
  if (path == "-") return fn(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read '" + path + "'");
  return fn(in);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

EgimOptions egim_options(const AppConfig& cfg) {
  EgimOptions o;
  o.method = parse_egim_method(cfg.get("egim_method"));
  o.tuple_cap = cfg.get_uint("tuple_cap");
  o.mc_groups = cfg.get_uint("mc_groups");
  o.mc_seed = cfg.get_uint("seed");
  o.enumeration_cap = cfg.get_uint("enumeration_cap");
  o.workers = cfg.get_uint("workers");
  return o;
}

DeadZoneSpec dead_zone_spec(const AppConfig& cfg) {
  DeadZoneSpec s;
  s.delta = cfg.get_real("delta");
  s.p_star = cfg.get_real("p_star");
  s.depth = cfg.get_uint("k");
  s.modulus = cfg.get_uint("modulus");
  s.group_size = cfg.get_uint("group_size");
  s.seed = cfg.get_uint("seed");
  return s;
}

}  // namespace

GeneratorConfig generator_config(const AppConfig& cfg) {
  GeneratorConfig g;
  g.endpoint = cfg.get("endpoint");
  g.model = cfg.get("model");
  g.timeout_seconds = cfg.get_real("timeout");
  g.max_retries = cfg.get_uint("max_retries");
  g.api_key = cfg.get("api_key");
  g.fixture_dir = cfg.get("fixture_dir");
  g.max_in_flight = cfg.get_uint("max_in_flight");
  return g;
}

std::string cmd_bank_generate(const AppConfig& cfg, const std::string& problems_path,
                              const std::string& out_path,
                              std::shared_ptr<HttpTransport> transport) {
  require_resolved(cfg);
  const auto problems = with_input(problems_path, [](std::istream& in) { return read_problems(in); });
  const GeneratorConfig gen = generator_config(cfg);
  auto client = make_generator(gen, std::move(transport));
  const BankGeneration result =
      generate_bank(*client, problems, cfg.get_uint("k"), gen.max_retries, gen.max_in_flight);
  with_output(out_path, [&](std::ostream& out) { save_bank(out, result.entries); });
  if (!result.failures.empty()) {
    ErrorCode code = ErrorCode::kValidation;
    std::string message = std::to_string(result.failures.size()) + " of " +
                          std::to_string(problems.size()) + " problems failed:";
    for (const auto& f : result.failures) {
      if (f.code == ErrorCode::kNetwork) code = ErrorCode::kNetwork;
      message += "\n  " + f.problem_id + ": " + f.message;
    }
    fail(code, message);
  }
  return "generated " + std::to_string(result.entries.size()) + " entries with " + client->id();
}

std::string cmd_bank_validate(const AppConfig& cfg, const std::string& bank_path, bool strict) {
  require_resolved(cfg);
  const BankLoad load =
      with_input(bank_path, [&](std::istream& in) { return load_bank(in, strict); });
  if (!load.errors.empty()) {
    std::string message = bank_path + ": " + std::to_string(load.errors.size()) + " bad line" +
                          (load.errors.size() == 1 ? "" : "s") + ":";
    for (const auto& [line, what] : load.errors) {
      message += "\n  line " + std::to_string(line) + ": " + what;
    }
    fail(ErrorCode::kValidation, message);
  }
  if (load.entries.empty()) fail(ErrorCode::kValidation, bank_path + ": bank is empty");
  return bank_path + ": " + std::to_string(load.entries.size()) + " entries, K = " +
         std::to_string(load.entries.front().subproblems.size());
}

std::string cmd_train_toy(const AppConfig& cfg, bool dead_zone, const std::string& trace_path) {
  require_resolved(cfg);
  const std::size_t k = cfg.get_uint("k");
  const std::size_t m = cfg.get_uint("modulus");
  std::unique_ptr<TabularPolicy> policy;
  if (dead_zone) {
    policy = std::make_unique<TabularPolicy>(
        make_instance_policy({construct_dead_zone_instance(dead_zone_spec(cfg))}));
  } else {
    std::vector<ChainTask> bank;
    const std::uint64_t seed = cfg.get_uint("seed");
    for (std::size_t i = 0; i < cfg.get_uint("bank_size"); ++i) {
      bank.push_back(random_chain_task(m, k, stream_key({seed, i, 0x62616e6bULL})));
    }
    policy = std::make_unique<TabularPolicy>(std::move(bank));
  }

  TrainConfig tc;
  tc.group_size = cfg.get_uint("group_size");
  tc.learning_rate = cfg.get_real("learning_rate");
  tc.steps = cfg.get_uint("steps");
  tc.seed = cfg.get_uint("seed");
  tc.temperature = cfg.get_real("temperature");
  tc.clip.eps_low = cfg.get_real("eps_low");
  tc.clip.eps_high = cfg.get_real("eps_high");
  tc.clip.beta = cfg.get_real("kl_coef");
  tc.clip.kl_enumeration_cap = cfg.get_uint("enumeration_cap");
  tc.enumeration_cap = cfg.get_uint("enumeration_cap");
  tc.workers = cfg.get_uint("workers");
  tc.comparator = cfg.get("comparator");
  const Algorithm algo = parse_algorithm(cfg.get("algo"));

  const TrainResult result = train(*policy, tc, algo);
  with_output(trace_path, [&](std::ostream& out) { write_trace_csv(out, result.trace, k); });
  std::string summary = std::string(algorithm_name(algo)) + ": " + std::to_string(tc.steps) +
                        " steps, final p_original " + fmt(result.final_p_original);
  for (std::size_t j = 0; j < result.final_p_curriculum.size(); ++j) {
    summary += ", p_" + std::to_string(j + 1) + " " + fmt(result.final_p_curriculum[j]);
  }
  return summary;
}

std::string cmd_egim(const AppConfig& cfg, bool sweep, const std::string& out_path) {
  require_resolved(cfg);
  if (!sweep) {
    const EgimReport report =
        analyze_instance(construct_dead_zone_instance(dead_zone_spec(cfg)), egim_options(cfg));
    with_output(out_path, [&](std::ostream& out) { write_report_json(out, report); });
    return "delta " + fmt(report.spec.delta) + ": lambda_min original " +
           fmt(report.lambda_min_original) + ", lifted " + fmt(report.lambda_min_lifted) +
           ", ratio " + fmt(report.ratio);
  }
  SweepConfig sc;
  sc.deltas = cfg.get_real_list("deltas");
  sc.p_star = cfg.get_real("p_star");
  sc.group_size = cfg.get_uint("group_size");
  sc.depth = cfg.get_uint("k");
  sc.modulus = cfg.get_uint("modulus");
  const auto seeds = cfg.get_uint_list("seeds");
  sc.seeds.assign(seeds.begin(), seeds.end());
  sc.egim = egim_options(cfg);
  const SweepResult result = recovery_sweep(sc);
  with_output(out_path, [&](std::ostream& out) { write_sweep_csv(out, result); });
  return std::to_string(result.rows.size()) + " instances; ratio increasing: " +
         (result.ratio_increasing ? "yes" : "no") +
         "; all checks hold: " + (result.all_checks_hold ? "yes" : "no");
}

std::string cmd_credit(const AppConfig& cfg, const std::string& in_path,
                       const std::string& out_path) {
  require_resolved(cfg);
  const CreditBatchResult result =
      with_input(in_path, [](std::istream& in) { return run_credit_batch(in); });
  with_output(out_path, [&](std::ostream& out) { write_credit_results(out, result.records); });
  if (!result.errors.empty()) {
    std::string message = std::to_string(result.errors.size()) + " record error" +
                          (result.errors.size() == 1 ? "" : "s") + ":";
    for (const auto& e : result.errors) {
      message += "\n  " + (e.line ? "line " + std::to_string(e.line) : std::string("group")) +
                 ": " + e.message;
    }
    fail(ErrorCode::kValidation, message);
  }
  return std::to_string(result.records.size()) + " rollouts scored";
}

std::string cmd_passk(const AppConfig& cfg, const std::string& in_path,
                      const std::string& out_path, std::span<const std::size_t> ks) {
  require_resolved(cfg);
  const auto outcomes =
      with_input(in_path, [](std::istream& in) { return read_sample_outcomes(in); });
  if (outcomes.empty()) fail(ErrorCode::kValidation, in_path + ": no records");
  std::vector<std::size_t> grid(ks.begin(), ks.end());
  if (grid.empty()) {
    grid.assign(std::begin(kPassAtKGrid), std::end(kPassAtKGrid));
  } else {
    for (std::size_t k : grid) {
      if (k == 0) fail(ErrorCode::kValidation, "k must be at least 1");
      for (const auto& o : outcomes) {
        if (k > o.n) {
          fail(ErrorCode::kValidation, "k = " + std::to_string(k) + " exceeds n = " +
                                           std::to_string(o.n) + " for problem '" +
                                           o.problem_id + "'");
        }
      }
    }
  }
  with_output(out_path, [&](std::ostream& out) { write_pass_at_k_csv(out, outcomes, grid); });
  return std::to_string(outcomes.size()) + " problems evaluated";
}

}  // namespace scrl
