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


#include "scrl/scrl.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "scrl/bank.hpp"
#include "scrl/commands.hpp"
#include "scrl/config.hpp"
#include "scrl/credit.hpp"
#include "scrl/evaluation.hpp"
#include "scrl/objective.hpp"
#include "scrl/tagging.hpp"
#include "scrl/toy.hpp"
#include "scrl/verification.hpp"

struct scrl_config {
  scrl::AppConfig config;
};

struct scrl_toy {
  scrl::DeadZoneInstance instance;
  std::unique_ptr<scrl::TabularPolicy> policy;
};

namespace {

thread_local std::string last_error;

scrl_status status_of(scrl::ErrorCode code) {
  switch (code) {
    case scrl::ErrorCode::kValidation: return SCRL_ERR_VALIDATION;
    case scrl::ErrorCode::kIo: return SCRL_ERR_IO;
    case scrl::ErrorCode::kNetwork: return SCRL_ERR_NETWORK;
    case scrl::ErrorCode::kConstruction: return SCRL_ERR_CONSTRUCTION;
    case scrl::ErrorCode::kContract: return SCRL_ERR_CONTRACT;
  }
  return SCRL_ERR_INTERNAL;
}

template <typename Fn>
scrl_status guarded(Fn fn) {
  try {
    fn();
    last_error.clear();
    return SCRL_OK;
  } catch (const scrl::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return SCRL_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (p == nullptr) scrl::fail(scrl::ErrorCode::kContract, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void give(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

const scrl::AppConfig& config_of(const scrl_config* cfg) {
  need(cfg, "config");
  return cfg->config;
}

}  // namespace

extern "C" {

const char* scrl_version(void) { return "0.1.0"; }

const char* scrl_status_name(scrl_status status) {
  switch (status) {
    case SCRL_OK: return "ok";
    case SCRL_ERR_VALIDATION: return "validation";
    case SCRL_ERR_IO: return "io";
    case SCRL_ERR_NETWORK: return "network";
    case SCRL_ERR_CONSTRUCTION: return "construction";
    case SCRL_ERR_CONTRACT: return "contract";
    case SCRL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* scrl_last_error(void) { return last_error.c_str(); }

void scrl_string_free(char* s) { std::free(s); }

scrl_status scrl_config_new(scrl_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new scrl_config();
  });
}

void scrl_config_free(scrl_config* cfg) { delete cfg; }

scrl_status scrl_config_load_file(scrl_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    cfg->config.load_file(path);
  });
}

scrl_status scrl_config_apply_env(scrl_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->config.apply_environment();
  });
}

scrl_status scrl_config_set(scrl_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    if (!scrl::find_config_key(key)) {
      scrl::fail(scrl::ErrorCode::kValidation, "unknown config key '" + std::string(key) + "'");
    }
    cfg->config.set(key, value);
  });
}

scrl_status scrl_config_get(const scrl_config* cfg, const char* key, const char** value) {
  return guarded([&] {
    need(key, "key");
    need(value, "value");
    if (!scrl::find_config_key(key)) {
      scrl::fail(scrl::ErrorCode::kValidation, "unknown config key '" + std::string(key) + "'");
    }
    *value = config_of(cfg).get(key).c_str();
  });
}

scrl_status scrl_config_resolve(scrl_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    cfg->config.resolve();
  });
}

scrl_status scrl_config_dump(const scrl_config* cfg, char** out) {
  return guarded([&] {
    need(out, "out");
    give(out, config_of(cfg).dump());
  });
}

size_t scrl_config_key_count(void) { return scrl::config_registry().size(); }

scrl_status scrl_config_key_info(size_t index, const char** name, const char** default_value,
                                 const char** help, const char** choices) {
  return guarded([&] {
    const auto registry = scrl::config_registry();
    if (index >= registry.size()) scrl::fail(scrl::ErrorCode::kContract, "key index out of range");
    // Registry strings are literals, so data() is NUL-terminated.
    const scrl::ConfigKey& k = registry[index];
    if (name) *name = k.name.data();
    if (default_value) *default_value = k.default_value.data();
    if (help) *help = k.help.data();
    if (choices) *choices = k.choices.data();
  });
}

scrl_status scrl_cmd_bank_generate(const scrl_config* cfg, const char* problems_path,
                                   const char* out_path, char** summary) {
  return guarded([&] {
    need(problems_path, "problems_path");
    need(out_path, "out_path");
    give(summary, scrl::cmd_bank_generate(config_of(cfg), problems_path, out_path));
  });
}

scrl_status scrl_cmd_bank_validate(const scrl_config* cfg, const char* bank_path, int strict,
                                   char** summary) {
  return guarded([&] {
    need(bank_path, "bank_path");
    give(summary, scrl::cmd_bank_validate(config_of(cfg), bank_path, strict != 0));
  });
}

scrl_status scrl_cmd_train_toy(const scrl_config* cfg, int dead_zone, const char* trace_path,
                               char** summary) {
  return guarded([&] {
    need(trace_path, "trace_path");
    give(summary, scrl::cmd_train_toy(config_of(cfg), dead_zone != 0, trace_path));
  });
}

scrl_status scrl_cmd_egim(const scrl_config* cfg, int sweep, const char* out_path,
                          char** summary) {
  return guarded([&] {
    need(out_path, "out_path");
    give(summary, scrl::cmd_egim(config_of(cfg), sweep != 0, out_path));
  });
}

scrl_status scrl_cmd_credit(const scrl_config* cfg, const char* in_path, const char* out_path,
                            char** summary) {
  return guarded([&] {
    need(in_path, "in_path");
    need(out_path, "out_path");
    give(summary, scrl::cmd_credit(config_of(cfg), in_path, out_path));
  });
}

scrl_status scrl_cmd_passk(const scrl_config* cfg, const char* in_path, const char* out_path,
                           const size_t* ks, size_t num_ks, char** summary) {
  return guarded([&] {
    need(in_path, "in_path");
    need(out_path, "out_path");
    if (num_ks > 0) need(ks, "ks");
    const std::vector<std::size_t> grid(ks, ks + num_ks);
    give(summary, scrl::cmd_passk(config_of(cfg), in_path, out_path, grid));
  });
}

scrl_status scrl_progress_correct(const int* raw, size_t k, int well_formed, int* corrected,
                                  size_t* progress) {
  return guarded([&] {
    if (k > 0) {
      need(raw, "raw");
      need(corrected, "corrected");
    }
    scrl::RawRewardVector r;
    r.rewards.assign(raw, raw + k);
    r.well_formed = well_formed != 0;
    for (int v : r.rewards) {
      if (v != 0 && v != 1) scrl::fail(scrl::ErrorCode::kContract, "rewards must be 0 or 1");
    }
    const scrl::CorrectedRewardVector c = scrl::progress_correct(r);
    std::copy(c.rewards.begin(), c.rewards.end(), corrected);
    if (progress) *progress = c.progress;
  });
}

scrl_status scrl_normalize_group(const double* values, size_t n, double* out) {
  return guarded([&] {
    need(values, "values");
    need(out, "out");
    const auto adv = scrl::normalize_group(std::span<const double>(values, n));
    std::copy(adv.begin(), adv.end(), out);
  });
}

scrl_status scrl_subproblem_normalize(const int* rewards, size_t g, size_t k, double* out) {
  return guarded([&] {
    need(rewards, "rewards");
    need(out, "out");
    std::vector<std::vector<int>> rows(g);
    for (size_t i = 0; i < g; ++i) rows[i].assign(rewards + i * k, rewards + (i + 1) * k);
    const scrl::Matrix adv = scrl::subproblem_normalize(scrl::GroupRewards(std::move(rows)));
    for (size_t i = 0; i < g; ++i) {
      for (size_t j = 0; j < k; ++j) out[i * k + j] = adv(i, j);
    }
  });
}

scrl_status scrl_pass_at_k(size_t n, size_t c, size_t k, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = scrl::pass_at_k({"", n, c}, k);
  });
}

scrl_status scrl_clipped_token_term(double rho, double advantage, double eps_low,
                                    double eps_high, double* out) {
  return guarded([&] {
    need(out, "out");
    scrl::ClipConfig cfg;
    cfg.eps_low = eps_low;
    cfg.eps_high = eps_high;
    scrl::validate_clip_config(cfg);
    *out = scrl::clipped_token_term(rho, advantage, cfg);
  });
}

scrl_status scrl_score_response(const char* text, size_t k, const char* const* ground_truths,
                                const char* comparator, int* rewards, int* well_formed) {
  return guarded([&] {
    need(text, "text");
    need(ground_truths, "ground_truths");
    need(rewards, "rewards");
    std::vector<std::string> truths;
    for (size_t j = 0; j < k; ++j) {
      need(ground_truths[j], "ground truth");
      truths.emplace_back(ground_truths[j]);
    }
    const auto cmp = scrl::make_comparator(comparator ? comparator : "numeric");
    const auto parsed = scrl::parse_tagged_response(text, k);
    const scrl::RawRewardVector r = scrl::verify_rollout(parsed, truths, *cmp);
    std::copy(r.rewards.begin(), r.rewards.end(), rewards);
    if (well_formed) *well_formed = r.well_formed ? 1 : 0;
  });
}

scrl_status scrl_render_curriculum_prompt(const char* statement, const char* const* subproblems,
                                          size_t k, char** out) {
  return guarded([&] {
    need(statement, "statement");
    need(subproblems, "subproblems");
    need(out, "out");
    scrl::ProblemRecord p;
    p.statement = statement;
    scrl::SubproblemSet subs;
    for (size_t j = 0; j < k; ++j) {
      need(subproblems[j], "subproblem");
      subs.items.push_back({subproblems[j], ""});
    }
    give(out, scrl::render_curriculum_prompt(p, subs));
  });
}

scrl_status scrl_render_original_prompt(const char* statement, char** out) {
  return guarded([&] {
    need(statement, "statement");
    need(out, "out");
    scrl::ProblemRecord p;
    p.statement = statement;
    give(out, scrl::render_original_prompt(p));
  });
}

scrl_status scrl_validate_subproblem_json(const char* text, const char* final_answer, size_t k,
                                          int* kind, char** path) {
  return guarded([&] {
    need(text, "text");
    need(final_answer, "final_answer");
    scrl::ProblemRecord p;
    p.final_answer = final_answer;
    try {
      scrl::validate_subproblem_json(text, p, k);
    } catch (const scrl::SchemaError& e) {
      if (kind) *kind = static_cast<int>(e.kind());
      give(path, e.path());
      throw;
    }
  });
}

const char* scrl_schema_error_name(int kind) {
  if (kind < 0 || static_cast<std::size_t>(kind) >= scrl::kSchemaErrorKinds) return "unknown";
  return scrl::schema_error_name(static_cast<scrl::SchemaErrorKind>(kind)).data();
}

scrl_status scrl_toy_dead_zone(double delta, double p_star, size_t k, size_t modulus,
                               size_t group_size, uint64_t seed, scrl_toy** out) {
  return guarded([&] {
    need(out, "out");
    scrl::DeadZoneSpec spec;
    spec.delta = delta;
    spec.p_star = p_star;
    spec.depth = k;
    spec.modulus = modulus;
    spec.group_size = group_size;
    spec.seed = seed;
    auto toy = std::make_unique<scrl_toy>();
    toy->instance = scrl::construct_dead_zone_instance(spec);
    toy->policy = std::make_unique<scrl::TabularPolicy>(scrl::make_instance_policy({toy->instance}));
    *out = toy.release();
  });
}

void scrl_toy_free(scrl_toy* toy) { delete toy; }

scrl_status scrl_toy_solve_probability(const scrl_toy* toy, double* out) {
  return guarded([&] {
    need(toy, "toy");
    need(out, "out");
    *out = scrl::solve_probability(*toy->policy, 0);
  });
}

scrl_status scrl_toy_curriculum_probabilities(const scrl_toy* toy, double* out, size_t k) {
  return guarded([&] {
    need(toy, "toy");
    need(out, "out");
    const auto p = scrl::curriculum_probabilities(*toy->policy, 0);
    if (k != p.size()) scrl::fail(scrl::ErrorCode::kContract, "k differs from the instance depth");
    std::copy(p.begin(), p.end(), out);
  });
}

scrl_status scrl_toy_expected_gradient_norm(const scrl_toy* toy, const char* algo,
                                            size_t group_size, double temperature, double* out) {
  return guarded([&] {
    need(toy, "toy");
    need(algo, "algo");
    need(out, "out");
    const auto g = scrl::expected_gradient(*toy->policy, 0, scrl::parse_algorithm(algo),
                                           group_size, temperature);
    double s = 0.0;
    for (double v : g) s += v * v;
    *out = std::sqrt(s);
  });
}

}  // extern "C"
