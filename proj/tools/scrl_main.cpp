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


// scrl command-line tool. Everything goes through the C interface.

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "scrl/scrl.h"

namespace {

struct KeyInfo {
  std::string name, default_value, help, choices;
};

std::map<std::string, KeyInfo> registry() {
  std::map<std::string, KeyInfo> out;
  for (size_t i = 0; i < scrl_config_key_count(); ++i) {
    const char *name, *def, *help, *choices;
    scrl_config_key_info(i, &name, &def, &help, &choices);
    out[name] = {name, def, help, choices};
  }
  return out;
}

// Flag spelling of a config key.
std::string flag_for(const std::string& key) {
  if (key == "egim_method") return "--method";
  std::string f = "--" + key;
  for (char& c : f) {
    if (c == '_') c = '-';
  }
  return f;
}

// One leaf subcommand: its config-backed flags and what the user passed.
struct Leaf {
  explicit Leaf(CLI::App* a) : app(a) {}
  CLI::App* app;
  std::map<std::string, std::string> values;
  std::string config_path;
};

void add_config_flags(Leaf& leaf, const std::vector<std::string>& keys) {
  static const auto info = registry();
  leaf.app->add_option("--config", leaf.config_path, "key = value settings file (flags > SCRL_* env > file > defaults)");
  std::vector<std::string> all = keys;
  all.push_back("workers");
  for (const std::string& key : all) {
    const KeyInfo& k = info.at(key);
    std::string help = k.help;
    if (!k.choices.empty()) help += " {" + k.choices + "}";
    help += " (default: " + (k.default_value.empty() ? std::string("none") : k.default_value) + ")";
    auto* opt = leaf.app->add_option_function<std::string>(
        flag_for(key), [&leaf, key](const std::string& v) { leaf.values[key] = v; }, help);
    opt->type_name("VALUE")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

int exit_code(scrl_status s) {
  switch (s) {
    case SCRL_OK: return 0;
    case SCRL_ERR_IO: return 2;
    case SCRL_ERR_NETWORK: return 3;
    case SCRL_ERR_CONSTRUCTION: return 4;
    default: return 1;  // validation, contract, internal
  }
}

int report(scrl_status s, char* summary) {
  if (s == SCRL_OK) {
    if (summary) std::fprintf(stderr, "%s\n", summary);
  } else {
    std::fprintf(stderr, "error (%s): %s\n", scrl_status_name(s), scrl_last_error());
  }
  scrl_string_free(summary);
  return exit_code(s);
}

class ConfigHandle {
 public:
  ConfigHandle() { scrl_config_new(&cfg_); }
  ~ConfigHandle() { scrl_config_free(cfg_); }
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  scrl_config* get() const { return cfg_; }

 private:
  scrl_config* cfg_ = nullptr;
};

// Layers file, environment and flags, then resolves.
scrl_status build_config(const Leaf& leaf, const ConfigHandle& cfg) {
  scrl_status s = SCRL_OK;
  if (!leaf.config_path.empty() && (s = scrl_config_load_file(cfg.get(), leaf.config_path.c_str())) != SCRL_OK) {
    return s;
  }
  if ((s = scrl_config_apply_env(cfg.get())) != SCRL_OK) return s;
  for (const auto& [key, value] : leaf.values) {
    if ((s = scrl_config_set(cfg.get(), key.c_str(), value.c_str())) != SCRL_OK) return s;
  }
  return scrl_config_resolve(cfg.get());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subproblem curriculum RL toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(scrl_version()));

  // bank
  CLI::App* bank = app.add_subcommand("bank", "Subproblem bank management");
  bank->require_subcommand(1);

  Leaf generate{bank->add_subcommand("generate", "Generate subproblems for each problem (fixture or HTTP)")};
  std::string problems_path, bank_out;
  generate.app->add_option("--problems", problems_path, "problems JSONL: id, statement, final_answer, reference_solution")->required();
  generate.app->add_option("--out", bank_out, "bank JSONL to write")->required();
  add_config_flags(generate, {"k", "endpoint", "model", "timeout", "max_retries", "max_in_flight", "fixture_dir"});

  Leaf validate{bank->add_subcommand("validate", "Check a bank file line by line")};
  std::string bank_path;
  bool strict = false;
  validate.app->add_option("bank", bank_path, "bank JSONL")->required();
  validate.app->add_flag("--strict", strict, "stop at the first bad line (default: report all)");
  add_config_flags(validate, {});

  // train-toy
  Leaf train{app.add_subcommand("train-toy", "Train the tabular toy policy and write a trace CSV")};
  std::string trace_out = "-";
  bool dead_zone = false;
  train.app->add_option("--out", trace_out, "trace CSV (default: - for stdout)");
  train.app->add_flag("--dead-zone", dead_zone,
                      "train on one constructed dead-zone instance instead of bank-size random tasks");
  add_config_flags(train, {"algo", "group_size", "k", "learning_rate", "steps", "seed", "temperature",
                           "eps_low", "eps_high", "kl_coef", "enumeration_cap", "comparator", "modulus",
                           "bank_size", "delta", "p_star"});

  // egim
  Leaf egim{app.add_subcommand("egim", "Information matrices of dead-zone instances")};
  std::string egim_out = "-";
  bool sweep = false;
  egim.app->add_option("--out", egim_out, "JSON report, or CSV with --sweep (default: - for stdout)");
  egim.app->add_flag("--sweep", sweep, "sweep --deltas x --seeds instead of one instance at --delta");
  add_config_flags(egim, {"group_size", "k", "modulus", "delta", "deltas", "p_star", "seed", "seeds",
                          "egim_method", "tuple_cap", "mc_groups", "enumeration_cap"});

  // credit
  Leaf credit{app.add_subcommand("credit", "Token advantages from per-rollout rewards and spans")};
  std::string credit_in, credit_out = "-";
  credit.app->add_option("--input", credit_in, "records JSONL (- for stdin)")->required();
  credit.app->add_option("--out", credit_out, "results JSONL (default: - for stdout)");
  add_config_flags(credit, {});

  // passk
  Leaf passk{app.add_subcommand("passk", "Unbiased pass@k from per-problem sample counts")};
  std::string passk_in, passk_out = "-";
  std::vector<size_t> ks;
  passk.app->add_option("--input", passk_in, "records JSONL with problem_id, n, c (- for stdin)")->required();
  passk.app->add_option("--out", passk_out, "CSV (default: - for stdout)");
  passk.app->add_option("--k", ks, "k values; each must not exceed any record's n (default: 1,2,4,8,16,32,64, blank where k > n)")
      ->delimiter(',');
  add_config_flags(passk, {});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::vector<Leaf*> leaves = {&generate, &validate, &train, &egim, &credit, &passk};
  Leaf* leaf = nullptr;
  for (Leaf* l : leaves) {
    if (l->app->parsed()) leaf = l;
  }
  if (!leaf) return 1;

  ConfigHandle cfg;
  if (const scrl_status s = build_config(*leaf, cfg); s != SCRL_OK) return report(s, nullptr);

  char* summary = nullptr;
  scrl_status s = SCRL_OK;
  if (leaf == &generate) {
    s = scrl_cmd_bank_generate(cfg.get(), problems_path.c_str(), bank_out.c_str(), &summary);
  } else if (leaf == &validate) {
    s = scrl_cmd_bank_validate(cfg.get(), bank_path.c_str(), strict ? 1 : 0, &summary);
  } else if (leaf == &train) {
    s = scrl_cmd_train_toy(cfg.get(), dead_zone ? 1 : 0, trace_out.c_str(), &summary);
  } else if (leaf == &egim) {
    s = scrl_cmd_egim(cfg.get(), sweep ? 1 : 0, egim_out.c_str(), &summary);
  } else if (leaf == &credit) {
    s = scrl_cmd_credit(cfg.get(), credit_in.c_str(), credit_out.c_str(), &summary);
  } else {
    s = scrl_cmd_passk(cfg.get(), passk_in.c_str(), passk_out.c_str(), ks.data(), ks.size(), &summary);
  }
  return report(s, summary);
}
