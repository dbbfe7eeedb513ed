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


#include "scrl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "scrl/error.hpp"

namespace scrl {
namespace {

constexpr ConfigKey kRegistry[] = {
    // Training.
    {"algo", ConfigType::kChoice, "scrl", "training algorithm", "grpo|scrl"},
    {"group_size", ConfigType::kUint, "8", "rollouts per group (G)", ""},
    {"k", ConfigType::kUint, "4", "subproblems per curriculum (K)", ""},
    {"learning_rate", ConfigType::kReal, "1.0", "toy step size", ""},
    {"steps", ConfigType::kUint, "300", "training steps", ""},
    {"seed", ConfigType::kUint, "0", "random seed", ""},
    {"temperature", ConfigType::kReal, "0.6", "rollout temperature", ""},
    {"eps_low", ConfigType::kReal, "0.2", "lower clip ratio", ""},
    {"eps_high", ConfigType::kReal, "0.2", "upper clip ratio", ""},
    {"kl_coef", ConfigType::kReal, "0", "KL coefficient (beta)", ""},
    {"enumeration_cap", ConfigType::kUint, "1048576", "largest response space enumerated exactly", ""},
    {"workers", ConfigType::kUint, "1", "worker threads; output does not depend on it", ""},
    // Toy tasks.
    {"modulus", ConfigType::kUint, "7", "answer alphabet size of toy tasks (m)", ""},
    {"bank_size", ConfigType::kUint, "32", "random toy tasks when not training on a dead-zone instance", ""},
    {"delta", ConfigType::kReal, "0.001", "dead-zone threshold on the original solve rate", ""},
    {"p_star", ConfigType::kReal, "0.4", "band [p*, 1 - p*] for intermediate subproblem rates", ""},
    // Geometry.
    {"deltas", ConfigType::kRealList, "0.1,0.01,0.001", "sweep thresholds", ""},
    {"seeds", ConfigType::kUintList, "0", "sweep construction seeds", ""},
    {"egim_method", ConfigType::kChoice, "exact", "information matrix method", "exact|enumerated|monte-carlo"},
    {"tuple_cap", ConfigType::kUint, "50000000", "largest outcome-tuple space for the enumerated method", ""},
    {"mc_groups", ConfigType::kUint, "100000", "groups drawn by the monte-carlo method", ""},
    // Verification.
    {"comparator", ConfigType::kChoice, "numeric", "answer comparator", "exact|numeric"},
    // Generation.
    {"endpoint", ConfigType::kString, "https://api.openai.com/v1/chat/completions", "chat-completion URL", ""},
    {"model", ConfigType::kString, "gpt-4o-mini", "generator model name", ""},
    {"timeout", ConfigType::kReal, "60", "request timeout in seconds", ""},
    {"max_retries", ConfigType::kUint, "3", "extra attempts after a failed generation", ""},
    {"max_in_flight", ConfigType::kUint, "4", "concurrent generation requests", ""},
    {"fixture_dir", ConfigType::kString, "", "directory of canned replies; selects fixture mode", ""},
    {"api_key", ConfigType::kString, "", "bearer token for the endpoint", ""},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

bool in_choices(std::string_view choices, std::string_view value) {
  std::size_t start = 0;
  while (start <= choices.size()) {
    const std::size_t end = std::min(choices.find('|', start), choices.size());
    if (choices.substr(start, end - start) == value) return true;
    start = end + 1;
  }
  return false;
}

// Type check for one value; empty string when fine.
std::string type_problem(const ConfigKey& key, const std::string& value) {
  switch (key.type) {
    case ConfigType::kUint:
      return parse_uint(value) ? "" : "expected a non-negative integer";
    case ConfigType::kReal:
      return parse_real(value) ? "" : "expected a finite number";
    case ConfigType::kRealList:
      for (const std::string& item : split_list(value)) {
        if (!parse_real(item)) return "expected comma-separated numbers";
      }
      return value.empty() ? "expected at least one number" : "";
    case ConfigType::kUintList:
      for (const std::string& item : split_list(value)) {
        if (!parse_uint(item)) return "expected comma-separated non-negative integers";
      }
      return value.empty() ? "expected at least one integer" : "";
    case ConfigType::kChoice:
      return in_choices(key.choices, value) ? "" : "expected one of " + std::string(key.choices);
    case ConfigType::kString:
      return "";
  }
  return "";
}

}  // namespace

std::span<const ConfigKey> config_registry() { return kRegistry; }

std::string canonical_key(std::string_view name) {
  std::string out;
  for (char c : trim(name)) {
    out += c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

const ConfigKey* find_config_key(std::string_view name) {
  const std::string key = canonical_key(name);
  for (const ConfigKey& k : kRegistry) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

std::string config_env_name(std::string_view key) {
  std::string out = "SCRL_";
  for (char c : canonical_key(key)) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

AppConfig::AppConfig() {
  for (const ConfigKey& k : kRegistry) entries_[std::string(k.name)] = {std::string(k.default_value), "default"};
}

void AppConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path);
}

void AppConfig::load_text(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const std::string where = source + ":" + std::to_string(lineno);
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      problems_.push_back(where + ": expected 'key = value'");
      continue;
    }
    const std::string key = canonical_key(body.substr(0, eq));
    if (!find_config_key(key)) {
      problems_.push_back(where + ": unknown key '" + key + "'");
      continue;
    }
    set(key, trim(body.substr(eq + 1)), where);
  }
}

void AppConfig::apply_environment(const EnvLookup& lookup) {
  for (const ConfigKey& k : kRegistry) {
    const std::string var = config_env_name(k.name);
    if (const char* v = lookup(var.c_str())) set(k.name, v, "env " + var);
  }
}

void AppConfig::apply_environment() {
  apply_environment([](const char* name) -> const char* { return std::getenv(name); });
}

void AppConfig::set(std::string_view key, std::string value, const std::string& source) {
  const ConfigKey* k = find_config_key(key);
  if (!k) {
    problems_.push_back(source + ": unknown key '" + canonical_key(key) + "'");
    return;
  }
  entries_[std::string(k->name)] = {std::move(value), source};
  resolved_ = false;
}

const std::string& AppConfig::get(std::string_view key) const {
  const auto it = entries_.find(canonical_key(key));
  require(it != entries_.end(), "unknown config key '" + std::string(key) + "'");
  return it->second.value;
}

const std::string& AppConfig::source(std::string_view key) const {
  const auto it = entries_.find(canonical_key(key));
  require(it != entries_.end(), "unknown config key '" + std::string(key) + "'");
  return it->second.source;
}

void AppConfig::resolve() {
  std::vector<std::string> v = problems_;
  std::set<std::string_view> bad;
  for (const ConfigKey& k : kRegistry) {
    const Entry& e = entries_.at(std::string(k.name));
    const std::string p = type_problem(k, e.value);
    if (!p.empty()) {
      v.push_back(std::string(k.name) + " = '" + e.value + "' (" + e.source + "): " + p);
      bad.insert(k.name);
    }
  }
  // Cross-field rules run only on keys that parsed.
  auto check = [&](std::initializer_list<std::string_view> keys, auto&& ok, const std::string& what) {
    for (std::string_view key : keys) {
      if (bad.count(key)) return;
    }
    if (!ok()) v.push_back(what);
  };
  check({"group_size"}, [&] { return get_uint("group_size") >= 2; }, "group_size must be at least 2");
  check({"group_size", "algo"}, [&] { return get("algo") != "scrl" || get_uint("group_size") % 2 == 0; },
        "group_size must be even for scrl");
  check({"k"}, [&] { return get_uint("k") >= 2; }, "k must be at least 2");
  check({"learning_rate"}, [&] { return get_real("learning_rate") >= 0.0; },
        "learning_rate must be non-negative");
  check({"temperature"}, [&] { return get_real("temperature") > 0.0; }, "temperature must be positive");
  for (std::string_view eps : {"eps_low", "eps_high"}) {
    check({eps}, [&] { return get_real(eps) > 0.0 && get_real(eps) < 1.0; },
          std::string(eps) + " must lie in (0, 1)");
  }
  check({"kl_coef"}, [&] { return get_real("kl_coef") >= 0.0; }, "kl_coef must be non-negative");
  for (std::string_view key : {"enumeration_cap", "tuple_cap", "mc_groups", "workers", "bank_size",
                               "max_in_flight"}) {
    check({key}, [&] { return get_uint(key) >= 1; }, std::string(key) + " must be at least 1");
  }
  check({"modulus"}, [&] { return get_uint("modulus") >= 2; }, "modulus must be at least 2");
  check({"p_star"}, [&] { return get_real("p_star") > 0.0 && get_real("p_star") <= 0.5; },
        "p_star must lie in (0, 0.5]");
  check({"delta", "p_star"}, [&] { return get_real("delta") > 0.0 && get_real("delta") < get_real("p_star"); },
        "delta must lie in (0, p_star)");
  check({"deltas", "p_star"},
        [&] {
          for (double d : get_real_list("deltas")) {
            if (!(d > 0.0 && d < get_real("p_star"))) return false;
          }
          return true;
        },
        "every sweep delta must lie in (0, p_star); got " + get("deltas"));
  check({"endpoint"},
        [&] {
          const std::string& url = get("endpoint");
          return url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0;
        },
        "endpoint must be an http:// or https:// URL");
  check({"timeout"}, [&] { return get_real("timeout") > 0.0; }, "timeout must be positive");
  if (!v.empty()) {
    std::string message = "invalid configuration (" + std::to_string(v.size()) + " problem" +
                          (v.size() == 1 ? "" : "s") + "):";
    for (const std::string& s : v) message += "\n  - " + s;
    fail(ErrorCode::kValidation, message);
  }
  resolved_ = true;
}

std::uint64_t AppConfig::get_uint(std::string_view key) const {
  const auto v = parse_uint(get(key));
  require(v.has_value(), "config key '" + std::string(key) + "' is not an integer");
  return *v;
}

double AppConfig::get_real(std::string_view key) const {
  const auto v = parse_real(get(key));
  require(v.has_value(), "config key '" + std::string(key) + "' is not a number");
  return *v;
}

std::vector<double> AppConfig::get_real_list(std::string_view key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(get(key))) {
    const auto v = parse_real(item);
    require(v.has_value(), "config key '" + std::string(key) + "' is not a number list");
    out.push_back(*v);
  }
  return out;
}

std::vector<std::uint64_t> AppConfig::get_uint_list(std::string_view key) const {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(get(key))) {
    const auto v = parse_uint(item);
    require(v.has_value(), "config key '" + std::string(key) + "' is not an integer list");
    out.push_back(*v);
  }
  return out;
}

std::string AppConfig::dump() const {
  std::string out;
  for (const ConfigKey& k : kRegistry) {
    const Entry& e = entries_.at(std::string(k.name));
    const bool secret = k.name == "api_key" && !e.value.empty();
    out += std::string(k.name) + " = " + (secret ? "***" : e.value) + "  # " + e.source + "\n";
  }
  return out;
}

}  // namespace scrl
