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


// Layered application settings: defaults < config file < SCRL_* environment
// variables < command-line flags.

#ifndef SCRL_CONFIG_HPP_
#define SCRL_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scrl {

enum class ConfigType { kUint, kReal, kString, kRealList, kUintList, kChoice };

struct ConfigKey {
  std::string_view name;
  ConfigType type;
  std::string_view default_value;
  std::string_view help;
  std::string_view choices;  // '|'-separated, kChoice only
};

std::span<const ConfigKey> config_registry();
const ConfigKey* find_config_key(std::string_view name);

// "group-size" and "GROUP_SIZE" both name group_size.
std::string canonical_key(std::string_view name);

// Environment variable for a key: SCRL_ plus the upper-cased name.
std::string config_env_name(std::string_view key);

class AppConfig {
 public:
  using EnvLookup = std::function<const char*(const char*)>;

  AppConfig();  // registry defaults

  // key = value lines; '#' starts a comment. Problems are recorded and
  // reported by resolve(). Throws an I/O error when the file is unreadable.
  void load_file(const std::string& path);
  void load_text(std::string_view text, const std::string& source);
  void apply_environment(const EnvLookup& lookup);
  void apply_environment();  // std::getenv
  void set(std::string_view key, std::string value, const std::string& source = "flag");

  const std::string& get(std::string_view key) const;
  const std::string& source(std::string_view key) const;

  // Type and cross-field checks. Throws one validation error listing every
  // violation; afterwards the typed getters are safe.
  void resolve();
  bool resolved() const { return resolved_; }

  std::uint64_t get_uint(std::string_view key) const;
  double get_real(std::string_view key) const;
  std::vector<double> get_real_list(std::string_view key) const;
  std::vector<std::uint64_t> get_uint_list(std::string_view key) const;

  // Resolved view as "key = value  # source" lines, secrets masked.
  std::string dump() const;

 private:
  struct Entry {
    std::string value;
    std::string source;
  };
  std::map<std::string, Entry, std::less<>> entries_;
  std::vector<std::string> problems_;
  bool resolved_ = false;
};

}  // namespace scrl

#endif  // SCRL_CONFIG_HPP_
