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


#include "scrl/evaluation.hpp"

#include <cstdint>
#include <cstdio>
#include <numeric>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "scrl/error.hpp"

namespace scrl {

double pass_at_k(const SampleOutcome& outcome, std::size_t k) {
  const std::size_t n = outcome.n;
  const std::size_t c = outcome.c;
  require(n >= 1, "pass_at_k: n must be at least 1");
  require(c <= n, "pass_at_k: c must not exceed n");
  require(k >= 1 && k <= n, "pass_at_k: k must lie in [1, n]");
  if (n - c < k) return 1.0;

  // Exact ratio C(n-c, k) / C(n, k) while the factors stay small enough;
  // one division of exactly representable integers is correctly rounded.
  constexpr std::uint64_t kExact = std::uint64_t{1} << 53;
  std::uint64_t num = 1, den = 1;
  bool exact = true;
  for (std::size_t i = 0; i < k && exact; ++i) {
    std::uint64_t a = n - c - i, b = n - i;
    const std::uint64_t g = std::gcd(a, b);
    a /= g;
    b /= g;
    const std::uint64_t g1 = std::gcd(a, den), g2 = std::gcd(num, b);
    a /= g1;
    den /= g1;
    num /= g2;
    b /= g2;
    exact = num <= kExact / a && den <= kExact / b;
    num *= a;
    den *= b;
  }
  if (exact) return static_cast<double>(den - num) / static_cast<double>(den);

  double all_fail = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    all_fail *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  }
  return 1.0 - all_fail;
}

double aggregate_pass_at_k(std::span<const SampleOutcome> outcomes, std::size_t k) {
  require(!outcomes.empty(), "aggregate_pass_at_k: no outcomes");
  double total = 0.0;
  for (const auto& o : outcomes) total += pass_at_k(o, k);
  return total / static_cast<double>(outcomes.size());
}

void SolvableTracker::update(const std::string& problem_id,
                             std::span<const SolveEvidence> results) {
  Flags& f = flags_[problem_id];
  for (const auto& r : results) {
    if (!r.solved_original) continue;
    f.full = true;
    if (r.kind == PromptKind::kOriginal && r.in_half_budget) f.half = true;
  }
}

bool SolvableTracker::solved_full(const std::string& problem_id) const {
  auto it = flags_.find(problem_id);
  return it != flags_.end() && it->second.full;
}

bool SolvableTracker::solved_half(const std::string& problem_id) const {
  auto it = flags_.find(problem_id);
  return it != flags_.end() && it->second.half;
}

double SolvableTracker::ratio_full() const {
  const std::size_t denom = num_problems_ ? num_problems_ : flags_.size();
  if (denom == 0) return 0.0;
  std::size_t n = 0;
  for (const auto& [id, f] : flags_) n += f.full;
  return static_cast<double>(n) / static_cast<double>(denom);
}

double SolvableTracker::ratio_half() const {
  const std::size_t denom = num_problems_ ? num_problems_ : flags_.size();
  if (denom == 0) return 0.0;
  std::size_t n = 0;
  for (const auto& [id, f] : flags_) n += f.half;
  return static_cast<double>(n) / static_cast<double>(denom);
}

std::vector<SampleOutcome> read_sample_outcomes(std::istream& in) {
  std::vector<SampleOutcome> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line) + ": ";
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kValidation, where + "invalid JSON: " + e.what());
    }
    if (!rec.is_object()) fail(ErrorCode::kValidation, where + "record is not an object");
    SampleOutcome o;
    if (!rec.contains("problem_id") || !rec["problem_id"].is_string()) {
      fail(ErrorCode::kValidation, where + "'problem_id' must be a string");
    }
    o.problem_id = rec["problem_id"].get<std::string>();
    for (const char* key : {"n", "c"}) {
      if (!rec.contains(key) || !rec[key].is_number_unsigned()) {
        fail(ErrorCode::kValidation, where + "'" + key + "' must be a non-negative integer");
      }
    }
    o.n = rec["n"].get<std::size_t>();
    o.c = rec["c"].get<std::size_t>();
    if (o.n < 1 || o.c > o.n) {
      fail(ErrorCode::kValidation, where + "need n >= 1 and 0 <= c <= n");
    }
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

}  // namespace

void write_pass_at_k_csv(std::ostream& out, std::span<const SampleOutcome> outcomes,
                         std::span<const std::size_t> ks) {
  out << "problem_id,n,c";
  for (std::size_t k : ks) out << ",pass@" << k;
  out << '\n';
  std::vector<double> sums(ks.size(), 0.0);
  std::vector<std::size_t> counts(ks.size(), 0);
  for (const auto& o : outcomes) {
    out << csv_field(o.problem_id) << ',' << o.n << ',' << o.c;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      out << ',';
      if (ks[i] > o.n) continue;
      const double v = pass_at_k(o, ks[i]);
      sums[i] += v;
      ++counts[i];
      out << fixed6(v);
    }
    out << '\n';
  }
  out << "mean,,";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    out << ',';
    if (counts[i] > 0) out << fixed6(sums[i] / static_cast<double>(counts[i]));
  }
  out << '\n';
}

}  // namespace scrl
