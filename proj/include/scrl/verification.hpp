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

#ifndef SCRL_VERIFICATION_HPP_
#define SCRL_VERIFICATION_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scrl/tagging.hpp"

namespace scrl {

// Reduced fraction with positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  friend bool operator==(const Rational&, const Rational&) = default;
};

// Exact rational from a reduced numerator/denominator pair; nullopt on
// a zero denominator.
std::optional<Rational> make_rational(std::int64_t num, std::int64_t den);

// Parses integers, finite decimals, p/q and \frac{p}{q} (also \dfrac,
// \tfrac). Whitespace is ignored. nullopt when the text is not one of these
// forms or a component overflows 64 bits.
std::optional<Rational> parse_rational(std::string_view text);

// Strips surrounding whitespace and $ delimiters, removes \left and \right,
// drops trailing periods, applies a small LaTeX cleanup table ({,} and \!
// removed, \dfrac/\tfrac -> \frac) and collapses whitespace runs to one
// space.
std::string normalize_answer(std::string_view text);

// True iff both sides are equal rationals; otherwise compares normalized
// strings with all whitespace removed.
bool numeric_equivalent(std::string_view a, std::string_view b);

class Comparator {
 public:
  virtual ~Comparator() = default;
  virtual bool equivalent(std::string_view candidate, std::string_view ground_truth) const = 0;
  virtual std::string_view id() const = 0;
};

// "exact": normalized string equality (whitespace-insensitive).
class ExactComparator final : public Comparator {
 public:
  bool equivalent(std::string_view candidate, std::string_view ground_truth) const override;
  std::string_view id() const override { return "exact"; }
};

// "numeric": numeric_equivalent.
class NumericComparator final : public Comparator {
 public:
  bool equivalent(std::string_view candidate, std::string_view ground_truth) const override;
  std::string_view id() const override { return "numeric"; }
};

// Comparator by identifier; throws a validation error for unknown ids.
std::unique_ptr<Comparator> make_comparator(std::string_view id);

struct RawRewardVector {
  std::vector<int> rewards;  // entries in {0, 1}
  bool well_formed = false;
};

// rewards[j] = 1 iff the response is well formed, block j has a boxed
// answer and it matches ground_truths[j]. Malformed responses score all zero.
RawRewardVector verify_rollout(const ParsedResponse& parsed,
                               std::span<const std::string> ground_truths,
                               const Comparator& comparator);

}  // namespace scrl

#endif  // SCRL_VERIFICATION_HPP_
