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

#include "scrl/verification.hpp"

#include <cctype>
#include <numeric>

#include "scrl/error.hpp"

namespace scrl {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string strip_whitespace(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!is_space(c)) out.push_back(c);
  return out;
}

// Unsigned decimal digits -> value; nullopt on empty input or overflow.
std::optional<std::int64_t> parse_digits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, c - '0', &v)) {
      return std::nullopt;
    }
  }
  return v;
}

// [+-]?digits, [+-]?digits.digits, [+-]?.digits
std::optional<Rational> parse_decimal(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  const std::size_t dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (dot != std::string_view::npos && frac.empty()) return std::nullopt;
  if (whole.empty() && frac.empty()) return std::nullopt;

  std::int64_t w = 0;
  if (!whole.empty()) {
    auto parsed = parse_digits(whole);
    if (!parsed) return std::nullopt;
    w = *parsed;
  }
  std::int64_t f = 0;
  std::int64_t scale = 1;
  if (!frac.empty()) {
    auto parsed = parse_digits(frac);
    if (!parsed) return std::nullopt;
    f = *parsed;
    for (std::size_t i = 0; i < frac.size(); ++i) {
      if (__builtin_mul_overflow(scale, 10, &scale)) return std::nullopt;
    }
  }
  std::int64_t num = 0;
  if (__builtin_mul_overflow(w, scale, &num) || __builtin_add_overflow(num, f, &num)) {
    return std::nullopt;
  }
  return make_rational(negative ? -num : num, scale);
}

std::optional<Rational> divide(const Rational& a, const Rational& b) {
  if (b.num == 0) return std::nullopt;
  std::int64_t num = 0;
  std::int64_t den = 0;
  if (__builtin_mul_overflow(a.num, b.den, &num) || __builtin_mul_overflow(a.den, b.num, &den)) {
    return std::nullopt;
  }
  return make_rational(num, den);
}

// Reads one braced group "{...}" at s[pos]; returns its content and advances.
std::optional<std::string_view> braced(std::string_view s, std::size_t& pos) {
  if (pos >= s.size() || s[pos] != '{') return std::nullopt;
  int depth = 0;
  for (std::size_t i = pos; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    if (s[i] == '}' && --depth == 0) {
      std::string_view content = s.substr(pos + 1, i - pos - 1);
      pos = i + 1;
      return content;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Rational> make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    if (num == INT64_MIN || den == INT64_MIN) return std::nullopt;
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return Rational{num / g, den / g};
}

std::optional<Rational> parse_rational(std::string_view text) {
  std::string s = strip_whitespace(normalize_answer(text));
  if (s.empty()) return std::nullopt;

  bool negative = false;
  std::string_view body(s);
  for (std::string_view frac_cmd : {"\\frac", "-\\frac"}) {
    if (body.substr(0, frac_cmd.size()) != frac_cmd) continue;
    negative = frac_cmd.front() == '-';
    std::size_t pos = frac_cmd.size();
    auto top = braced(body, pos);
    auto bottom = braced(body, pos);
    if (!top || !bottom || pos != body.size()) return std::nullopt;
    auto p = parse_decimal(*top);
    auto q = parse_decimal(*bottom);
    if (!p || !q) return std::nullopt;
    auto r = divide(*p, *q);
    if (r && negative) r->num = -r->num;
    return r;
  }

  const std::size_t slash = body.find('/');
  if (slash != std::string_view::npos) {
    auto p = parse_decimal(body.substr(0, slash));
    auto q = parse_decimal(body.substr(slash + 1));
    if (!p || !q) return std::nullopt;
    return divide(*p, *q);
  }
  return parse_decimal(body);
}

std::string normalize_answer(std::string_view text) {
  std::string s(trim(text));
  // Outer math delimiters, possibly doubled.
  while (s.size() >= 2 && s.front() == '$' && s.back() == '$') {
    s = std::string(trim(std::string_view(s).substr(1, s.size() - 2)));
  }
  replace_all(s, "\\left", "");
  replace_all(s, "\\right", "");
  replace_all(s, "{,}", "");
  replace_all(s, "\\!", "");
  replace_all(s, "\\dfrac", "\\frac");
  replace_all(s, "\\tfrac", "\\frac");
  while (!s.empty() && (s.back() == '.' || is_space(s.back()))) s.pop_back();

  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool numeric_equivalent(std::string_view a, std::string_view b) {
  const auto ra = parse_rational(a);
  const auto rb = parse_rational(b);
  if (ra && rb) return *ra == *rb;
  return strip_whitespace(normalize_answer(a)) == strip_whitespace(normalize_answer(b));
}

bool ExactComparator::equivalent(std::string_view candidate,
                                 std::string_view ground_truth) const {
  return strip_whitespace(normalize_answer(candidate)) ==
         strip_whitespace(normalize_answer(ground_truth));
}

bool NumericComparator::equivalent(std::string_view candidate,
                                   std::string_view ground_truth) const {
  return numeric_equivalent(candidate, ground_truth);
}

std::unique_ptr<Comparator> make_comparator(std::string_view id) {
  if (id == "exact") return std::make_unique<ExactComparator>();
  if (id == "numeric") return std::make_unique<NumericComparator>();
  fail(ErrorCode::kValidation,
       "unknown comparator '" + std::string(id) + "' (expected exact or numeric)");
}

RawRewardVector verify_rollout(const ParsedResponse& parsed,
                               std::span<const std::string> ground_truths,
                               const Comparator& comparator) {
  require(ground_truths.size() == parsed.num_subproblems,
          "verify_rollout: expected " + std::to_string(parsed.num_subproblems) +
              " ground truths, got " + std::to_string(ground_truths.size()));
  RawRewardVector out;
  out.rewards.assign(parsed.num_subproblems, 0);
  out.well_formed = parsed.well_formed;
  if (!parsed.well_formed) return out;
  for (std::size_t j = 0; j < parsed.blocks.size(); ++j) {
    const auto& answer = parsed.blocks[j].boxed_answer;
    if (answer && comparator.equivalent(*answer, ground_truths[j])) out.rewards[j] = 1;
  }
  return out;
}

}  // namespace scrl
