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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "scrl/error.hpp"
#include "scrl/tagging.hpp"
#include "scrl/verification.hpp"

using scrl::normalize_answer;
using scrl::numeric_equivalent;

TEST_CASE("normalize_answer") {
  CHECK(normalize_answer(" $502$ ") == "502");
  CHECK(normalize_answer("\\left(3\\right)") == "(3)");
  CHECK(normalize_answer("1{,}006") == "1006");
  CHECK(normalize_answer("12.") == "12");
  CHECK(normalize_answer("a   +\n b") == "a + b");
  CHECK(normalize_answer("$$x$$") == "x");
  CHECK(normalize_answer("\\dfrac{1}{2}") == "\\frac{1}{2}");
}

TEST_CASE("parse_rational forms") {
  using scrl::Rational;
  CHECK(scrl::parse_rational("42") == Rational{42, 1});
  CHECK(scrl::parse_rational("-0.25") == Rational{-1, 4});
  CHECK(scrl::parse_rational("6/4") == Rational{3, 2});
  CHECK(scrl::parse_rational("\\frac{2}{-4}") == Rational{-1, 2});
  CHECK(scrl::parse_rational("-\\tfrac{3}{9}") == Rational{-1, 3});
  CHECK(scrl::parse_rational(".5") == Rational{1, 2});
  CHECK_FALSE(scrl::parse_rational("1/0").has_value());
  CHECK_FALSE(scrl::parse_rational("2(a+b)").has_value());
  CHECK(scrl::parse_rational("5.") == Rational{5, 1});  // trailing period stripped
  CHECK_FALSE(scrl::parse_rational("99999999999999999999").has_value());
}

TEST_CASE("numeric_equivalent") {
  CHECK(numeric_equivalent("\\frac{1}{2}", "0.5"));
  CHECK(numeric_equivalent("505", "505"));
  CHECK(numeric_equivalent("2(a+b)-3", "2(a + b) - 3"));
  CHECK_FALSE(numeric_equivalent("502", "6"));
  CHECK_FALSE(numeric_equivalent("sqrt(2)", "1.414"));
}

TEST_CASE("rational soundness against cross-multiplication") {
  // Every pair p/q, r/s with |p|, |r| <= 10 and 1 <= q, s <= 50.
  struct Frac {
    long p, q;
    std::string text;
  };
  std::vector<Frac> all;
  for (long q = 1; q <= 50; ++q)
    for (long p = -10; p <= 10; ++p) {
      const std::string text = (q % 3 == 0) ? "\\frac{" + std::to_string(p) + "}{" +
                                                  std::to_string(q) + "}"
                                            : std::to_string(p) + "/" + std::to_string(q);
      all.push_back({p, q, text});
    }
  std::size_t mismatches = 0;
  for (const auto& a : all)
    for (const auto& b : all)
      mismatches += numeric_equivalent(a.text, b.text) != (a.p * b.q == b.p * a.q);
  CHECK(mismatches == 0);
}

TEST_CASE("comparators") {
  const auto exact = scrl::make_comparator("exact");
  const auto numeric = scrl::make_comparator("numeric");
  CHECK(exact->id() == "exact");
  CHECK(exact->equivalent(" 2(a + b) - 3 ", "2(a+b)-3"));
  CHECK_FALSE(exact->equivalent("0.5", "1/2"));
  CHECK(numeric->equivalent("0.5", "1/2"));
  CHECK(exact->equivalent("x", "x"));
  try {
    scrl::make_comparator("fuzzy");
    FAIL("expected throw");
  } catch (const scrl::Error& e) {
    CHECK(e.code() == scrl::ErrorCode::kValidation);
  }
}

TEST_CASE("verify_rollout") {
  const scrl::NumericComparator cmp;
  const std::vector<std::string> truths = {"2(a + b) - 3", "1007", "505", "502"};
  auto response = [](const std::vector<std::string>& answers) {
    std::string out;
    for (std::size_t j = 0; j < answers.size(); ++j) {
      const std::string idx = std::to_string(j + 1);
      out += "<p" + idx + ">work \\boxed{" + answers[j] + "}</p" + idx + ">\n";
    }
    return out;
  };

  SUBCASE("all correct") {
    const auto parsed = scrl::parse_tagged_response(response(truths), 4);
    CHECK(scrl::verify_rollout(parsed, truths, cmp).rewards == std::vector<int>{1, 1, 1, 1});
  }
  SUBCASE("third wrong") {
    const auto parsed = scrl::parse_tagged_response(response({"2(a+b)-3", "1007", "6", "502"}), 4);
    const auto r = scrl::verify_rollout(parsed, truths, cmp);
    CHECK(r.well_formed);
    CHECK(r.rewards == std::vector<int>{1, 1, 0, 1});
  }
  SUBCASE("malformed tags zero everything") {
    const auto parsed = scrl::parse_tagged_response("<p1>\\boxed{1}</p1>", 4);
    const auto r = scrl::verify_rollout(parsed, truths, cmp);
    CHECK_FALSE(r.well_formed);
    CHECK(r.rewards == std::vector<int>{0, 0, 0, 0});
  }
  SUBCASE("missing box zeroes only that entry") {
    const std::string text =
        "<p1>\\boxed{2(a+b)-3}</p1><p2>1007</p2><p3>\\boxed{505}</p3><p4>\\boxed{502}</p4>";
    const auto r = scrl::verify_rollout(scrl::parse_tagged_response(text, 4), truths, cmp);
    CHECK(r.rewards == std::vector<int>{1, 0, 1, 1});
  }
  SUBCASE("ground-truth count mismatch") {
    const auto parsed = scrl::parse_tagged_response(response(truths), 4);
    const std::vector<std::string> short_truths = {"1"};
    CHECK_THROWS_AS(scrl::verify_rollout(parsed, short_truths, cmp), scrl::Error);
  }
}
