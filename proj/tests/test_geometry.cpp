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

#include <cmath>
#include <random>
#include <vector>

#include "scrl/error.hpp"
#include "scrl/geometry.hpp"
#include "scrl/toy.hpp"

using doctest::Approx;
using namespace scrl;

namespace {

// Number of eigenvalues below lambda, from the signs of the LDL^T pivots
// of (F - lambda I) (Sylvester's law of inertia).
std::size_t count_below(const Matrix& f, double lambda) {
  const std::size_t n = f.rows();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = f(i, j) - (i == j ? lambda : 0.0);
  std::size_t negative = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double pivot = a[k][k];
    if (pivot == 0.0) pivot = -1e-300;
    if (pivot < 0.0) ++negative;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = a[i][k] / pivot;
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= factor * a[k][j];
    }
  }
  return negative;
}

double bisect_smallest(const Matrix& f) {
  double lo = -1.0, hi = 1.0;
  for (std::size_t i = 0; i < f.rows(); ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < f.cols(); ++j)
      if (j != i) radius += std::fabs(f(i, j));
    lo = std::min(lo, f(i, i) - radius);
    hi = std::max(hi, f(i, i) + radius);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (count_below(f, mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

OutcomeTable random_table(std::mt19937_64& gen, std::size_t outcomes, std::size_t dim) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  OutcomeTable t;
  t.scores = Matrix(outcomes, dim);
  double total = 0.0;
  for (std::size_t o = 0; o < outcomes; ++o) {
    t.prob.push_back(u(gen));
    total += t.prob.back();
    t.reward.push_back(o == 0 ? 1 : (o == 1 ? 0 : static_cast<int>(gen() % 2)));
    for (std::size_t d = 0; d < dim; ++d) t.scores(o, d) = n(gen);
  }
  for (double& p : t.prob) p /= total;
  return t;
}

// Two-armed softmax bandit at logits (0, 0): arm 0 is correct.
OutcomeTable bandit_table(bool reduced) {
  OutcomeTable t;
  t.prob = {0.5, 0.5};
  t.reward = {1, 0};
  if (reduced) {
    const double c = 0.5 * std::sqrt(2.0);  // (e_a - pi) projected on (1, -1)/sqrt 2
    t.scores = Matrix(2, 1);
    t.scores(0, 0) = c;
    t.scores(1, 0) = -c;
  } else {
    t.scores = Matrix(2, 2);
    t.scores(0, 0) = 0.5;
    t.scores(0, 1) = -0.5;
    t.scores(1, 0) = -0.5;
    t.scores(1, 1) = 0.5;
  }
  return t;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) worst = std::max(worst, std::fabs(a(i, j) - b(i, j)));
  return worst;
}

}  // namespace

TEST_CASE("lambda_min on simple matrices") {
  CHECK(lambda_min(Matrix::identity(3)) == Approx(1.0).epsilon(1e-12));
  Matrix d(3, 3);
  d(0, 0) = 0.1;
  d(1, 1) = 2.0;
  d(2, 2) = 5.0;
  CHECK(lambda_min(d) == Approx(0.1).epsilon(1e-12));
  Matrix asym = Matrix::identity(2);
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(lambda_min(asym), Error);
  CHECK_THROWS_AS(lambda_min(Matrix(2, 3)), Error);
}

TEST_CASE("lambda_min matches an inertia bisection oracle on random PSD matrices") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 3 + trial % 6;
    Matrix a(rows, 6);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < 6; ++j) a(i, j) = n(gen);
    const Matrix f = a.transpose() * a;
    CHECK(std::fabs(lambda_min(f) - bisect_smallest(f)) <= 1e-8);
    const auto eig = symmetric_eigenvalues(f);
    double trace = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < 6; ++i) trace += f(i, i);
    for (double e : eig) sum += e;
    CHECK(sum == Approx(trace).epsilon(1e-10));
  }
}

TEST_CASE("EGIM of a degenerate policy is exactly zero") {
  std::mt19937_64 gen(3);
  for (int reward : {0, 1}) {
    OutcomeTable t = random_table(gen, 4, 3);
    for (int& r : t.reward) r = reward;
    const Matrix exact = egim_factorized(t, 6);
    const Matrix brute = egim_enumerated(t, 4, 1 << 20);
    for (double v : exact.values()) CHECK(v == 0.0);
    for (double v : brute.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("two-outcome bandit at p = 0.5, G = 2 by hand") {
  // (a,a) and (b,b) are degenerate. The mixed tuples (a,b) and (b,a) each
  // have probability 1/4 and A_1^2 = 1, so F = (s_a s_a^T + s_b s_b^T) / 4.
  const OutcomeTable t = bandit_table(false);
  const Matrix f = egim_factorized(t, 2);
  CHECK(f(0, 0) == Approx(0.125).epsilon(1e-15));
  CHECK(f(0, 1) == Approx(-0.125).epsilon(1e-15));
  CHECK(f(1, 1) == Approx(0.125).epsilon(1e-15));
  CHECK(max_abs_diff(f, egim_enumerated(t, 2, 16)) <= 1e-15);
  CHECK(nondegenerate_probability(0.5, 2) == 0.5);
}

TEST_CASE("factorized EGIM equals brute-force tuple enumeration") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t outcomes = 2 + trial % 3;
    const std::size_t g = 2 + trial % 4;
    const OutcomeTable t = random_table(gen, outcomes, 3);
    const Matrix exact = egim_factorized(t, g);
    const Matrix brute = egim_enumerated(t, g, 1 << 20);
    CHECK(max_abs_diff(exact, brute) <= 1e-13);
    const Matrix threaded = egim_enumerated(t, g, 1 << 20, 3);
    CHECK(max_abs_diff(brute, threaded) <= 1e-12);
  }
  std::mt19937_64 g2(1);
  CHECK_THROWS_AS(egim_enumerated(random_table(g2, 10, 2), 8, 1000), Error);
}

TEST_CASE("conditional advantage moments against pattern enumeration") {
  for (std::size_t g = 2; g <= 10; ++g) {
    for (double p : {0.0, 0.03, 0.4, 0.5, 0.91, 1.0}) {
      const auto m2 = conditional_advantage_second_moment(p, g);
      const auto m1 = conditional_advantage_mean(p, g);
      for (int r : {0, 1}) {
        double e2 = 0.0, e1 = 0.0;
        for (std::uint32_t mask = 0; mask < (1u << (g - 1)); ++mask) {
          const std::size_t ones = __builtin_popcount(mask);
          const double w = std::pow(p, ones) * std::pow(1 - p, g - 1 - ones);
          const double a = binary_group_advantage(r, ones + r, g);
          e2 += w * a * a;
          e1 += w * a;
        }
        CHECK(m2[r] == Approx(e2).epsilon(1e-12));
        CHECK(m1[r] == Approx(e1).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("expected advantage-weighted score against enumeration") {
  std::mt19937_64 gen(9);
  const OutcomeTable t = random_table(gen, 3, 2);
  for (std::size_t g : {2, 3, 5}) {
    // Brute force over all outcome tuples of the other G - 1 rollouts.
    std::vector<double> brute(2, 0.0);
    std::size_t tuples = 1;
    for (std::size_t i = 0; i < g; ++i) tuples *= t.size();
    for (std::size_t code = 0; code < tuples; ++code) {
      std::size_t c = code, successes = 0;
      double w = 1.0;
      std::size_t first = 0;
      for (std::size_t i = 0; i < g; ++i) {
        const std::size_t o = c % t.size();
        c /= t.size();
        if (i == 0) first = o;
        w *= t.prob[o];
        successes += t.reward[o];
      }
      const double a = binary_group_advantage(t.reward[first], successes, g);
      for (std::size_t d = 0; d < 2; ++d) brute[d] += w * a * t.scores(first, d);
    }
    const auto got = expected_advantage_score(t, g);
    for (std::size_t d = 0; d < 2; ++d) CHECK(got[d] == Approx(brute[d]).epsilon(1e-12));
  }
}

TEST_CASE("Monte Carlo EGIM agrees with the exact matrix within 3 standard errors") {
  std::mt19937_64 gen(21);
  const OutcomeTable t = random_table(gen, 3, 2);
  const Matrix exact = egim_factorized(t, 4);
  const MonteCarloEgim mc = egim_monte_carlo(t, 4, 1000000, 42);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(mc.standard_error(i, j) > 0.0);
      CHECK(std::fabs(mc.mean(i, j) - exact(i, j)) <= 3.0 * mc.standard_error(i, j));
    }
  }
  const MonteCarloEgim again = egim_monte_carlo(t, 4, 1000, 42);
  const MonteCarloEgim same = egim_monte_carlo(t, 4, 1000, 42);
  CHECK(max_abs_diff(again.mean, same.mean) == 0.0);
}

TEST_CASE("bound arithmetic") {
  CHECK(dead_zone_bound(8, 0.01, std::sqrt(7.0), 1.0) == Approx(0.56).epsilon(1e-14));
  CHECK(dead_zone_bound(8, 0.0, std::sqrt(7.0), 1.0) == 0.0);
  CHECK(dead_zone_bound(6, 0.02, 2.0, 3.0) == Approx(2.0 * dead_zone_bound(6, 0.01, 2.0, 3.0)));
  CHECK(recovery_constant(0.5, 8, 1.0, 4) == Approx(0.25 * 127.0 / 128.0).epsilon(1e-15));
  CHECK(recovery_constant(0.5, 8, 1.0, 4) == Approx(0.248047).epsilon(1e-6));
  CHECK(q_min(0.5, 2) == Approx(0.5).epsilon(1e-15));
  CHECK(q_min(1e-9, 8) < 1e-7);
  for (std::size_t g = 2; g <= 12; ++g)
    for (double p : {0.0, 1e-4, 0.2, 0.5, 0.77, 1.0})
      CHECK(nondegenerate_probability(p, g) ==
            Approx(1 - std::pow(p, g) - std::pow(1 - p, g)).epsilon(1e-12));
}

TEST_CASE("conditional second moments") {
  OutcomeTable zero = bandit_table(false);
  zero.scores = Matrix(2, 2);
  CHECK(conditional_second_moments(zero).sigma_min_sq == 0.0);

  // Reduced coordinates: s = +-1/sqrt 2, so E[s^2 | r] = 0.5 for both r.
  const ConditionalMoments cm = conditional_second_moments(bandit_table(true));
  CHECK(cm.probability[0] == 0.5);
  CHECK(cm.second_moment[1](0, 0) == Approx(0.5).epsilon(1e-15));
  CHECK(cm.sigma_min_sq == Approx(0.5).epsilon(1e-15));
  const double v[] = {1.0};
  CHECK(directional_conditional_moment(bandit_table(true), v) == Approx(0.5));

  OutcomeTable never = bandit_table(true);
  never.reward = {1, 1};
  CHECK_THROWS_AS(conditional_second_moments(never), Error);
}

TEST_CASE("lifted EGIM collapses to the original one for K = 1") {
  ChainTask task = random_chain_task(5, 1, 3);
  TabularPolicy policy({task});
  std::vector<double> theta(policy.dimension());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = 0.3 * std::sin(3.0 * i);
  policy.set_parameters(theta);
  const Matrix basis = reachable_basis(policy, 0);
  const auto columns = curriculum_position_tables(policy, 0, basis);
  const Matrix lifted = lifted_egim(columns, 4);
  const Matrix original = egim_factorized(original_outcome_table(policy, 0, basis), 4);
  CHECK(max_abs_diff(lifted, original) <= 1e-15);
}

TEST_CASE("lifted EGIM of degenerate positions is zero") {
  std::mt19937_64 gen(4);
  std::vector<OutcomeTable> cols;
  for (int j = 0; j < 3; ++j) {
    cols.push_back(random_table(gen, 3, 2));
    for (int& r : cols.back().reward) r = 0;
  }
  const Matrix f = lifted_egim(cols, 6);
  for (double v : f.values()) CHECK(v == 0.0);
}
