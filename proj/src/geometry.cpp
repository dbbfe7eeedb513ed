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


#include "scrl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "scrl/credit.hpp"
#include "scrl/error.hpp"
#include "scrl/random.hpp"

namespace scrl {
namespace {

double binomial_pmf(std::size_t n, std::size_t k, double p) {
  double coeff = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    coeff = coeff * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return coeff * std::pow(p, static_cast<double>(k)) *
         std::pow(1.0 - p, static_cast<double>(n - k));
}

// sum over outcomes with reward r of prob * s s^T
Matrix reward_moment(const OutcomeTable& table, int r) {
  const std::size_t d = table.dimension();
  Matrix m(d, d);
  for (std::size_t o = 0; o < table.size(); ++o) {
    if (table.reward[o] != r || table.prob[o] == 0.0) continue;
    m.add_outer(table.scores.row(o), table.prob[o]);
  }
  return m;
}

}  // namespace

double OutcomeTable::success_probability() const {
  double p = 0.0;
  for (std::size_t o = 0; o < prob.size(); ++o)
    if (reward[o] == 1) p += prob[o];
  return p;
}

void OutcomeTable::validate() const {
  require(!prob.empty(), "outcome table is empty");
  require(reward.size() == prob.size() && scores.rows() == prob.size(),
          "outcome table columns have different lengths");
  double total = 0.0;
  for (std::size_t o = 0; o < prob.size(); ++o) {
    require(prob[o] >= 0.0, "outcome probabilities must be non-negative");
    require(reward[o] == 0 || reward[o] == 1, "outcome rewards must be binary");
    total += prob[o];
  }
  require(std::fabs(total - 1.0) <= 1e-9,
          "outcome probabilities sum to " + std::to_string(total) + ", not 1");
}

double binary_group_advantage(int reward, std::size_t successes, std::size_t group_size) {
  const double g = static_cast<double>(group_size);
  const double k = static_cast<double>(successes);
  if (successes == 0 || successes == group_size) return 0.0;
  return reward ? std::sqrt((g - k) / k) : -std::sqrt(k / (g - k));
}

std::array<double, 2> conditional_advantage_second_moment(double p, std::size_t group_size) {
  require(group_size >= 2, "group size must be at least 2");
  std::array<double, 2> w{0.0, 0.0};
  for (int r = 0; r <= 1; ++r) {
    for (std::size_t others = 0; others < group_size; ++others) {
      const double a = binary_group_advantage(r, others + r, group_size);
      w[r] += binomial_pmf(group_size - 1, others, p) * a * a;
    }
  }
  return w;
}

std::array<double, 2> conditional_advantage_mean(double p, std::size_t group_size) {
  require(group_size >= 2, "group size must be at least 2");
  std::array<double, 2> w{0.0, 0.0};
  for (int r = 0; r <= 1; ++r) {
    for (std::size_t others = 0; others < group_size; ++others) {
      w[r] += binomial_pmf(group_size - 1, others, p) *
              binary_group_advantage(r, others + r, group_size);
    }
  }
  return w;
}

Matrix egim_factorized(const OutcomeTable& table, std::size_t group_size) {
  table.validate();
  const auto w = conditional_advantage_second_moment(table.success_probability(), group_size);
  Matrix f = reward_moment(table, 0);
  f *= w[0];
  Matrix f1 = reward_moment(table, 1);
  f1 *= w[1];
  f += f1;
  return f;
}

Matrix egim_enumerated(const OutcomeTable& table, std::size_t group_size,
                       std::uint64_t tuple_cap, std::size_t workers) {
  table.validate();
  require(group_size >= 2, "group size must be at least 2");
  const std::uint64_t n_outcomes = table.size();
  std::uint64_t tuples = 1;
  for (std::size_t i = 0; i < group_size; ++i) {
    if (tuples > tuple_cap / n_outcomes) {
      fail(ErrorCode::kConstruction,
           "outcome-tuple space exceeds the enumeration cap of " + std::to_string(tuple_cap) +
               "; use Monte Carlo mode");
    }
    tuples *= n_outcomes;
  }
  workers = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, tuples));

  // Per-outcome weight W[o] = sum over tuples and slots i holding o of
  // Pr[tuple] * A_i^2 / G. F is then sum_o W[o] s_o s_o^T.
  const std::size_t g = group_size;
  auto run = [&](std::uint64_t begin, std::uint64_t end, std::vector<double>& weight) {
    std::vector<std::size_t> idx(g);
    std::vector<double> rewards(g);
    for (std::uint64_t t = begin; t < end; ++t) {
      std::uint64_t rest = t;
      double prob = 1.0;
      for (std::size_t i = 0; i < g; ++i) {
        idx[i] = static_cast<std::size_t>(rest % n_outcomes);
        rest /= n_outcomes;
        prob *= table.prob[idx[i]];
        rewards[i] = table.reward[idx[i]];
      }
      if (prob == 0.0) continue;
      const std::vector<double> adv = normalize_group(rewards);
      for (std::size_t i = 0; i < g; ++i) {
        weight[idx[i]] += prob * adv[i] * adv[i] / static_cast<double>(g);
      }
    }
  };

  std::vector<std::vector<double>> partial(workers, std::vector<double>(n_outcomes, 0.0));
  if (workers == 1) {
    run(0, tuples, partial[0]);
  } else {
    std::vector<std::thread> threads;
    const std::uint64_t chunk = (tuples + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::uint64_t b = std::min(tuples, w * chunk);
      const std::uint64_t e = std::min(tuples, b + chunk);
      threads.emplace_back(run, b, e, std::ref(partial[w]));
    }
    for (auto& th : threads) th.join();
  }
  std::vector<double> weight(n_outcomes, 0.0);
  for (const auto& part : partial)
    for (std::size_t o = 0; o < n_outcomes; ++o) weight[o] += part[o];

  const std::size_t d = table.dimension();
  Matrix f(d, d);
  for (std::size_t o = 0; o < n_outcomes; ++o) f.add_outer(table.scores.row(o), weight[o]);
  return f;
}

MonteCarloEgim egim_monte_carlo(const OutcomeTable& table, std::size_t group_size,
                                std::size_t groups, std::uint64_t seed) {
  table.validate();
  require(group_size >= 2, "group size must be at least 2");
  require(groups >= 2, "Monte Carlo needs at least two groups");
  const std::size_t d = table.dimension();
  std::vector<double> cdf(table.size());
  double acc = 0.0;
  for (std::size_t o = 0; o < table.size(); ++o) cdf[o] = (acc += table.prob[o]);

  Matrix sum(d, d), sum_sq(d, d), x(d, d);
  std::vector<double> rewards(group_size);
  std::vector<std::size_t> idx(group_size);
  for (std::size_t grp = 0; grp < groups; ++grp) {
    Rng rng(stream_key({seed, grp}));
    for (std::size_t i = 0; i < group_size; ++i) {
      const double u = rng.uniform() * acc;
      idx[i] = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                     table.size() - 1);
      rewards[i] = table.reward[idx[i]];
    }
    const std::vector<double> adv = normalize_group(rewards);
    x = Matrix(d, d);
    for (std::size_t i = 0; i < group_size; ++i) {
      x.add_outer(table.scores.row(idx[i]), adv[i] * adv[i] / static_cast<double>(group_size));
    }
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        sum(r, c) += x(r, c);
        sum_sq(r, c) += x(r, c) * x(r, c);
      }
  }
  MonteCarloEgim out;
  out.groups = groups;
  out.seed = seed;
  out.mean = Matrix(d, d);
  out.standard_error = Matrix(d, d);
  const double n = static_cast<double>(groups);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double mean = sum(r, c) / n;
      const double var = std::max(0.0, (sum_sq(r, c) / n - mean * mean) * n / (n - 1.0));
      out.mean(r, c) = mean;
      out.standard_error(r, c) = std::sqrt(var / n);
    }
  return out;
}

Matrix lifted_egim(std::span<const OutcomeTable> per_position, std::size_t group_size) {
  require(!per_position.empty(), "lifted EGIM needs at least one position");
  const std::size_t d = per_position.front().dimension();
  Matrix f(d, d);
  for (const auto& table : per_position) {
    require(table.dimension() == d, "lifted EGIM positions disagree on dimension");
    f += egim_factorized(table, group_size);
  }
  f *= 1.0 / static_cast<double>(per_position.size());
  return f;
}

std::vector<double> expected_advantage_score(const OutcomeTable& table, std::size_t group_size) {
  table.validate();
  const auto mean_adv = conditional_advantage_mean(table.success_probability(), group_size);
  std::vector<double> out(table.dimension(), 0.0);
  for (std::size_t o = 0; o < table.size(); ++o) {
    const double w = table.prob[o] * mean_adv[table.reward[o]];
    if (w == 0.0) continue;
    const auto s = table.scores.row(o);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * s[i];
  }
  return out;
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
  require(m.rows() == m.cols(), "eigenvalues need a square matrix");
  const Eigen::Index n = static_cast<Eigen::Index>(m.rows());
  if (n == 0) return {};
  Eigen::MatrixXd a(n, n);
  // Symmetrize to remove rounding-level asymmetry.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = 0.5 * (m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +
                       m(static_cast<std::size_t>(j), static_cast<std::size_t>(i)));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, "eigenvalue solver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  return std::vector<double>(ev.data(), ev.data() + n);
}

double lambda_min(const Matrix& m) {
  require(m.rows() == m.cols() && m.rows() > 0, "lambda_min needs a non-empty square matrix");
  require(m.max_abs_asymmetry() <= 1e-10, "lambda_min: matrix is not symmetric");
  return symmetric_eigenvalues(m).front();
}

double dead_zone_bound(std::size_t group_size, double delta, double c_a, double b_s) {
  return static_cast<double>(group_size) * delta * c_a * c_a * b_s * b_s;
}

double q_min(double p_star, std::size_t group_size) {
  const double g = static_cast<double>(group_size);
  return 1.0 - std::pow(p_star, g) - std::pow(1.0 - p_star, g);
}

double recovery_constant(double p_star, std::size_t group_size, double sigma_min_sq,
                         std::size_t num_subproblems) {
  require(p_star > 0.0 && p_star <= 0.5, "recovery_constant: p_star must lie in (0, 0.5]");
  require(group_size >= 2, "recovery_constant: G must be at least 2");
  require(num_subproblems >= 1, "recovery_constant: K must be at least 1");
  return q_min(p_star, group_size) * sigma_min_sq / static_cast<double>(num_subproblems);
}

double nondegenerate_probability(double p, std::size_t group_size) {
  require(group_size >= 1 && group_size < 31, "nondegenerate_probability: G out of range");
  double total = 0.0;
  const std::uint32_t all = (1u << group_size) - 1;
  for (std::uint32_t mask = 1; mask < all; ++mask) {
    const int k = __builtin_popcount(mask);
    double w = 1.0;
    for (int i = 0; i < k; ++i) w *= p;
    for (std::size_t i = k; i < group_size; ++i) w *= 1.0 - p;
    total += w;
  }
  return total;
}

double max_score_norm(const OutcomeTable& table) {
  double best = 0.0;
  for (std::size_t o = 0; o < table.size(); ++o) {
    if (table.prob[o] > 0.0) best = std::max(best, norm2(table.scores.row(o)));
  }
  return best;
}

ConditionalMoments conditional_second_moments(const OutcomeTable& table) {
  table.validate();
  ConditionalMoments out;
  for (int r = 0; r <= 1; ++r) {
    double pr = 0.0;
    for (std::size_t o = 0; o < table.size(); ++o)
      if (table.reward[o] == r) pr += table.prob[o];
    if (pr <= 0.0) {
      fail(ErrorCode::kConstruction, "conditional event r = " + std::to_string(r) +
                                         " has probability 0; identifiability is unverifiable");
    }
    out.probability[r] = pr;
    out.second_moment[r] = reward_moment(table, r);
    out.second_moment[r] *= 1.0 / pr;
    out.lambda_min[r] = lambda_min(out.second_moment[r]);
  }
  out.sigma_min_sq = std::min(out.lambda_min[0], out.lambda_min[1]);
  return out;
}

double directional_conditional_moment(const OutcomeTable& table, std::span<const double> v) {
  table.validate();
  std::array<double, 2> moment{0.0, 0.0}, pr{0.0, 0.0};
  for (std::size_t o = 0; o < table.size(); ++o) {
    const auto s = table.scores.row(o);
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * s[i];
    moment[table.reward[o]] += table.prob[o] * dot * dot;
    pr[table.reward[o]] += table.prob[o];
  }
  if (pr[0] <= 0.0 || pr[1] <= 0.0) {
    fail(ErrorCode::kConstruction, "a conditional reward event has probability 0");
  }
  return std::min(moment[0] / pr[0], moment[1] / pr[1]);
}

}  // namespace scrl
