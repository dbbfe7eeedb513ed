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


// Gradient information matrices over finite outcome distributions.
//
// An OutcomeTable lists every outcome of one rollout with its probability,
// its binary reward and its score vector (possibly already expressed in a
// reduced basis). Group-level quantities assume G i.i.d. rollouts whose
// advantages are group-normalized binary rewards.

#ifndef SCRL_GEOMETRY_HPP_
#define SCRL_GEOMETRY_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scrl/matrix.hpp"

namespace scrl {

struct OutcomeTable {
  std::vector<double> prob;  // sums to 1
  std::vector<int> reward;   // 0 or 1
  Matrix scores;             // one row per outcome

  std::size_t size() const { return prob.size(); }
  std::size_t dimension() const { return scores.cols(); }
  double success_probability() const;
  // Throws a contract error on shape mismatch, non-binary rewards or
  // probabilities that do not sum to 1 within 1e-9.
  void validate() const;
};

// Normalized advantage of a rollout with the given reward in a group of G
// binary rewards holding `successes` ones: sqrt((G-k)/k) for a success,
// -sqrt(k/(G-k)) for a failure, 0 when the group is degenerate.
double binary_group_advantage(int reward, std::size_t successes, std::size_t group_size);

// E[A_1^2 | r_1 = r] and E[A_1 | r_1 = r] for r in {0, 1}, with the other
// G - 1 rewards i.i.d. Bernoulli(p).
std::array<double, 2> conditional_advantage_second_moment(double p, std::size_t group_size);
std::array<double, 2> conditional_advantage_mean(double p, std::size_t group_size);

// F = E[A_1^2 s_1 s_1^T] computed as sum_r w_r E[s s^T 1{r}].
Matrix egim_factorized(const OutcomeTable& table, std::size_t group_size);

// The same expectation by brute force over all |O|^G outcome tuples, with
// per-tuple group normalization. Throws a construction error when |O|^G
// exceeds tuple_cap. Tuples are split across `workers` threads and merged
// in index order.
Matrix egim_enumerated(const OutcomeTable& table, std::size_t group_size,
                       std::uint64_t tuple_cap, std::size_t workers = 1);

struct MonteCarloEgim {
  Matrix mean;
  Matrix standard_error;
  std::size_t groups = 0;
  std::uint64_t seed = 0;
};

// Averages (1/G) sum_i A_i^2 s_i s_i^T over n sampled groups. Group g draws
// from an RNG stream keyed by (seed, g).
MonteCarloEgim egim_monte_carlo(const OutcomeTable& table, std::size_t group_size,
                                std::size_t groups, std::uint64_t seed);

// (1/K) sum_j F^(j) with each F^(j) from egim_factorized.
Matrix lifted_egim(std::span<const OutcomeTable> per_position, std::size_t group_size);

// E[A_1 s_1]: the per-rollout expected advantage-weighted score.
std::vector<double> expected_advantage_score(const OutcomeTable& table, std::size_t group_size);

// All eigenvalues of a symmetric matrix, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

// Smallest eigenvalue. Throws a contract error when m is not square or its
// asymmetry exceeds 1e-10.
double lambda_min(const Matrix& m);

// G * delta * C_A^2 * B_s^2
double dead_zone_bound(std::size_t group_size, double delta, double c_a, double b_s);

// 1 - p^G - (1 - p)^G
double q_min(double p_star, std::size_t group_size);

// (1/K) * q_min(p_star, G) * sigma_min_sq
double recovery_constant(double p_star, std::size_t group_size, double sigma_min_sq,
                         std::size_t num_subproblems);

// Pr[a group of G Bernoulli(p) rewards is not all equal], summed over all
// 2^G reward patterns.
double nondegenerate_probability(double p, std::size_t group_size);

// Largest score norm over outcomes with positive probability.
double max_score_norm(const OutcomeTable& table);

struct ConditionalMoments {
  std::array<Matrix, 2> second_moment;  // E[s s^T | r]
  std::array<double, 2> probability;    // Pr[r]
  std::array<double, 2> lambda_min;
  double sigma_min_sq = 0.0;            // min over r of lambda_min
};

// Throws a construction error when either reward value has probability 0.
ConditionalMoments conditional_second_moments(const OutcomeTable& table);

// min over r of E[(v^T s)^2 | r] for one direction v.
double directional_conditional_moment(const OutcomeTable& table, std::span<const double> v);

}  // namespace scrl

#endif  // SCRL_GEOMETRY_HPP_
