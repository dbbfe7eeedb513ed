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


// Synthetic chain tasks and an exactly enumerable tabular softmax policy.
//
// A chain task with modulus m and depth K has hidden answers
//   s_j = (c_j * s_{j-1} + j) mod m,  j = 1..K,
// and the original problem asks for s_K. A rollout emits one answer token
// per position; position j is conditioned on whether the previous answer
// was right ("correct"), wrong ("incorrect") or absent ("none", j = 1).
// Original-prompt rollouts walk the same chain latently and box only the
// last answer. Under the curriculum prompt the correct answer at position j
// gets a fixed logit bonus (the task's scaffold), standing in for the help
// that the subproblem statements provide.

#ifndef SCRL_TOY_HPP_
#define SCRL_TOY_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "scrl/geometry.hpp"
#include "scrl/matrix.hpp"
#include "scrl/objective.hpp"
#include "scrl/tagging.hpp"

namespace scrl {

struct ChainTask {
  std::size_t modulus = 7;
  std::vector<std::size_t> coefficients;  // c_1..c_K
  std::size_t seed_value = 0;             // s_0
  std::vector<double> scaffold_bonus;     // per position; empty means zeros

  std::size_t depth() const { return coefficients.size(); }
  // s_j for j in 0..K.
  std::size_t answer(std::size_t j) const;
  std::vector<std::string> subproblem_truths() const;
  std::string final_truth() const { return std::to_string(answer(depth())); }
  double bonus(std::size_t position) const;  // 0-based position
};

ChainTask random_chain_task(std::size_t modulus, std::size_t depth, std::uint64_t seed);

enum class Bucket : std::size_t { kNone = 0, kCorrect = 1, kIncorrect = 2 };

class TabularPolicy final : public Policy {
 public:
  // All tasks must share modulus and depth. Parameters start at zero.
  explicit TabularPolicy(std::vector<ChainTask> bank);

  std::size_t dimension() const override { return theta_.size(); }
  std::span<const double> parameters() const override { return theta_; }
  void set_parameters(std::span<const double> theta) override;
  std::unique_ptr<Policy> clone() const override;

  std::vector<double> token_log_probs(const Prompt& prompt,
                                      const Response& response) const override;
  void add_token_score(const Prompt& prompt, const Response& response, std::size_t t,
                       double weight, std::span<double> grad) const override;
  std::vector<std::pair<Response, double>> enumerate(const Prompt& prompt,
                                                     std::size_t cap) const override;
  Response sample(const Prompt& prompt, Rng& rng, double temperature) const override;

  // enumerate() with probabilities of sampling at the given temperature.
  std::vector<std::pair<Response, double>> enumerate_at(const Prompt& prompt, std::size_t cap,
                                                        double temperature) const;

  const std::vector<ChainTask>& bank() const { return bank_; }
  std::size_t modulus() const { return modulus_; }
  std::size_t depth() const { return depth_; }

  // Flat index of theta[problem][position][bucket][v].
  std::size_t index(std::size_t problem, std::size_t position, Bucket bucket,
                    std::size_t v) const;
  // Bucket for `position` given the tokens emitted before it.
  Bucket bucket_for(std::size_t problem, std::size_t position,
                    std::span<const std::size_t> tokens) const;
  // Softmax over v in one context, with logits divided by temperature.
  std::vector<double> context_probs(std::size_t problem, PromptKind kind, std::size_t position,
                                    Bucket bucket, double temperature = 1.0) const;

 private:
  std::vector<ChainTask> bank_;
  std::size_t modulus_ = 0;
  std::size_t depth_ = 0;
  std::vector<double> theta_;
};

// Rendered rollout. Token offsets are scalar-position spans of each
// emitted answer's digits.
struct RenderedRollout {
  std::string text;
  std::vector<CharSpan> token_offsets;
};

// Curriculum: "<p1>\boxed{v1}</p1>\n<p2>...". Original: "v1 -> ... -> \boxed{vK}".
RenderedRollout render_rollout(PromptKind kind, std::span<const std::size_t> tokens);

struct SampledRollout {
  Prompt prompt;
  Response response;
  RenderedRollout rendered;
  std::vector<double> old_log_probs;
};

SampledRollout sample_rollout(const TabularPolicy& policy, const Prompt& prompt, Rng& rng,
                              double temperature);

inline constexpr std::size_t kDefaultEnumerationCap = 1u << 20;

// Exact Pr[final answer correct] under the original prompt.
double solve_probability(const TabularPolicy& policy, std::size_t problem,
                         std::size_t cap = kDefaultEnumerationCap);

// Exact Pr[R^(j) = 1] under the curriculum prompt, j = 1..K, where R is the
// progress-corrected reward (every answer up to j right).
std::vector<double> curriculum_probabilities(const TabularPolicy& policy, std::size_t problem,
                                             std::size_t cap = kDefaultEnumerationCap);

// Sampled estimate of either probability, for spaces beyond the cap.
double estimate_solve_probability(const TabularPolicy& policy, const Prompt& prompt,
                                  std::size_t samples, std::uint64_t seed);

struct DeadZoneSpec {
  double delta = 0.01;
  double p_star = 0.4;
  std::size_t depth = 4;
  std::size_t modulus = 7;
  std::size_t group_size = 8;
  std::uint64_t seed = 0;  // task coefficients and s_0
};

struct DeadZoneInstance {
  DeadZoneSpec spec;
  ChainTask task;
  std::vector<double> theta;           // one problem's parameter block
  double scaffold = 0.0;               // logit bonus b
  double p_original = 0.0;             // enumerated
  std::vector<double> p_curriculum;    // enumerated, j = 1..K
};

// A task and policy block with p(original) < delta and every p_j, j < K,
// inside [p_star, 1 - p_star], both checked by enumeration. Throws a
// construction error when infeasible, a contract error when the
// preconditions 0 < delta < p_star <= 0.5 fail.
DeadZoneInstance construct_dead_zone_instance(const DeadZoneSpec& spec);

// Policy over a bank of constructed instances, each keeping its block.
TabularPolicy make_instance_policy(const std::vector<DeadZoneInstance>& instances);

// Orthonormal basis (columns) of the parameter directions one problem can
// move: for every reachable context, m - 1 Helmert vectors orthogonal to the
// all-ones vector. Unreachable contexts and the softmax gauge are dropped.
Matrix reachable_basis(const TabularPolicy& policy, std::size_t problem);

// Same, restricted to one position's reachable contexts.
Matrix position_basis(const TabularPolicy& policy, std::size_t problem, std::size_t position);

// Outcome tables of one problem with scores expressed in `basis` (pass an
// empty matrix for raw parameter coordinates). Outcome probabilities are
// those of sampling at `temperature`; scores are always taken at 1.
OutcomeTable original_outcome_table(const TabularPolicy& policy, std::size_t problem,
                                    const Matrix& basis, std::size_t cap = kDefaultEnumerationCap,
                                    double temperature = 1.0);
// One table per position j: reward R^(j), score of the block-j token only.
std::vector<OutcomeTable> curriculum_position_tables(const TabularPolicy& policy,
                                                     std::size_t problem, const Matrix& basis,
                                                     std::size_t cap = kDefaultEnumerationCap,
                                                     double temperature = 1.0);

// Exact expected loss gradient at theta = theta_old, beta = 0, for one
// problem, with rollouts drawn at `temperature`: GRPO uses G original
// rollouts; SCRL G/2 curriculum and G/2 original rollouts, each half
// normalized on its own. Raw coordinates.
std::vector<double> expected_gradient(const TabularPolicy& policy, std::size_t problem,
                                      Algorithm algo, std::size_t group_size,
                                      double temperature = 1.0,
                                      std::size_t cap = kDefaultEnumerationCap);

struct TrainConfig {
  std::size_t group_size = 8;
  double learning_rate = 1.0;
  std::size_t steps = 200;
  std::uint64_t seed = 0;
  double temperature = 0.6;
  ClipConfig clip;
  std::size_t workers = 1;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  std::string comparator = "numeric";  // make_comparator id
};

struct TraceRow {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double p_original = 0.0;            // mean over the bank, before the update
  std::vector<double> p_curriculum;   // mean over the bank, j = 1..K
  double solvable_ratio_full = 0.0;
  double solvable_ratio_half = 0.0;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  double final_p_original = 0.0;
  std::vector<double> final_p_curriculum;
};

// One group per step on a problem drawn from the bank; a single plain
// gradient step per group. Deterministic given cfg.seed for any worker
// count. policy is updated in place.
TrainResult train(TabularPolicy& policy, const TrainConfig& cfg, Algorithm algo);

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace, std::size_t depth);

}  // namespace scrl

#endif  // SCRL_TOY_HPP_
