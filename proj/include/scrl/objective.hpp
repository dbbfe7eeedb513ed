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


// Clipped surrogate objectives over an abstract differentiable policy.

#ifndef SCRL_OBJECTIVE_HPP_
#define SCRL_OBJECTIVE_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scrl/random.hpp"

namespace scrl {

enum class PromptKind { kOriginal, kCurriculum };

std::string_view prompt_kind_name(PromptKind kind);

struct Prompt {
  std::size_t problem = 0;
  PromptKind kind = PromptKind::kOriginal;
};

// A response is its sequence of policy-emitted token ids.
struct Response {
  std::vector<std::size_t> tokens;

  friend bool operator==(const Response&, const Response&) = default;
};

// Autoregressive policy with a flat parameter vector.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::span<const double> parameters() const = 0;
  virtual void set_parameters(std::span<const double> theta) = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;

  // log pi(o_t | prompt, o_<t) for every t, at temperature 1.
  virtual std::vector<double> token_log_probs(const Prompt& prompt,
                                              const Response& response) const = 0;

  // grad += weight * d log pi(o_t | prompt, o_<t) / d theta.
  virtual void add_token_score(const Prompt& prompt, const Response& response, std::size_t t,
                               double weight, std::span<double> grad) const = 0;

  // Every response with its probability. Throws a construction error when
  // the response space is larger than cap.
  virtual std::vector<std::pair<Response, double>> enumerate(const Prompt& prompt,
                                                             std::size_t cap) const = 0;

  // Draw with logits divided by temperature.
  virtual Response sample(const Prompt& prompt, Rng& rng, double temperature) const = 0;

  double log_prob(const Prompt& prompt, const Response& response) const;
  std::vector<double> score(const Prompt& prompt, const Response& response) const;
};

struct ClipConfig {
  double eps_low = 0.2;
  double eps_high = 0.2;
  double beta = 0.0;
  const Policy* reference = nullptr;  // required when beta > 0
  std::size_t kl_enumeration_cap = 1u << 20;
};

// Throws a contract error unless 0 < eps < 1 and beta >= 0 (and a
// reference is present when beta > 0).
void validate_clip_config(const ClipConfig& cfg);

struct Rollout {
  Prompt prompt;
  Response response;
  std::vector<double> old_log_probs;  // per token, under the behaviour policy
  std::vector<double> advantages;     // per token
};

// A scalar advantage applied to every token (outcome-level credit).
Rollout make_original_rollout(std::size_t problem, Response response,
                              std::vector<double> old_log_probs, double advantage);
Rollout make_curriculum_rollout(std::size_t problem, Response response,
                                std::vector<double> old_log_probs,
                                std::vector<double> token_advantages);

struct RolloutBatch {
  std::vector<Rollout> rollouts;

  std::size_t total_tokens() const;
};

enum class Algorithm { kGrpo, kScrl };

std::string_view algorithm_name(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);  // "grpo" | "scrl"

double importance_ratio(double logp_new, double logp_old);

// min(rho * A, clip(rho, 1 - eps_low, 1 + eps_high) * A)
double clipped_token_term(double rho, double advantage, const ClipConfig& cfg);

// d term / d rho: A where the unclipped branch is selected, else 0.
double clipped_token_slope(double rho, double advantage, const ClipConfig& cfg);

struct KlEstimate {
  double value = 0.0;
  bool exact = true;  // false when the per-sample estimator was used
};

// Mean over the batch's rollouts of KL(pi || ref) at each rollout's prompt.
// Exact by enumeration when both response spaces fit under cap; otherwise
// the mean of log pi(o) - log ref(o) over the sampled responses.
KlEstimate kl_penalty(const Policy& policy, const Policy& reference, const RolloutBatch& batch,
                      std::size_t cap);

// Closed-form KL(p || q) for two finite distributions.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// -(1 / sum L) sum_i sum_t term(rho_it, A_it) + beta * KL, over G original
// rollouts.
double grpo_loss(const RolloutBatch& batch, const Policy& policy, const ClipConfig& cfg);

// Same expression over G/2 curriculum and G/2 original rollouts; the
// denominator counts the tokens of all G.
double scrl_loss(const RolloutBatch& batch, const Policy& policy, const ClipConfig& cfg);

double loss(Algorithm algo, const RolloutBatch& batch, const Policy& policy,
            const ClipConfig& cfg);

// Analytic gradient of loss() with respect to the policy parameters.
std::vector<double> loss_gradient(Algorithm algo, const RolloutBatch& batch,
                                  const Policy& policy, const ClipConfig& cfg);

}  // namespace scrl

#endif  // SCRL_OBJECTIVE_HPP_
