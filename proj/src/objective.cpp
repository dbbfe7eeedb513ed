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


#include "scrl/objective.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "scrl/error.hpp"

namespace scrl {

std::string_view prompt_kind_name(PromptKind kind) {
  return kind == PromptKind::kCurriculum ? "curriculum" : "original";
}

double Policy::log_prob(const Prompt& prompt, const Response& response) const {
  double total = 0.0;
  for (double lp : token_log_probs(prompt, response)) total += lp;
  return total;
}

std::vector<double> Policy::score(const Prompt& prompt, const Response& response) const {
  std::vector<double> grad(dimension(), 0.0);
  for (std::size_t t = 0; t < response.tokens.size(); ++t) {
    add_token_score(prompt, response, t, 1.0, grad);
  }
  return grad;
}

void validate_clip_config(const ClipConfig& cfg) {
  require(cfg.eps_low > 0.0 && cfg.eps_low < 1.0, "clip eps_low must lie in (0, 1)");
  require(cfg.eps_high > 0.0 && cfg.eps_high < 1.0, "clip eps_high must lie in (0, 1)");
  require(cfg.beta >= 0.0, "KL coefficient must be non-negative");
  require(cfg.beta == 0.0 || cfg.reference != nullptr,
          "a reference policy is required when the KL coefficient is positive");
}

Rollout make_original_rollout(std::size_t problem, Response response,
                              std::vector<double> old_log_probs, double advantage) {
  Rollout r;
  r.prompt = {problem, PromptKind::kOriginal};
  r.advantages.assign(response.tokens.size(), advantage);
  r.response = std::move(response);
  r.old_log_probs = std::move(old_log_probs);
  return r;
}

Rollout make_curriculum_rollout(std::size_t problem, Response response,
                                std::vector<double> old_log_probs,
                                std::vector<double> token_advantages) {
  Rollout r;
  r.prompt = {problem, PromptKind::kCurriculum};
  r.response = std::move(response);
  r.old_log_probs = std::move(old_log_probs);
  r.advantages = std::move(token_advantages);
  return r;
}

std::size_t RolloutBatch::total_tokens() const {
  std::size_t n = 0;
  for (const auto& r : rollouts) n += r.response.tokens.size();
  return n;
}

std::string_view algorithm_name(Algorithm algo) {
  return algo == Algorithm::kScrl ? "scrl" : "grpo";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "grpo") return Algorithm::kGrpo;
  if (name == "scrl") return Algorithm::kScrl;
  fail(ErrorCode::kValidation, "unknown algorithm '" + std::string(name) + "' (grpo or scrl)");
}

double importance_ratio(double logp_new, double logp_old) {
  require(std::isfinite(logp_new) && std::isfinite(logp_old),
          "importance_ratio: log-probabilities must be finite");
  return std::exp(logp_new - logp_old);
}

double clipped_token_term(double rho, double advantage, const ClipConfig& cfg) {
  require(rho >= 0.0, "clipped_token_term: ratio must be non-negative");
  const double clipped = std::clamp(rho, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high);
  return std::min(rho * advantage, clipped * advantage);
}

double clipped_token_slope(double rho, double advantage, const ClipConfig& cfg) {
  if (advantage > 0.0) return rho <= 1.0 + cfg.eps_high ? advantage : 0.0;
  if (advantage < 0.0) return rho >= 1.0 - cfg.eps_low ? advantage : 0.0;
  return 0.0;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), "kl_divergence: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

namespace {

void check_rollout(const Rollout& r) {
  const std::size_t n = r.response.tokens.size();
  require(r.old_log_probs.size() == n, "rollout old log-prob count differs from token count");
  require(r.advantages.size() == n, "rollout advantage count differs from token count");
}

void check_batch(Algorithm algo, const RolloutBatch& batch) {
  require(!batch.rollouts.empty(), "empty rollout batch");
  std::size_t curriculum = 0;
  for (const auto& r : batch.rollouts) {
    check_rollout(r);
    curriculum += r.prompt.kind == PromptKind::kCurriculum;
  }
  if (algo == Algorithm::kGrpo) {
    require(curriculum == 0, "GRPO batches hold original-prompt rollouts only");
  } else {
    const std::size_t g = batch.rollouts.size();
    require(g % 2 == 0, "SCRL batches need an even group size");
    require(curriculum == g / 2, "SCRL batches hold G/2 curriculum and G/2 original rollouts");
  }
}

// Per-prompt KL and its gradient, exact by enumeration. Returns false when
// either response space exceeds the cap.
bool exact_prompt_kl(const Policy& policy, const Policy& reference, const Prompt& prompt,
                     std::size_t cap, double& value, std::vector<double>* grad) {
  std::vector<std::pair<Response, double>> outcomes;
  try {
    outcomes = policy.enumerate(prompt, cap);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConstruction) return false;
    throw;
  }
  value = 0.0;
  for (const auto& [response, prob] : outcomes) {
    if (prob <= 0.0) continue;
    const double diff = policy.log_prob(prompt, response) - reference.log_prob(prompt, response);
    value += prob * diff;
    if (grad) {
      // d/dtheta sum_o pi(o) (log pi(o) - log ref(o)) = sum_o pi(o) s(o) diff
      for (std::size_t t = 0; t < response.tokens.size(); ++t) {
        policy.add_token_score(prompt, response, t, prob * diff, *grad);
      }
    }
  }
  return true;
}

struct KlWithGradient {
  KlEstimate estimate;
  std::vector<double> grad;
};

KlWithGradient kl_term(const Policy& policy, const Policy& reference, const RolloutBatch& batch,
                       std::size_t cap, bool want_grad) {
  KlWithGradient out;
  if (want_grad) out.grad.assign(policy.dimension(), 0.0);
  const double n = static_cast<double>(batch.rollouts.size());

  // Exact path: cache per distinct prompt, weight by rollout count.
  std::map<std::pair<std::size_t, int>, std::size_t> counts;
  for (const auto& r : batch.rollouts) {
    ++counts[{r.prompt.problem, static_cast<int>(r.prompt.kind)}];
  }
  bool exact = true;
  double total = 0.0;
  std::vector<double> grad_acc(want_grad ? policy.dimension() : 0, 0.0);
  for (const auto& [key, count] : counts) {
    const Prompt prompt{key.first, static_cast<PromptKind>(key.second)};
    double value = 0.0;
    std::vector<double> g(want_grad ? policy.dimension() : 0, 0.0);
    if (!exact_prompt_kl(policy, reference, prompt, cap, value, want_grad ? &g : nullptr)) {
      exact = false;
      break;
    }
    total += static_cast<double>(count) * value;
    for (std::size_t i = 0; i < g.size(); ++i) grad_acc[i] += static_cast<double>(count) * g[i];
  }
  if (exact) {
    out.estimate = {total / n, true};
    for (std::size_t i = 0; i < grad_acc.size(); ++i) out.grad[i] = grad_acc[i] / n;
    return out;
  }

  // Per-sample estimator over the batch's own responses.
  double sum = 0.0;
  for (const auto& r : batch.rollouts) {
    sum += policy.log_prob(r.prompt, r.response) - reference.log_prob(r.prompt, r.response);
    if (want_grad) {
      for (std::size_t t = 0; t < r.response.tokens.size(); ++t) {
        policy.add_token_score(r.prompt, r.response, t, 1.0 / n, out.grad);
      }
    }
  }
  out.estimate = {sum / n, false};
  return out;
}

double surrogate_loss(Algorithm algo, const RolloutBatch& batch, const Policy& policy,
                      const ClipConfig& cfg) {
  validate_clip_config(cfg);
  check_batch(algo, batch);
  const double total_tokens = static_cast<double>(batch.total_tokens());
  double objective = 0.0;
  for (const auto& r : batch.rollouts) {
    const std::vector<double> logp = policy.token_log_probs(r.prompt, r.response);
    for (std::size_t t = 0; t < logp.size(); ++t) {
      const double rho = importance_ratio(logp[t], r.old_log_probs[t]);
      objective += clipped_token_term(rho, r.advantages[t], cfg);
    }
  }
  double value = total_tokens > 0.0 ? -objective / total_tokens : 0.0;
  if (cfg.beta > 0.0) {
    value += cfg.beta *
             kl_term(policy, *cfg.reference, batch, cfg.kl_enumeration_cap, false).estimate.value;
  }
  return value;
}

}  // namespace

KlEstimate kl_penalty(const Policy& policy, const Policy& reference, const RolloutBatch& batch,
                      std::size_t cap) {
  require(!batch.rollouts.empty(), "kl_penalty: empty batch");
  return kl_term(policy, reference, batch, cap, false).estimate;
}

double grpo_loss(const RolloutBatch& batch, const Policy& policy, const ClipConfig& cfg) {
  return surrogate_loss(Algorithm::kGrpo, batch, policy, cfg);
}

double scrl_loss(const RolloutBatch& batch, const Policy& policy, const ClipConfig& cfg) {
  return surrogate_loss(Algorithm::kScrl, batch, policy, cfg);
}

double loss(Algorithm algo, const RolloutBatch& batch, const Policy& policy,
            const ClipConfig& cfg) {
  return surrogate_loss(algo, batch, policy, cfg);
}

std::vector<double> loss_gradient(Algorithm algo, const RolloutBatch& batch,
                                  const Policy& policy, const ClipConfig& cfg) {
  validate_clip_config(cfg);
  check_batch(algo, batch);
  std::vector<double> grad(policy.dimension(), 0.0);
  const double total_tokens = static_cast<double>(batch.total_tokens());
  if (total_tokens > 0.0) {
    for (const auto& r : batch.rollouts) {
      const std::vector<double> logp = policy.token_log_probs(r.prompt, r.response);
      for (std::size_t t = 0; t < logp.size(); ++t) {
        const double rho = importance_ratio(logp[t], r.old_log_probs[t]);
        const double slope = clipped_token_slope(rho, r.advantages[t], cfg);
        if (slope == 0.0) continue;
        // d rho / d theta = rho * score
        policy.add_token_score(r.prompt, r.response, t, -slope * rho / total_tokens, grad);
      }
    }
  }
  if (cfg.beta > 0.0) {
    const auto kl = kl_term(policy, *cfg.reference, batch, cfg.kl_enumeration_cap, true);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += cfg.beta * kl.grad[i];
  }
  return grad;
}

}  // namespace scrl
