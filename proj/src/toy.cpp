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


#include "scrl/toy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "scrl/credit.hpp"
#include "scrl/error.hpp"
#include "scrl/evaluation.hpp"
#include "scrl/random.hpp"
#include "scrl/verification.hpp"

namespace scrl {
namespace {

constexpr std::size_t kBuckets = 3;
// Logit offset that makes recovering after a wrong answer nearly impossible.
constexpr double kRecoveryPenalty = 8.0;

std::vector<double> softmax(std::vector<double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) total += (z = std::exp(z - top));
  for (double& z : logits) z /= total;
  return logits;
}

std::uint64_t checked_power(std::size_t base, std::size_t exp, std::size_t cap) {
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (n > cap / base) {
      fail(ErrorCode::kConstruction,
           "response space " + std::to_string(base) + "^" + std::to_string(exp) +
               " exceeds the enumeration cap of " + std::to_string(cap) +
               "; use Monte Carlo mode (sampled estimates)");
    }
    n *= base;
  }
  return n;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::size_t ChainTask::answer(std::size_t j) const {
  require(j <= depth(), "chain answer index out of range");
  std::size_t s = seed_value % modulus;
  for (std::size_t i = 1; i <= j; ++i) s = (coefficients[i - 1] * s + i) % modulus;
  return s;
}

std::vector<std::string> ChainTask::subproblem_truths() const {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= depth(); ++j) out.push_back(std::to_string(answer(j)));
  return out;
}

double ChainTask::bonus(std::size_t position) const {
  return position < scaffold_bonus.size() ? scaffold_bonus[position] : 0.0;
}

ChainTask random_chain_task(std::size_t modulus, std::size_t depth, std::uint64_t seed) {
  require(modulus >= 2, "chain modulus must be at least 2");
  require(depth >= 1, "chain depth must be at least 1");
  Rng rng(stream_key({seed, 0x636861696eULL}));
  ChainTask task;
  task.modulus = modulus;
  task.seed_value = rng.below(modulus);
  for (std::size_t j = 0; j < depth; ++j) task.coefficients.push_back(1 + rng.below(modulus - 1));
  return task;
}

TabularPolicy::TabularPolicy(std::vector<ChainTask> bank) : bank_(std::move(bank)) {
  require(!bank_.empty(), "tabular policy needs at least one task");
  modulus_ = bank_.front().modulus;
  depth_ = bank_.front().depth();
  require(modulus_ >= 2 && depth_ >= 1, "tabular policy needs modulus >= 2 and depth >= 1");
  for (const auto& t : bank_) {
    require(t.modulus == modulus_ && t.depth() == depth_,
            "all tasks in a bank must share modulus and depth");
  }
  theta_.assign(bank_.size() * depth_ * kBuckets * modulus_, 0.0);
}

void TabularPolicy::set_parameters(std::span<const double> theta) {
  require(theta.size() == theta_.size(), "parameter vector has the wrong dimension");
  theta_.assign(theta.begin(), theta.end());
}

std::unique_ptr<Policy> TabularPolicy::clone() const {
  return std::make_unique<TabularPolicy>(*this);
}

std::size_t TabularPolicy::index(std::size_t problem, std::size_t position, Bucket bucket,
                                 std::size_t v) const {
  return ((problem * depth_ + position) * kBuckets + static_cast<std::size_t>(bucket)) *
             modulus_ +
         v;
}

Bucket TabularPolicy::bucket_for(std::size_t problem, std::size_t position,
                                 std::span<const std::size_t> tokens) const {
  if (position == 0) return Bucket::kNone;
  return tokens[position - 1] == bank_[problem].answer(position) ? Bucket::kCorrect
                                                                 : Bucket::kIncorrect;
}

std::vector<double> TabularPolicy::context_probs(std::size_t problem, PromptKind kind,
                                                 std::size_t position, Bucket bucket,
                                                 double temperature) const {
  require(problem < bank_.size() && position < depth_, "context out of range");
  require(temperature > 0.0, "temperature must be positive");
  std::vector<double> logits(theta_.begin() + index(problem, position, bucket, 0),
                             theta_.begin() + index(problem, position, bucket, 0) + modulus_);
  if (kind == PromptKind::kCurriculum) {
    logits[bank_[problem].answer(position + 1)] += bank_[problem].bonus(position);
  }
  if (temperature != 1.0) {
    for (double& z : logits) z /= temperature;
  }
  return softmax(std::move(logits));
}

namespace {

void check_response(const TabularPolicy& policy, const Prompt& prompt, const Response& r) {
  require(prompt.problem < policy.bank().size(), "prompt problem out of range");
  require(r.tokens.size() == policy.depth(), "response length must equal the chain depth");
  for (std::size_t v : r.tokens) require(v < policy.modulus(), "token outside the answer alphabet");
}

}  // namespace

std::vector<double> TabularPolicy::token_log_probs(const Prompt& prompt,
                                                   const Response& response) const {
  check_response(*this, prompt, response);
  std::vector<double> out(depth_);
  for (std::size_t t = 0; t < depth_; ++t) {
    const Bucket b = bucket_for(prompt.problem, t, response.tokens);
    // Log-softmax directly for accuracy on small probabilities.
    const double* base = theta_.data() + index(prompt.problem, t, b, 0);
    std::vector<double> logits(base, base + modulus_);
    if (prompt.kind == PromptKind::kCurriculum) {
      logits[bank_[prompt.problem].answer(t + 1)] += bank_[prompt.problem].bonus(t);
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double z : logits) total += std::exp(z - top);
    out[t] = logits[response.tokens[t]] - top - std::log(total);
  }
  return out;
}

void TabularPolicy::add_token_score(const Prompt& prompt, const Response& response,
                                    std::size_t t, double weight, std::span<double> grad) const {
  check_response(*this, prompt, response);
  require(t < depth_, "token index out of range");
  require(grad.size() == theta_.size(), "gradient buffer has the wrong dimension");
  const Bucket b = bucket_for(prompt.problem, t, response.tokens);
  const std::vector<double> probs = context_probs(prompt.problem, prompt.kind, t, b);
  const std::size_t base = index(prompt.problem, t, b, 0);
  for (std::size_t u = 0; u < modulus_; ++u) {
    grad[base + u] += weight * ((u == response.tokens[t] ? 1.0 : 0.0) - probs[u]);
  }
}

std::vector<std::pair<Response, double>> TabularPolicy::enumerate(const Prompt& prompt,
                                                                  std::size_t cap) const {
  return enumerate_at(prompt, cap, 1.0);
}

std::vector<std::pair<Response, double>> TabularPolicy::enumerate_at(const Prompt& prompt,
                                                                     std::size_t cap,
                                                                     double temperature) const {
  require(prompt.problem < bank_.size(), "prompt problem out of range");
  const std::uint64_t n = checked_power(modulus_, depth_, cap);
  std::vector<std::pair<Response, double>> out;
  out.reserve(n);
  Response r;
  r.tokens.assign(depth_, 0);
  // Depth-first over positions; probabilities multiply along the path.
  auto walk = [&](auto&& self, std::size_t position, double prob) -> void {
    if (position == depth_) {
      out.emplace_back(r, prob);
      return;
    }
    const Bucket b = bucket_for(prompt.problem, position, r.tokens);
    const std::vector<double> probs =
        context_probs(prompt.problem, prompt.kind, position, b, temperature);
    for (std::size_t v = 0; v < modulus_; ++v) {
      r.tokens[position] = v;
      self(self, position + 1, prob * probs[v]);
    }
  };
  walk(walk, 0, 1.0);
  return out;
}

Response TabularPolicy::sample(const Prompt& prompt, Rng& rng, double temperature) const {
  require(prompt.problem < bank_.size(), "prompt problem out of range");
  Response r;
  r.tokens.assign(depth_, 0);
  for (std::size_t t = 0; t < depth_; ++t) {
    const Bucket b = bucket_for(prompt.problem, t, r.tokens);
    r.tokens[t] = rng.categorical(context_probs(prompt.problem, prompt.kind, t, b, temperature));
  }
  return r;
}

RenderedRollout render_rollout(PromptKind kind, std::span<const std::size_t> tokens) {
  RenderedRollout out;
  auto emit_token = [&](std::size_t v) {
    const std::string digits = std::to_string(v);
    const std::size_t begin = out.text.size();
    out.text += digits;
    out.token_offsets.push_back({begin, out.text.size()});
  };
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const bool last = t + 1 == tokens.size();
    if (kind == PromptKind::kCurriculum) {
      const std::string j = std::to_string(t + 1);
      out.text += "<p" + j + ">\\boxed{";
      emit_token(tokens[t]);
      out.text += "}</p" + j + ">";
      if (!last) out.text += "\n";
    } else if (last) {
      out.text += "\\boxed{";
      emit_token(tokens[t]);
      out.text += "}";
    } else {
      emit_token(tokens[t]);
      out.text += " -> ";
    }
  }
  return out;
}

SampledRollout sample_rollout(const TabularPolicy& policy, const Prompt& prompt, Rng& rng,
                              double temperature) {
  SampledRollout out;
  out.prompt = prompt;
  out.response = policy.sample(prompt, rng, temperature);
  out.rendered = render_rollout(prompt.kind, out.response.tokens);
  out.old_log_probs = policy.token_log_probs(prompt, out.response);
  return out;
}

double solve_probability(const TabularPolicy& policy, std::size_t problem, std::size_t cap) {
  const std::size_t k = policy.depth();
  const std::size_t truth = policy.bank().at(problem).answer(k);
  double p = 0.0;
  for (const auto& [r, prob] : policy.enumerate({problem, PromptKind::kOriginal}, cap)) {
    if (r.tokens[k - 1] == truth) p += prob;
  }
  return p;
}

std::vector<double> curriculum_probabilities(const TabularPolicy& policy, std::size_t problem,
                                             std::size_t cap) {
  const ChainTask& task = policy.bank().at(problem);
  std::vector<double> p(policy.depth(), 0.0);
  for (const auto& [r, prob] : policy.enumerate({problem, PromptKind::kCurriculum}, cap)) {
    for (std::size_t j = 0; j < r.tokens.size() && r.tokens[j] == task.answer(j + 1); ++j) {
      p[j] += prob;
    }
  }
  return p;
}

double estimate_solve_probability(const TabularPolicy& policy, const Prompt& prompt,
                                  std::size_t samples, std::uint64_t seed) {
  require(samples > 0, "estimate needs at least one sample");
  const ChainTask& task = policy.bank().at(prompt.problem);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    Rng rng(stream_key({seed, i}));
    const Response r = policy.sample(prompt, rng, 1.0);
    bool solved = true;
    if (prompt.kind == PromptKind::kOriginal) {
      solved = r.tokens.back() == task.answer(task.depth());
    } else {
      for (std::size_t j = 0; j < r.tokens.size(); ++j) solved = solved && r.tokens[j] == task.answer(j + 1);
    }
    hits += solved;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

namespace {

// Exact chain probabilities by forward recursion over the two buckets.
// Matches enumeration; used for per-step traces.
double chain_solve_probability(const TabularPolicy& policy, std::size_t problem) {
  const ChainTask& task = policy.bank()[problem];
  double correct = 0.0;
  for (std::size_t t = 0; t < policy.depth(); ++t) {
    const std::size_t truth = task.answer(t + 1);
    if (t == 0) {
      correct = policy.context_probs(problem, PromptKind::kOriginal, 0, Bucket::kNone)[truth];
      continue;
    }
    const double qc =
        policy.context_probs(problem, PromptKind::kOriginal, t, Bucket::kCorrect)[truth];
    const double qi =
        policy.context_probs(problem, PromptKind::kOriginal, t, Bucket::kIncorrect)[truth];
    correct = correct * qc + (1.0 - correct) * qi;
  }
  return correct;
}

std::vector<double> chain_curriculum_probabilities(const TabularPolicy& policy,
                                                   std::size_t problem) {
  const ChainTask& task = policy.bank()[problem];
  std::vector<double> p(policy.depth());
  double prefix = 1.0;
  for (std::size_t t = 0; t < policy.depth(); ++t) {
    const Bucket b = t == 0 ? Bucket::kNone : Bucket::kCorrect;
    prefix *= policy.context_probs(problem, PromptKind::kCurriculum, t, b)[task.answer(t + 1)];
    p[t] = prefix;
  }
  return p;
}

void write_block(const ChainTask& task, const TabularPolicy& shape, double scaffold,
                 std::span<const double> logit_correct, std::vector<double>& theta) {
  theta.assign(shape.depth() * kBuckets * shape.modulus(), 0.0);
  for (std::size_t t = 0; t < shape.depth(); ++t) {
    const std::size_t truth = task.answer(t + 1);
    const Bucket main = t == 0 ? Bucket::kNone : Bucket::kCorrect;
    theta[shape.index(0, t, main, truth)] = logit_correct[t] - scaffold;
    if (t > 0) theta[shape.index(0, t, Bucket::kIncorrect, truth)] = -scaffold - kRecoveryPenalty;
  }
}

}  // namespace

DeadZoneInstance construct_dead_zone_instance(const DeadZoneSpec& spec) {
  require(spec.delta > 0.0 && spec.delta < spec.p_star && spec.p_star <= 0.5,
          "dead-zone construction needs 0 < delta < p_star <= 0.5");
  require(spec.depth >= 1, "dead-zone construction needs K >= 1");
  require(spec.modulus >= 2, "dead-zone construction needs m >= 2");
  require(spec.group_size >= 2, "dead-zone construction needs G >= 2");
  const std::size_t k = spec.depth;
  const double m = static_cast<double>(spec.modulus);

  // Conditional success targets under the curriculum prompt. The prefix
  // probabilities p_j = a_1 * ... * a_j fall from 0.5 + w to 0.5 - w over
  // j < K, and a_K = 0.5.
  const double w = std::min(0.05, (0.5 - spec.p_star) / 2.0);
  if (k >= 3 && w <= 0.0) {
    fail(ErrorCode::kConstruction,
         "cannot place K - 1 >= 2 strictly ordered prefix probabilities inside [p_star, "
         "1 - p_star] when p_star = 0.5");
  }
  std::vector<double> a(k, 0.5);
  if (k >= 3) {
    const double hi = 0.5 + w, lo = 0.5 - w;
    a[0] = hi;
    for (std::size_t j = 1; j + 1 < k; ++j) {
      a[j] = std::pow(lo / hi, 1.0 / static_cast<double>(k - 2));
    }
  }
  std::vector<double> z(k);
  for (std::size_t j = 0; j < k; ++j) z[j] = std::log(a[j] * (m - 1.0) / (1.0 - a[j]));

  DeadZoneInstance inst;
  inst.spec = spec;
  inst.task = random_chain_task(spec.modulus, k, spec.seed);

  auto original_p = [&](double b) {
    ChainTask task = inst.task;
    task.scaffold_bonus.assign(k, b);
    TabularPolicy pol({task});
    std::vector<double> theta;
    write_block(task, pol, b, z, theta);
    pol.set_parameters(theta);
    return chain_solve_probability(pol, 0);
  };

  const double target = spec.delta / 2.0;
  double b = 0.0;
  if (original_p(0.0) > target) {
    double lo = 0.0, hi = 1.0;
    while (original_p(hi) > target) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e4) fail(ErrorCode::kConstruction, "could not push p(original) below delta");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (original_p(mid) > target ? lo : hi) = mid;
    }
    b = hi;
  }

  inst.scaffold = b;
  inst.task.scaffold_bonus.assign(k, b);
  TabularPolicy pol({inst.task});
  write_block(inst.task, pol, b, z, inst.theta);
  pol.set_parameters(inst.theta);

  // Independent check by enumeration.
  inst.p_original = solve_probability(pol, 0);
  inst.p_curriculum = curriculum_probabilities(pol, 0);
  if (!(inst.p_original < spec.delta)) {
    fail(ErrorCode::kConstruction, "constructed instance has p(original) = " +
                                       fmt(inst.p_original) + " >= delta");
  }
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const double pj = inst.p_curriculum[j];
    if (pj < spec.p_star || pj > 1.0 - spec.p_star) {
      fail(ErrorCode::kConstruction,
           "constructed p_" + std::to_string(j + 1) + " = " + fmt(pj) + " is outside [p_star, 1 - p_star]");
    }
  }
  for (std::size_t j = 1; j < k; ++j) {
    if (inst.p_curriculum[j] > inst.p_curriculum[j - 1] + 1e-12) {
      fail(ErrorCode::kConstruction, "constructed curriculum is not ordered from easy to hard");
    }
  }
  return inst;
}

TabularPolicy make_instance_policy(const std::vector<DeadZoneInstance>& instances) {
  require(!instances.empty(), "need at least one instance");
  std::vector<ChainTask> bank;
  std::vector<double> theta;
  for (const auto& inst : instances) {
    bank.push_back(inst.task);
    theta.insert(theta.end(), inst.theta.begin(), inst.theta.end());
  }
  TabularPolicy policy(std::move(bank));
  policy.set_parameters(theta);
  return policy;
}

namespace {

std::vector<std::pair<std::size_t, Bucket>> reachable_contexts(std::size_t position) {
  if (position == 0) return {{0, Bucket::kNone}};
  return {{position, Bucket::kCorrect}, {position, Bucket::kIncorrect}};
}

Matrix helmert_basis(const TabularPolicy& policy, std::size_t problem,
                     std::span<const std::pair<std::size_t, Bucket>> contexts) {
  const std::size_t m = policy.modulus();
  Matrix q(policy.dimension(), contexts.size() * (m - 1));
  std::size_t col = 0;
  for (const auto& [position, bucket] : contexts) {
    const std::size_t base = policy.index(problem, position, bucket, 0);
    for (std::size_t k = 1; k < m; ++k, ++col) {
      const double norm = std::sqrt(static_cast<double>(k * (k + 1)));
      for (std::size_t v = 0; v < k; ++v) q(base + v, col) = 1.0 / norm;
      q(base + k, col) = -static_cast<double>(k) / norm;
    }
  }
  return q;
}

std::vector<double> in_basis(const Matrix& basis, std::vector<double> raw) {
  if (basis.empty()) return raw;
  return project(basis, raw);
}

}  // namespace

Matrix reachable_basis(const TabularPolicy& policy, std::size_t problem) {
  std::vector<std::pair<std::size_t, Bucket>> contexts;
  for (std::size_t t = 0; t < policy.depth(); ++t) {
    for (const auto& c : reachable_contexts(t)) contexts.push_back(c);
  }
  return helmert_basis(policy, problem, contexts);
}

Matrix position_basis(const TabularPolicy& policy, std::size_t problem, std::size_t position) {
  require(position < policy.depth(), "position out of range");
  return helmert_basis(policy, problem, reachable_contexts(position));
}

OutcomeTable original_outcome_table(const TabularPolicy& policy, std::size_t problem,
                                    const Matrix& basis, std::size_t cap, double temperature) {
  const Prompt prompt{problem, PromptKind::kOriginal};
  const auto outcomes = policy.enumerate_at(prompt, cap, temperature);
  const std::size_t truth = policy.bank().at(problem).answer(policy.depth());
  const std::size_t d = basis.empty() ? policy.dimension() : basis.cols();
  OutcomeTable table;
  table.scores = Matrix(outcomes.size(), d);
  for (std::size_t o = 0; o < outcomes.size(); ++o) {
    const auto& [r, prob] = outcomes[o];
    table.prob.push_back(prob);
    table.reward.push_back(r.tokens.back() == truth ? 1 : 0);
    const std::vector<double> s = in_basis(basis, policy.score(prompt, r));
    std::copy(s.begin(), s.end(), table.scores.row(o).begin());
  }
  return table;
}

std::vector<OutcomeTable> curriculum_position_tables(const TabularPolicy& policy,
                                                     std::size_t problem, const Matrix& basis,
                                                     std::size_t cap, double temperature) {
  const Prompt prompt{problem, PromptKind::kCurriculum};
  const auto outcomes = policy.enumerate_at(prompt, cap, temperature);
  const ChainTask& task = policy.bank().at(problem);
  const std::size_t k = policy.depth();
  const std::size_t d = basis.empty() ? policy.dimension() : basis.cols();
  std::vector<OutcomeTable> tables(k);
  for (auto& t : tables) t.scores = Matrix(outcomes.size(), d);
  for (std::size_t o = 0; o < outcomes.size(); ++o) {
    const auto& [r, prob] = outcomes[o];
    std::size_t progress = 0;
    while (progress < k && r.tokens[progress] == task.answer(progress + 1)) ++progress;
    for (std::size_t j = 0; j < k; ++j) {
      tables[j].prob.push_back(prob);
      tables[j].reward.push_back(progress > j ? 1 : 0);
      std::vector<double> raw(policy.dimension(), 0.0);
      policy.add_token_score(prompt, r, j, 1.0, raw);
      const std::vector<double> s = in_basis(basis, std::move(raw));
      std::copy(s.begin(), s.end(), tables[j].scores.row(o).begin());
    }
  }
  return tables;
}

std::vector<double> expected_gradient(const TabularPolicy& policy, std::size_t problem,
                                      Algorithm algo, std::size_t group_size, double temperature,
                                      std::size_t cap) {
  const double k = static_cast<double>(policy.depth());
  const Matrix raw;
  if (algo == Algorithm::kGrpo) {
    require(group_size >= 2, "GRPO needs G >= 2");
    // sum L = G K, so E[grad] = -(1/K) E[A_1 s_1].
    std::vector<double> g =
        expected_advantage_score(original_outcome_table(policy, problem, raw, cap, temperature), group_size);
    for (double& x : g) x *= -1.0 / k;
    return g;
  }
  require(group_size >= 4 && group_size % 2 == 0, "SCRL needs an even G >= 4");
  const std::size_t half = group_size / 2;
  std::vector<double> g =
      expected_advantage_score(original_outcome_table(policy, problem, raw, cap, temperature), half);
  for (const auto& table : curriculum_position_tables(policy, problem, raw, cap, temperature)) {
    const std::vector<double> e = expected_advantage_score(table, half);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += e[i];
  }
  // -(1/(G K)) * (G/2) * (curriculum + original)
  for (double& x : g) x *= -1.0 / (2.0 * k);
  return g;
}

namespace {

struct StepOutcome {
  RolloutBatch batch;
  std::vector<SolveEvidence> evidence;
};

StepOutcome run_group(const TabularPolicy& policy, std::size_t problem, Algorithm algo,
                      const TrainConfig& cfg, std::size_t step) {
  const ChainTask& task = policy.bank()[problem];
  const std::size_t g = cfg.group_size;
  const std::size_t k = policy.depth();
  const std::size_t n_curriculum = algo == Algorithm::kScrl ? g / 2 : 0;

  std::vector<SampledRollout> rollouts(g);
  auto sample_one = [&](std::size_t i) {
    Rng rng(stream_key({cfg.seed, step, i}));
    const PromptKind kind = i < n_curriculum ? PromptKind::kCurriculum : PromptKind::kOriginal;
    rollouts[i] = sample_rollout(policy, {problem, kind}, rng, cfg.temperature);
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, g));
  if (workers == 1) {
    for (std::size_t i = 0; i < g; ++i) sample_one(i);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        for (std::size_t i = w; i < g; i += workers) sample_one(i);
      });
    }
    for (auto& th : threads) th.join();
  }

  const auto comparator = make_comparator(cfg.comparator);
  const Comparator& cmp = *comparator;
  const std::vector<std::string> truths = task.subproblem_truths();
  StepOutcome out;

  // Curriculum half: parse, verify, correct, normalize per position.
  if (n_curriculum > 0) {
    std::vector<CorrectedRewardVector> corrected;
    std::vector<TokenSpanMap> maps;
    for (std::size_t i = 0; i < n_curriculum; ++i) {
      const auto parsed = parse_tagged_response(rollouts[i].rendered.text, k);
      corrected.push_back(progress_correct(verify_rollout(parsed, truths, cmp)));
      maps.push_back(map_spans_to_tokens(parsed, rollouts[i].rendered.token_offsets));
    }
    const Matrix adv = subproblem_normalize(GroupRewards::from_corrected(corrected));
    for (std::size_t i = 0; i < n_curriculum; ++i) {
      out.batch.rollouts.push_back(make_curriculum_rollout(
          problem, rollouts[i].response, rollouts[i].old_log_probs,
          assign_token_advantages(adv.row(i), maps[i])));
      out.evidence.push_back({PromptKind::kCurriculum, corrected[i].progress == k, false});
    }
  }

  // Original half (or the whole GRPO group): one outcome reward each.
  std::vector<double> rewards;
  for (std::size_t i = n_curriculum; i < g; ++i) {
    const auto boxed = extract_boxed_answer(rollouts[i].rendered.text);
    rewards.push_back(boxed && cmp.equivalent(*boxed, task.final_truth()) ? 1.0 : 0.0);
  }
  const std::vector<double> adv = normalize_group(rewards);
  for (std::size_t i = n_curriculum; i < g; ++i) {
    const std::size_t o = i - n_curriculum;
    out.batch.rollouts.push_back(make_original_rollout(problem, rollouts[i].response,
                                                       rollouts[i].old_log_probs, adv[o]));
    const bool in_half = algo == Algorithm::kScrl || o < g / 2;
    out.evidence.push_back({PromptKind::kOriginal, rewards[o] == 1.0, in_half});
  }
  return out;
}

void bank_probabilities(const TabularPolicy& policy, double& p_original,
                        std::vector<double>& p_curriculum) {
  const std::size_t n = policy.bank().size();
  p_original = 0.0;
  p_curriculum.assign(policy.depth(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    p_original += chain_solve_probability(policy, i);
    const auto pc = chain_curriculum_probabilities(policy, i);
    for (std::size_t j = 0; j < pc.size(); ++j) p_curriculum[j] += pc[j];
  }
  p_original /= static_cast<double>(n);
  for (double& p : p_curriculum) p /= static_cast<double>(n);
}

}  // namespace

TrainResult train(TabularPolicy& policy, const TrainConfig& cfg_in, Algorithm algo) {
  TrainConfig cfg = cfg_in;
  if (algo == Algorithm::kScrl) {
    require(cfg.group_size >= 4 && cfg.group_size % 2 == 0, "SCRL needs an even G >= 4");
  } else {
    require(cfg.group_size >= 2, "GRPO needs G >= 2");
  }
  require(cfg.learning_rate >= 0.0, "learning rate must be non-negative");
  require(cfg.temperature > 0.0, "temperature must be positive");

  std::unique_ptr<Policy> reference;
  if (cfg.clip.beta > 0.0 && cfg.clip.reference == nullptr) {
    reference = policy.clone();
    cfg.clip.reference = reference.get();
  }
  validate_clip_config(cfg.clip);

  const std::size_t n_problems = policy.bank().size();
  SolvableTracker tracker(n_problems);
  TrainResult result;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    Rng chooser(stream_key({cfg.seed, step, 0x70726f626c656dULL}));
    const std::size_t problem = chooser.below(n_problems);
    StepOutcome group = run_group(policy, problem, algo, cfg, step);

    TraceRow row;
    row.step = step;
    bank_probabilities(policy, row.p_original, row.p_curriculum);
    row.loss = loss(algo, group.batch, policy, cfg.clip);
    std::vector<double> grad = loss_gradient(algo, group.batch, policy, cfg.clip);
    row.grad_norm = norm2(grad);
    tracker.update(std::to_string(problem), group.evidence);
    row.solvable_ratio_full = tracker.ratio_full();
    row.solvable_ratio_half = tracker.ratio_half();
    result.trace.push_back(std::move(row));

    if (cfg.learning_rate > 0.0) {
      std::vector<double> theta(policy.parameters().begin(), policy.parameters().end());
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.learning_rate * grad[i];
      policy.set_parameters(theta);
    }
  }
  bank_probabilities(policy, result.final_p_original, result.final_p_curriculum);
  return result;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace, std::size_t depth) {
  out << "step,loss,grad_norm,p_original";
  for (std::size_t j = 1; j <= depth; ++j) out << ",p_" << j;
  out << ",solvable_ratio_full,solvable_ratio_half\n";
  for (const auto& row : trace) {
    out << row.step << ',' << fmt(row.loss) << ',' << fmt(row.grad_norm) << ','
        << fmt(row.p_original);
    for (double p : row.p_curriculum) out << ',' << fmt(p);
    out << ',' << fmt(row.solvable_ratio_full) << ',' << fmt(row.solvable_ratio_half) << '\n';
  }
}

}  // namespace scrl
