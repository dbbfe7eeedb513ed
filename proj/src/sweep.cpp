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


#include "scrl/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <ostream>
#include <thread>

#include "scrl/error.hpp"
#include "scrl/random.hpp"
#include <json.hpp>

namespace scrl {
namespace {

constexpr double kVacuous = 1e-12;
constexpr double kSlack = 1e-9;
constexpr std::size_t kRandomDirections = 16;

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Matrix information_matrix(const OutcomeTable& table, std::size_t group_size,
                          const EgimOptions& options, std::uint64_t stream) {
  switch (options.method) {
    case EgimMethod::kFactorized:
      return egim_factorized(table, group_size);
    case EgimMethod::kEnumerated:
      return egim_enumerated(table, group_size, options.tuple_cap, options.workers);
    case EgimMethod::kMonteCarlo:
      return egim_monte_carlo(table, group_size, options.mc_groups,
                              stream_key({options.mc_seed, stream}))
          .mean;
  }
  return {};
}

double quadratic_form(const Matrix& m, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += v[i] * m(i, j) * v[j];
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = norm2(v);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

// Unit directions inside the position-1 block of the reduced coordinates:
// the projected correct-answer direction first, then the block's basis
// vectors, then seeded random mixtures.
std::vector<std::vector<double>> block_one_directions(const TabularPolicy& policy,
                                                      const Matrix& basis,
                                                      std::uint64_t seed) {
  const std::size_t m = policy.modulus();
  const std::size_t n = basis.cols();
  std::vector<std::vector<double>> dirs;

  std::vector<double> raw(policy.dimension(), 0.0);
  const std::size_t correct = policy.bank()[0].answer(1);
  for (std::size_t v = 0; v < m; ++v) {
    raw[policy.index(0, 0, Bucket::kNone, v)] =
        (v == correct ? 1.0 : 0.0) - 1.0 / static_cast<double>(m);
  }
  dirs.push_back(project(basis, raw));
  normalize(dirs.back());

  for (std::size_t k = 0; k + 1 < m; ++k) {
    std::vector<double> e(n, 0.0);
    e[k] = 1.0;
    dirs.push_back(std::move(e));
  }
  Rng rng(stream_key({seed, 0x646972}));
  for (std::size_t r = 0; r < kRandomDirections; ++r) {
    std::vector<double> v(n, 0.0);
    for (std::size_t k = 0; k + 1 < m; ++k) v[k] = 2.0 * rng.uniform() - 1.0;
    normalize(v);
    dirs.push_back(std::move(v));
  }
  return dirs;
}

}  // namespace

std::string_view egim_method_name(EgimMethod method) {
  switch (method) {
    case EgimMethod::kFactorized: return "exact";
    case EgimMethod::kEnumerated: return "enumerated";
    case EgimMethod::kMonteCarlo: return "monte-carlo";
  }
  return "?";
}

EgimMethod parse_egim_method(std::string_view name) {
  if (name == "exact") return EgimMethod::kFactorized;
  if (name == "enumerated") return EgimMethod::kEnumerated;
  if (name == "monte-carlo") return EgimMethod::kMonteCarlo;
  fail(ErrorCode::kValidation,
       "unknown EGIM method '" + std::string(name) + "' (expected exact, enumerated or monte-carlo)");
}

EgimReport analyze_instance(const DeadZoneInstance& instance, const EgimOptions& options) {
  const DeadZoneSpec& spec = instance.spec;
  const std::size_t g = spec.group_size;
  const std::size_t k = spec.depth;
  require(g >= 2, "analyze_instance: group size must be at least 2");

  EgimReport rep;
  rep.spec = spec;
  switch (options.method) {
    case EgimMethod::kFactorized: rep.method = "exact-factorized"; break;
    case EgimMethod::kEnumerated: rep.method = "exact-enumeration"; break;
    case EgimMethod::kMonteCarlo:
      rep.method = "monte-carlo(n=" + std::to_string(options.mc_groups) +
                   ", seed=" + std::to_string(options.mc_seed) + ")";
      break;
  }
  rep.p_original = instance.p_original;
  rep.p_curriculum = instance.p_curriculum;
  rep.scaffold = instance.scaffold;

  const TabularPolicy policy = make_instance_policy({instance});
  const Matrix basis = reachable_basis(policy, 0);
  rep.raw_dimension = policy.dimension();
  rep.reduced_dimension = basis.cols();

  const OutcomeTable original = original_outcome_table(policy, 0, basis, options.enumeration_cap);
  const std::vector<OutcomeTable> columns =
      curriculum_position_tables(policy, 0, basis, options.enumeration_cap);

  rep.f_original = information_matrix(original, g, options, 0);
  rep.f_lifted = Matrix(basis.cols(), basis.cols());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    rep.f_lifted += information_matrix(columns[j], g, options, j + 1);
  }
  rep.f_lifted *= 1.0 / static_cast<double>(k);

  const auto eig_x = symmetric_eigenvalues(rep.f_original);
  const auto eig_t = symmetric_eigenvalues(rep.f_lifted);
  rep.lambda_min_original = eig_x.front();
  rep.lambda_min_lifted = eig_t.front();
  rep.ratio = rep.lambda_min_original > 0.0 ? rep.lambda_min_lifted / rep.lambda_min_original
                                            : INFINITY;
  rep.min_eigenvalue_seen = std::min(eig_x.front(), eig_t.front());

  rep.c_a = std::sqrt(static_cast<double>(g - 1));
  rep.b_s = max_score_norm(original);
  rep.thm1_bound = dead_zone_bound(g, spec.delta, rep.c_a, rep.b_s);
  rep.thm1_holds = rep.lambda_min_original <= rep.thm1_bound + kSlack;

  rep.q_min = q_min(spec.p_star, g);
  const ConditionalMoments cm = conditional_second_moments(columns.front());
  rep.sigma_min_sq = std::max(cm.sigma_min_sq, 0.0);
  rep.thm2_bound = recovery_constant(spec.p_star, g, rep.sigma_min_sq, k);
  rep.thm2_vacuous = rep.sigma_min_sq <= kVacuous;
  rep.thm2_holds = rep.lambda_min_lifted >= rep.thm2_bound - kSlack;

  const auto dirs = block_one_directions(policy, basis, spec.seed);
  rep.directional_checks = dirs.size();
  rep.directional_min_margin = INFINITY;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    const double lhs = quadratic_form(rep.f_lifted, dirs[d]);
    const double sigma = directional_conditional_moment(columns.front(), dirs[d]);
    const double rhs = rep.q_min * sigma / static_cast<double>(k);
    if (rhs > kVacuous) ++rep.directional_nonvacuous;
    rep.directional_min_margin = std::min(rep.directional_min_margin, lhs - rhs);
    if (d == 0) {
      rep.correct_direction_lhs = lhs;
      rep.correct_direction_rhs = rhs;
    }
  }
  rep.directional_holds = rep.directional_min_margin >= -kSlack;

  const double p = rep.p_original;
  rep.pr_e0c = nondegenerate_probability(p, g);
  rep.pr_e0c_closed = 1.0 - std::pow(p, static_cast<double>(g)) -
                      std::pow(1.0 - p, static_cast<double>(g));
  rep.pr_e1_neq = nondegenerate_probability(rep.p_curriculum.front(), g);
  rep.e0_identity_holds = std::fabs(rep.pr_e0c - rep.pr_e0c_closed) <= 1e-12;
  rep.e0_bernoulli_holds = rep.pr_e0c <= static_cast<double>(g) * spec.delta + 1e-15;
  rep.e1_bound_holds = rep.pr_e1_neq >= rep.q_min - 1e-12;
  return rep;
}

SweepResult recovery_sweep(const SweepConfig& cfg) {
  require(!cfg.deltas.empty(), "recovery_sweep: no delta values");
  require(!cfg.seeds.empty(), "recovery_sweep: no seeds");

  struct Job {
    DeadZoneSpec spec;
  };
  std::vector<Job> jobs;
  for (std::uint64_t seed : cfg.seeds) {
    for (double delta : cfg.deltas) {
      DeadZoneSpec spec;
      spec.delta = delta;
      spec.p_star = cfg.p_star;
      spec.depth = cfg.depth;
      spec.modulus = cfg.modulus;
      spec.group_size = cfg.group_size;
      spec.seed = seed;
      jobs.push_back({spec});
    }
  }

  SweepResult result;
  result.rows.resize(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  // Instances run independently; inner EGIM work stays single-threaded.
  EgimOptions inner = cfg.egim;
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.egim.workers, jobs.size()));
  if (workers > 1) inner.workers = 1;
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < jobs.size(); i += workers) {
      try {
        result.rows[i] = analyze_instance(construct_dead_zone_instance(jobs[i].spec), inner);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::map<std::uint64_t, std::vector<const EgimReport*>> by_seed;
  for (const auto& row : result.rows) by_seed[row.spec.seed].push_back(&row);
  for (auto& [seed, rows] : by_seed) {
    std::sort(rows.begin(), rows.end(),
              [](const EgimReport* a, const EgimReport* b) { return a->spec.delta > b->spec.delta; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i]->spec.delta == rows[i - 1]->spec.delta) continue;
      if (!(rows[i]->ratio > rows[i - 1]->ratio)) result.ratio_increasing = false;
    }
  }
  for (const auto& r : result.rows) {
    const bool ok = r.thm1_holds && (r.thm2_vacuous || r.thm2_holds) && r.directional_holds &&
                    r.e0_identity_holds && r.e0_bernoulli_holds && r.e1_bound_holds &&
                    r.min_eigenvalue_seen >= -1e-10;
    if (!ok) result.all_checks_hold = false;
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "seed,delta,p_original,lambda_min_original,lambda_min_lifted,ratio,thm1_bound,"
         "thm2_bound,thm1_holds,thm2_holds,thm2_vacuous,sigma_min_sq,directional_rhs,"
         "directional_min_margin,pr_e0c,pr_e1_neq,q_min,method\n";
  const auto g = [](double v) { return format_double("%.10g", v); };
  for (const auto& r : result.rows) {
    out << r.spec.seed << ',' << g(r.spec.delta) << ',' << g(r.p_original) << ','
        << g(r.lambda_min_original) << ',' << g(r.lambda_min_lifted) << ',' << g(r.ratio) << ','
        << g(r.thm1_bound) << ',' << g(r.thm2_bound) << ',' << (r.thm1_holds ? 1 : 0) << ','
        << (r.thm2_holds ? 1 : 0) << ',' << (r.thm2_vacuous ? 1 : 0) << ','
        << g(r.sigma_min_sq) << ',' << g(r.correct_direction_rhs) << ','
        << g(r.directional_min_margin) << ',' << g(r.pr_e0c) << ',' << g(r.pr_e1_neq) << ','
        << g(r.q_min) << ',' << '"' << r.method << '"' << '\n';
  }
}

void write_report_json(std::ostream& out, const EgimReport& r) {
  using nlohmann::ordered_json;
  const auto matrix = [](const Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto row = m.row(i);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
  };
  ordered_json j;
  j["instance"] = {{"delta", r.spec.delta},     {"p_star", r.spec.p_star},
                   {"depth", r.spec.depth},     {"modulus", r.spec.modulus},
                   {"group_size", r.spec.group_size}, {"seed", r.spec.seed}};
  j["method"] = r.method;
  j["p_original"] = r.p_original;
  j["p_curriculum"] = r.p_curriculum;
  j["scaffold"] = r.scaffold;
  j["raw_dimension"] = r.raw_dimension;
  j["reduced_dimension"] = r.reduced_dimension;
  j["lambda_min_original"] = r.lambda_min_original;
  j["lambda_min_lifted"] = r.lambda_min_lifted;
  j["ratio"] = r.ratio;
  j["dead_zone"] = {{"c_a", r.c_a},
                    {"b_s", r.b_s},
                    {"bound", r.thm1_bound},
                    {"holds", r.thm1_holds},
                    {"pr_e0c", r.pr_e0c},
                    {"pr_e0c_closed", r.pr_e0c_closed}};
  j["recovery"] = {{"q_min", r.q_min},
                   {"pr_e1_neq", r.pr_e1_neq},
                   {"sigma_min_sq", r.sigma_min_sq},
                   {"bound", r.thm2_bound},
                   {"vacuous", r.thm2_vacuous},
                   {"holds", r.thm2_holds},
                   {"directional_checks", r.directional_checks},
                   {"directional_nonvacuous", r.directional_nonvacuous},
                   {"directional_min_margin", r.directional_min_margin},
                   {"correct_direction_lhs", r.correct_direction_lhs},
                   {"correct_direction_rhs", r.correct_direction_rhs},
                   {"directional_holds", r.directional_holds}};
  j["f_original"] = matrix(r.f_original);
  j["f_lifted"] = matrix(r.f_lifted);
  out << j.dump(2) << '\n';
}

}  // namespace scrl
