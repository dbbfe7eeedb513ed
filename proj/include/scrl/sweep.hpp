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


// Dead-zone / recovery sweeps over constructed chain instances.

#ifndef SCRL_SWEEP_HPP_
#define SCRL_SWEEP_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "scrl/matrix.hpp"
#include "scrl/toy.hpp"

namespace scrl {

enum class EgimMethod { kFactorized, kEnumerated, kMonteCarlo };

std::string_view egim_method_name(EgimMethod method);
EgimMethod parse_egim_method(std::string_view name);  // exact | enumerated | monte-carlo

struct EgimOptions {
  EgimMethod method = EgimMethod::kFactorized;
  std::uint64_t tuple_cap = 50'000'000;    // enumerated method only
  std::size_t mc_groups = 100'000;         // monte-carlo only
  std::uint64_t mc_seed = 0;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  std::size_t workers = 1;
};

// Both matrices of one instance plus every bound and identity checked on it.
// Matrices live in the reduced coordinates of reachable_basis().
struct EgimReport {
  DeadZoneSpec spec;
  std::string method;
  double p_original = 0.0;
  std::vector<double> p_curriculum;
  double scaffold = 0.0;
  std::size_t raw_dimension = 0;
  std::size_t reduced_dimension = 0;

  Matrix f_original;
  Matrix f_lifted;
  double lambda_min_original = 0.0;
  double lambda_min_lifted = 0.0;
  double ratio = 0.0;

  double c_a = 0.0;           // sqrt(G - 1)
  double b_s = 0.0;           // max original-outcome score norm
  double thm1_bound = 0.0;    // G delta C_A^2 B_s^2
  bool thm1_holds = false;

  double q_min = 0.0;
  double sigma_min_sq = 0.0;  // column-1 conditional moments, full reduced space
  double thm2_bound = 0.0;    // (1/K) q_min sigma_min^2
  bool thm2_vacuous = false;  // sigma_min^2 <= 1e-12
  bool thm2_holds = false;

  // The same chain restricted to single directions v inside position 1:
  // v^T F_T v >= (1/K) q_min min_r E[(v^T s)^2 | r].
  std::size_t directional_checks = 0;
  std::size_t directional_nonvacuous = 0;
  double directional_min_margin = 0.0;
  double correct_direction_lhs = 0.0;
  double correct_direction_rhs = 0.0;
  bool directional_holds = false;

  double pr_e0c = 0.0;         // enumerated over 2^G reward patterns
  double pr_e0c_closed = 0.0;  // 1 - p^G - (1 - p)^G
  double pr_e1_neq = 0.0;      // enumerated, column 1
  bool e0_identity_holds = false;
  bool e0_bernoulli_holds = false;  // Pr[E_0^c] <= G delta
  bool e1_bound_holds = false;      // Pr[E_1^neq] >= q_min
  double min_eigenvalue_seen = 0.0;  // across F_x, F_T (PSD check)
};

EgimReport analyze_instance(const DeadZoneInstance& instance, const EgimOptions& options = {});

struct SweepConfig {
  std::vector<double> deltas = {0.1, 0.01, 0.001};
  double p_star = 0.4;
  std::size_t group_size = 6;
  std::size_t depth = 4;
  std::size_t modulus = 7;
  std::vector<std::uint64_t> seeds = {0};
  EgimOptions egim;
};

struct SweepResult {
  std::vector<EgimReport> rows;  // seed-major, deltas in the given order
  // Per seed: the ratio strictly increases as delta decreases.
  bool ratio_increasing = true;
  bool all_checks_hold = true;
};

SweepResult recovery_sweep(const SweepConfig& cfg);

void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_report_json(std::ostream& out, const EgimReport& report);

}  // namespace scrl

#endif  // SCRL_SWEEP_HPP_
