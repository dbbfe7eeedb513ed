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


#ifndef SCRL_EVALUATION_HPP_
#define SCRL_EVALUATION_HPP_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scrl/objective.hpp"

namespace scrl {

struct SampleOutcome {
  std::string problem_id;
  std::size_t n = 0;  // rollouts generated
  std::size_t c = 0;  // correct rollouts
};

// 1 - C(n - c, k) / C(n, k) in product form. Throws unless 1 <= k <= n and
// c <= n.
double pass_at_k(const SampleOutcome& outcome, std::size_t k);

// Mean of pass_at_k over problems.
double aggregate_pass_at_k(std::span<const SampleOutcome> outcomes, std::size_t k);

// Per-rollout evidence for the solvable-set protocols.
struct SolveEvidence {
  PromptKind kind = PromptKind::kOriginal;
  bool solved_original = false;  // final answer right, or curriculum progress == K
  bool in_half_budget = false;   // counts toward the half-group protocol
};

class SolvableTracker {
 public:
  explicit SolvableTracker(std::size_t num_problems = 0) : num_problems_(num_problems) {}

  // Full protocol: any qualifying success in either format. Half protocol:
  // original-prompt successes inside the half budget only. Flags never reset.
  void update(const std::string& problem_id, std::span<const SolveEvidence> results);

  bool solved_full(const std::string& problem_id) const;
  bool solved_half(const std::string& problem_id) const;
  // Ratios over num_problems (or over problems seen when that is 0).
  double ratio_full() const;
  double ratio_half() const;

 private:
  struct Flags {
    bool full = false;
    bool half = false;
  };
  std::size_t num_problems_;
  std::map<std::string, Flags> flags_;
};

inline SolvableTracker& update_solvable(SolvableTracker& tracker, const std::string& problem_id,
                                        std::span<const SolveEvidence> results) {
  tracker.update(problem_id, results);
  return tracker;
}

// Evaluation grid used by the passk command.
inline constexpr std::size_t kPassAtKGrid[] = {1, 2, 4, 8, 16, 32, 64};

// Reads {"problem_id", "n", "c"} records, one per line. Throws a validation
// error naming the line on the first bad record.
std::vector<SampleOutcome> read_sample_outcomes(std::istream& in);

// CSV: problem_id,n,c,pass@k... then a "mean" row. Cells with k > n are
// empty, and the mean for such k averages only problems with n >= k.
void write_pass_at_k_csv(std::ostream& out, std::span<const SampleOutcome> outcomes,
                         std::span<const std::size_t> ks);

}  // namespace scrl

#endif  // SCRL_EVALUATION_HPP_
