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


// Reward -> advantage pipeline for rollout groups.

#ifndef SCRL_CREDIT_HPP_
#define SCRL_CREDIT_HPP_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scrl/matrix.hpp"
#include "scrl/tagging.hpp"
#include "scrl/verification.hpp"

namespace scrl {

// Rewards after zeroing everything past the first failure.
struct CorrectedRewardVector {
  std::vector<int> rewards;
  std::size_t progress = 0;
};

// Length of the solved prefix; 0 for malformed responses.
std::size_t curriculum_progress(const RawRewardVector& raw);
CorrectedRewardVector progress_correct(const RawRewardVector& raw);

// (v - mean) / std with the population std. A group whose entries are all
// equal maps to zeros. Throws when fewer than two values are given.
std::vector<double> normalize_group(std::span<const double> values);

// G x K binary matrix whose rows all have prefix structure.
class GroupRewards {
 public:
  // Throws unless there are at least two rows, all of width K >= 1, each of
  // the form 1..1 0..0.
  explicit GroupRewards(std::vector<std::vector<int>> rows);
  static GroupRewards from_corrected(std::span<const CorrectedRewardVector> rows);

  std::size_t group_size() const { return rows_.size(); }
  std::size_t num_subproblems() const { return rows_.front().size(); }
  int operator()(std::size_t i, std::size_t j) const { return rows_[i][j]; }
  const std::vector<std::vector<int>>& rows() const { return rows_; }

 private:
  std::vector<std::vector<int>> rows_;
};

// Column j of the result is normalize_group(column j of the rewards).
Matrix subproblem_normalize(const GroupRewards& rewards);

// Token t gets adv_row[j - 1] when assignment[t] = j > 0, else 0.
std::vector<double> assign_token_advantages(std::span<const double> adv_row,
                                            const TokenSpanMap& span_map);

// sqrt(G - 1): the largest magnitude a normalized binary reward can reach.
double advantage_magnitude_bound(std::size_t group_size);

// Batch mode. Input records (one JSON object per line):
//   {"group_id": str, "rollout_id": str, "rewards": [0|1, ...],
//    "num_tokens": n, "spans": [[begin, end], ...], "well_formed": bool}
// spans[j] is the half-open token range of block j + 1. Records sharing a
// group_id form one normalization group, in file order.
struct CreditRecordResult {
  std::string group_id;
  std::string rollout_id;
  std::vector<int> corrected_rewards;
  std::size_t progress = 0;
  std::vector<double> token_advantages;
};

struct CreditLineError {
  std::size_t line = 0;  // 1-based; 0 for group-level errors
  std::string message;
};

struct CreditBatchResult {
  std::vector<CreditRecordResult> records;
  std::vector<CreditLineError> errors;
};

// Bad lines are reported and skipped. A group left with fewer than two
// valid rollouts, or with inconsistent K, is reported and dropped whole.
CreditBatchResult run_credit_batch(std::istream& in);

// One JSON object per line with group_id, rollout_id, corrected_rewards,
// progress and token_advantages.
void write_credit_results(std::ostream& out, std::span<const CreditRecordResult> records);

}  // namespace scrl

#endif  // SCRL_CREDIT_HPP_
