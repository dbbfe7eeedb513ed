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


#include "scrl/credit.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "scrl/error.hpp"

namespace scrl {

std::size_t curriculum_progress(const RawRewardVector& raw) {
  if (!raw.well_formed) return 0;
  std::size_t k = 0;
  while (k < raw.rewards.size() && raw.rewards[k] == 1) ++k;
  return k;
}

CorrectedRewardVector progress_correct(const RawRewardVector& raw) {
  CorrectedRewardVector out;
  out.progress = curriculum_progress(raw);
  out.rewards.assign(raw.rewards.size(), 0);
  for (std::size_t j = 0; j < out.progress; ++j) out.rewards[j] = 1;
  return out;
}

std::vector<double> normalize_group(std::span<const double> values) {
  require(values.size() >= 2, "normalize_group: group size must be at least 2");
  std::vector<double> out(values.size(), 0.0);
  bool all_equal = true;
  for (double v : values) all_equal = all_equal && v == values.front();
  if (all_equal) return out;

  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

GroupRewards::GroupRewards(std::vector<std::vector<int>> rows) : rows_(std::move(rows)) {
  require(rows_.size() >= 2, "group rewards need at least two rollouts");
  const std::size_t k = rows_.front().size();
  require(k >= 1, "group rewards need K >= 1");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    require(row.size() == k, "group rewards row " + std::to_string(i) + " has the wrong width");
    bool seen_zero = false;
    for (int r : row) {
      require(r == 0 || r == 1, "group rewards must be binary");
      require(!(seen_zero && r == 1),
              "group rewards row " + std::to_string(i) + " is not prefix-corrected");
      seen_zero = seen_zero || r == 0;
    }
  }
}

GroupRewards GroupRewards::from_corrected(std::span<const CorrectedRewardVector> rows) {
  std::vector<std::vector<int>> copy;
  copy.reserve(rows.size());
  for (const auto& r : rows) copy.push_back(r.rewards);
  return GroupRewards(std::move(copy));
}

Matrix subproblem_normalize(const GroupRewards& rewards) {
  const std::size_t g = rewards.group_size();
  const std::size_t k = rewards.num_subproblems();
  Matrix adv(g, k);
  std::vector<double> column(g);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < g; ++i) column[i] = rewards(i, j);
    const std::vector<double> normalized = normalize_group(column);
    for (std::size_t i = 0; i < g; ++i) adv(i, j) = normalized[i];
  }
  return adv;
}

std::vector<double> assign_token_advantages(std::span<const double> adv_row,
                                            const TokenSpanMap& span_map) {
  std::vector<double> out(span_map.size(), 0.0);
  for (std::size_t t = 0; t < span_map.size(); ++t) {
    const std::size_t j = span_map.assignment[t];
    if (j == 0) continue;
    require(j <= adv_row.size(), "token assigned to subproblem " + std::to_string(j) +
                                     " but only " + std::to_string(adv_row.size()) +
                                     " advantages given");
    out[t] = adv_row[j - 1];
  }
  return out;
}

double advantage_magnitude_bound(std::size_t group_size) {
  require(group_size >= 2, "advantage_magnitude_bound: G must be at least 2");
  return std::sqrt(static_cast<double>(group_size - 1));
}

namespace {

using nlohmann::json;

struct PendingRollout {
  std::size_t line = 0;
  std::string rollout_id;
  RawRewardVector raw;
  TokenSpanMap span_map;
};

PendingRollout parse_credit_record(const json& rec, std::size_t line) {
  auto field = [&](const char* key) -> const json& {
    if (!rec.contains(key)) fail(ErrorCode::kValidation, std::string("missing field '") + key + "'");
    return rec.at(key);
  };
  if (!rec.is_object()) fail(ErrorCode::kValidation, "record is not a JSON object");

  PendingRollout out;
  out.line = line;
  const json& id = field("rollout_id");
  if (!id.is_string()) fail(ErrorCode::kValidation, "'rollout_id' must be a string");
  out.rollout_id = id.get<std::string>();

  const json& rewards = field("rewards");
  if (!rewards.is_array() || rewards.empty()) {
    fail(ErrorCode::kValidation, "'rewards' must be a non-empty array");
  }
  for (const json& r : rewards) {
    if (!r.is_number_integer() || (r.get<int>() != 0 && r.get<int>() != 1)) {
      fail(ErrorCode::kValidation, "'rewards' entries must be 0 or 1");
    }
    out.raw.rewards.push_back(r.get<int>());
  }
  const std::size_t k = out.raw.rewards.size();

  out.raw.well_formed = true;
  if (rec.contains("well_formed")) {
    if (!rec.at("well_formed").is_boolean()) {
      fail(ErrorCode::kValidation, "'well_formed' must be a boolean");
    }
    out.raw.well_formed = rec.at("well_formed").get<bool>();
  }
  if (!out.raw.well_formed) {
    for (int& r : out.raw.rewards) r = 0;
  }

  const json& num_tokens = field("num_tokens");
  if (!num_tokens.is_number_unsigned()) {
    fail(ErrorCode::kValidation, "'num_tokens' must be a non-negative integer");
  }
  const auto n = num_tokens.get<std::size_t>();
  out.span_map.assignment.assign(n, 0);

  const json& spans = field("spans");
  if (!spans.is_array() || spans.size() != k) {
    fail(ErrorCode::kValidation, "'spans' must hold one [begin, end] pair per reward");
  }
  std::size_t previous_end = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const json& s = spans[j];
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_unsigned() ||
        !s[1].is_number_unsigned()) {
      fail(ErrorCode::kValidation, "spans[" + std::to_string(j) + "] must be [begin, end]");
    }
    const auto begin = s[0].get<std::size_t>();
    const auto end = s[1].get<std::size_t>();
    if (begin > end || end > n || begin < previous_end) {
      fail(ErrorCode::kValidation,
           "spans[" + std::to_string(j) + "] is out of range or overlaps an earlier span");
    }
    previous_end = end;
    if (!out.raw.well_formed) continue;
    for (std::size_t t = begin; t < end; ++t) out.span_map.assignment[t] = j + 1;
  }
  return out;
}

}  // namespace

CreditBatchResult run_credit_batch(std::istream& in) {
  CreditBatchResult result;
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<PendingRollout>> groups;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(text);
      if (!rec.is_object() || !rec.contains("group_id") || !rec.at("group_id").is_string()) {
        fail(ErrorCode::kValidation, "record needs a string 'group_id'");
      }
      const auto group_id = rec.at("group_id").get<std::string>();
      PendingRollout rollout = parse_credit_record(rec, line);
      auto [it, inserted] = groups.try_emplace(group_id);
      if (inserted) group_order.push_back(group_id);
      it->second.push_back(std::move(rollout));
    } catch (const json::exception& e) {
      result.errors.push_back({line, std::string("invalid JSON: ") + e.what()});
    } catch (const Error& e) {
      result.errors.push_back({line, e.what()});
    }
  }

  for (const std::string& group_id : group_order) {
    const auto& members = groups.at(group_id);
    if (members.size() < 2) {
      result.errors.push_back({members.front().line, "group '" + group_id +
                                                          "' has fewer than two valid rollouts"});
      continue;
    }
    const std::size_t k = members.front().raw.rewards.size();
    bool same_k = true;
    for (const auto& m : members) same_k = same_k && m.raw.rewards.size() == k;
    if (!same_k) {
      result.errors.push_back(
          {members.front().line, "group '" + group_id + "' mixes different K"});
      continue;
    }

    std::vector<CorrectedRewardVector> corrected;
    for (const auto& m : members) corrected.push_back(progress_correct(m.raw));
    const Matrix adv = subproblem_normalize(GroupRewards::from_corrected(corrected));
    for (std::size_t i = 0; i < members.size(); ++i) {
      CreditRecordResult out;
      out.group_id = group_id;
      out.rollout_id = members[i].rollout_id;
      out.corrected_rewards = corrected[i].rewards;
      out.progress = corrected[i].progress;
      out.token_advantages = assign_token_advantages(adv.row(i), members[i].span_map);
      result.records.push_back(std::move(out));
    }
  }
  return result;
}

void write_credit_results(std::ostream& out, std::span<const CreditRecordResult> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["group_id"] = r.group_id;
    j["rollout_id"] = r.rollout_id;
    j["corrected_rewards"] = r.corrected_rewards;
    j["progress"] = r.progress;
    j["token_advantages"] = r.token_advantages;
    out << j.dump() << '\n';
  }
}

}  // namespace scrl
