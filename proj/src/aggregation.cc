//
// Copyright 2026 The Stosign Authors
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
//


#include "stosign/aggregation.h"

#include <algorithm>
#include <map>
#include <vector>

#include "absl/strings/str_format.h"
#include "stosign/kernels.h"

namespace stosign {
namespace {

absl::Status CheckVotes(std::span<const SignVector> votes) {
  if (votes.empty()) return absl::InvalidArgumentError("no votes to aggregate");
  const size_t d = votes.front().size();
  for (size_t m = 1; m < votes.size(); ++m) {
    if (votes[m].size() != d) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "vote %d has length %d, expected %d", m, votes[m].size(), d));
    }
  }
  return absl::OkStatus();
}

std::vector<int32_t> Tally(std::span<const SignVector> votes) {
  const kernels::KernelTable& k = kernels::ActiveKernels();
  std::vector<int32_t> tally(votes.front().size(), 0);
  for (const SignVector& v : votes) {
    k.accumulate_votes(v.values().data(), v.size(), tally.data());
  }
  return tally;
}

}  // namespace

absl::StatusOr<SignVector> MajorityVote(std::span<const SignVector> votes) {
  if (absl::Status s = CheckVotes(votes); !s.ok()) return s;
  std::vector<int32_t> tally = Tally(votes);
  std::vector<int8_t> out(tally.size());
  kernels::ActiveKernels().signs_from_tally(tally.data(), tally.size(),
                                            out.data());
  return SignVector::Adopt(std::move(out));
}

absl::StatusOr<SignVector> WeightedVote(std::span<const SignVector> votes,
                                        const CreditLedger& ledger) {
  if (absl::Status s = CheckVotes(votes); !s.ok()) return s;
  if (ledger.credits.size() != votes.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d votes but %d credits", votes.size(), ledger.credits.size()));
  }
  const kernels::KernelTable& k = kernels::ActiveKernels();
  const size_t d = votes.front().size();
  // Voters with equal credit are tallied as integers, then scaled once.
  std::map<double, std::vector<int32_t>> by_weight;
  for (size_t m = 0; m < votes.size(); ++m) {
    const double w = std::max(ledger.credits[m], 0.0);
    if (w == 0.0) continue;
    auto [it, fresh] = by_weight.try_emplace(w);
    if (fresh) it->second.assign(d, 0);
    k.accumulate_votes(votes[m].values().data(), d, it->second.data());
  }
  std::vector<double> tally(d, 0.0);
  for (const auto& [w, counts] : by_weight) {
    k.accumulate_weighted(counts.data(), w, d, tally.data());
  }
  std::vector<int8_t> out(d);
  k.signs_from_weighted(tally.data(), d, out.data());
  return SignVector::Adopt(std::move(out));
}

absl::Status UpdateCredits(CreditLedger& ledger,
                           std::span<const SignVector> votes,
                           const SignVector& aggregate) {
  if (absl::Status s = CheckVotes(votes); !s.ok()) return s;
  if (ledger.credits.size() != votes.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d votes but %d credits", votes.size(), ledger.credits.size()));
  }
  const size_t d = aggregate.size();
  if (votes.front().size() != d) {
    return absl::InvalidArgumentError("aggregate length differs from votes");
  }
  if (d == 0) return absl::OkStatus();
  const kernels::KernelTable& k = kernels::ActiveKernels();
  for (size_t m = 0; m < votes.size(); ++m) {
    const auto matches = static_cast<int64_t>(k.count_agreements(
        votes[m].values().data(), aggregate.values().data(), d));
    const int64_t mismatches = static_cast<int64_t>(d) - matches;
    ledger.credits[m] +=
        static_cast<double>(matches - mismatches) / static_cast<double>(d);
  }
  return absl::OkStatus();
}

absl::StatusOr<EfResult> EfAggregate(const ResidualState& state,
                                     std::span<const SignVector> votes) {
  if (absl::Status s = CheckVotes(votes); !s.ok()) return s;
  const auto voters = static_cast<int64_t>(votes.size());
  if (voters % 2 == 0) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "error feedback needs an odd number of voters, got %d", voters));
  }
  if (state.divisor != voters) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "residual divisor %d does not match %d voters", state.divisor, voters));
  }
  const size_t d = votes.front().size();
  if (state.scaled.size() != d) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "residual has length %d, votes have %d", state.scaled.size(), d));
  }
  std::vector<int32_t> tally = Tally(votes);
  EfResult result;
  result.next = state;
  std::vector<int8_t> out(d);
  kernels::ActiveKernels().ef_step(tally.data(), result.next.scaled.data(), d,
                                   out.data());
  result.broadcast = SignVector::Adopt(std::move(out));
  result.scale = 1.0 / static_cast<double>(voters);
  return result;
}

absl::Status CheckParity(const ResidualState& state) {
  for (size_t i = 0; i < state.scaled.size(); ++i) {
    if (state.scaled[i] % 2 != 0) {
      return absl::InternalError(absl::StrFormat(
          "scaled residual %d is odd (%d)", i, state.scaled[i]));
    }
  }
  return absl::OkStatus();
}

}  // namespace stosign
