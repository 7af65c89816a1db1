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


#ifndef STOSIGN_AGGREGATION_H_
#define STOSIGN_AGGREGATION_H_

// Server-side aggregation rules: plain majority vote, credit-weighted vote,
// and majority vote with a server-side residual (error feedback).

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "stosign/vectors.h"

namespace stosign {

// Entrywise sign of the vote sum. A zero sum resolves to +1.
absl::StatusOr<SignVector> MajorityVote(std::span<const SignVector> votes);

// One reputation credit per voter. Credits start at 1 and are stored raw;
// negative credits are clamped to zero only when voting.
struct CreditLedger {
  std::vector<double> credits;

  static CreditLedger Initial(size_t num_voters) {
    return CreditLedger{std::vector<double>(num_voters, 1.0)};
  }
};

// sign(sum_m max(r_m, 0) * vote_m). An all-zero weighted sum gives +1.
absl::StatusOr<SignVector> WeightedVote(std::span<const SignVector> votes,
                                        const CreditLedger& ledger);

// r_m += (matches - mismatches) / d against this round's aggregate.
absl::Status UpdateCredits(CreditLedger& ledger,
                           std::span<const SignVector> votes,
                           const SignVector& aggregate);

// Server residual kept as exact integers: scaled[i] = divisor * e_i, where the
// divisor is the number of voters.
struct ResidualState {
  std::vector<int64_t> scaled;
  int64_t divisor = 1;

  static ResidualState Zero(size_t d, int64_t divisor) {
    return ResidualState{std::vector<int64_t>(d, 0), divisor};
  }
};

struct EfResult {
  SignVector broadcast;
  // Workers step by lr * scale * broadcast.
  double scale = 1.0;
  ResidualState next;
};

// Error-feedback aggregation with the server compressor (1/M) sign(x):
// x = (v + s) / M, broadcast = sign(v + s), s' = v + s - broadcast, where v is
// the vote sum. The voter count must be odd and equal to state.divisor.
absl::StatusOr<EfResult> EfAggregate(const ResidualState& state,
                                     std::span<const SignVector> votes);

// Every scaled residual entry must be even.
absl::Status CheckParity(const ResidualState& state);

}  // namespace stosign

#endif  // STOSIGN_AGGREGATION_H_
