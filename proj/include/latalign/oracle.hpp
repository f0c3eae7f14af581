#ifndef LATALIGN_ORACLE_HPP
#define LATALIGN_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "latalign/path.hpp"
#include "latalign/rng.hpp"
#include "latalign/types.hpp"

namespace latalign {

// Exhaustive enumeration guard: instances above this are rejected.
inline constexpr int kOracleCellLimit = 64;  // n * m

// Every valid operator sequence from (0,0) to (n,m). Throws when n*m exceeds
// the cell limit.
std::vector<AlignmentPath> enumerate_paths(int n, int m, const OperatorSet& ops);

// Number of valid paths, computed from the displacement recurrences alone.
// Independent of the enumerator; used to cross-check it and to sample.
std::uint64_t count_paths(int n, int m, const OperatorSet& ops);

// Uniformly random valid path, weighted by the path counts. Requires at
// least one valid path.
AlignmentPath sample_valid_path(int n, int m, const OperatorSet& ops, Rng& rng);

struct EnumerationResult {
  std::vector<AlignmentPath> paths;
  double sum_log;            // log sum_paths exp(log-likelihood)
  double max_log;            // max over paths; -inf when no path exists
  AlignmentPath argmax_path; // empty when no path exists
};

// Brute-force evaluation of the sum and max aggregates over every valid
// path. Argmax ties within 1e-12 resolve by the operator preference order,
// compared from the end of the path (matching the DP backtrace).
EnumerationResult oracle_loss(const TargetSeq& target, const LogProbMatrix& logprobs,
                              const Vocab& vocab, const OperatorSet& ops);

// Likelihood of a single path as a plain product of probabilities. A second
// route to path_log_likelihood for cross-checks; only usable where the
// product does not underflow.
double oracle_path_likelihood(const TargetSeq& target, const LogProbMatrix& logprobs,
                              const Vocab& vocab, const AlignmentPath& path);

}  // namespace latalign

#endif
