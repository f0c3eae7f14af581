#ifndef LATALIGN_PATH_HPP
#define LATALIGN_PATH_HPP

#include <string>
#include <vector>

#include "latalign/ops.hpp"
#include "latalign/types.hpp"

namespace latalign {

// One operator application; (i, j) is the lattice cell the step lands in.
struct PathStep {
  OperatorKind op;
  int i;
  int j;

  bool operator==(const PathStep&) const = default;
};

// Ordered operator applications from cell (0,0) to (n,m).
struct AlignmentPath {
  std::vector<PathStep> steps;

  bool operator==(const AlignmentPath&) const = default;

  int target_len() const { return steps.empty() ? 0 : steps.back().i; }
  int pred_len() const { return steps.empty() ? 0 : steps.back().j; }

  // "align align delimiter ..." -- the operator trace
  std::string trace() const;
};

// Result of checking a path against the lattice rules; ok() when valid,
// otherwise names the first offending step and rule.
struct PathCheck {
  bool valid = true;
  int step_index = -1;  // 0-based into steps; -1 when the path as a whole fails
  std::string rule;

  bool ok() const { return valid; }
};

PathCheck validate_path(const AlignmentPath& path, int n, int m, const OperatorSet& ops);

// alpha: target position i (1-based) -> consecutive prediction positions;
// unaligned: prediction positions spent on the blank token.
struct Alignment {
  std::vector<std::vector<int>> alpha;  // alpha[i-1], each sorted ascending
  std::vector<int> unaligned;           // sorted ascending

  int target_len() const { return static_cast<int>(alpha.size()); }

  // "2 3 4 5 6 6" when every alpha(i) is a singleton, else sets in braces
  std::string describe() const;
};

struct AlignmentResult {
  bool valid = false;
  Alignment alignment;
  std::string error;
};

// Converts a path to its alignment. Fails when the conversion breaks an
// alignment invariant (e.g. a delimiter splitting a clone-target run leaves
// alpha(i) non-consecutive); such paths are lattice-valid but have no
// well-formed alpha.
AlignmentResult path_to_alignment(const AlignmentPath& path);

// Sum over steps of the step's log factor: log p_j(y_i) for target-consuming
// operators, log p_j(blank) for delimiters. Pure; reads only the steps.
double path_log_likelihood(const TargetSeq& target, const LogProbMatrix& logprobs,
                           const Vocab& vocab, const AlignmentPath& path);

}  // namespace latalign

#endif
