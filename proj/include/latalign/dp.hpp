#ifndef LATALIGN_DP_HPP
#define LATALIGN_DP_HPP

#include <optional>
#include <vector>

#include "latalign/path.hpp"
#include "latalign/types.hpp"

namespace latalign {

enum class Aggregation { Sum, Max };

// Configuration of the latent alignment dynamic program. Operators and
// aggregation are orthogonal: sum over the AXE operator set and max over the
// CTC set are supported extensions beyond the two canonical objectives.
struct DpConfig {
  OperatorSet ops;
  Aggregation aggregation = Aggregation::Sum;
  bool normalize_by_target_len = true;
  bool keep_table = false;  // retain the aggregation lattice for diagnostics
};

struct DpResult {
  // -log of the aggregate likelihood, divided by n when normalization is on.
  // +inf with no_valid_path set when the operator set admits no path.
  double neg_log_loss = 0.0;
  bool no_valid_path = false;
  std::optional<AlignmentPath> best_path;          // Max aggregation only
  std::optional<std::vector<double>> table;        // (n+1) x (m+1), row-major
  int table_cols = 0;
};

// Dynamic program over the operator-defined alignment subspace: fills the
// (n+1) x (m+1) lattice A with A(0,0) = 0, combining enabled-operator
// contributions per cell by log-sum-exp (Sum) or max (Max), and reads the
// answer from A(n,m). Max mode backtraces the argmax path with the fixed
// tie-break align > delimiter > clone_target > clone_prediction.
DpResult latent_loss(const TargetSeq& target, const LogProbMatrix& logprobs,
                     const Vocab& vocab, const DpConfig& cfg);

// Gradient result; grad is m x |V| row-major, d neg_log_loss / d log p_j(v).
struct GradResult {
  bool no_valid_path = false;
  std::vector<double> grad;
  int rows = 0;
  int vocab_size = 0;

  double at(int j, TokenId v) const {
    return grad[static_cast<std::size_t>(j - 1) * vocab_size + v];
  }
};

// Exact gradient of the Sum objective via the forward-backward lattices:
// minus the posterior expected number of times prediction j emits token v,
// normalized consistently with cfg.
GradResult sum_loss_grad(const TargetSeq& target, const LogProbMatrix& logprobs,
                         const Vocab& vocab, const DpConfig& cfg);

// Subgradient of the Max objective: counts token emissions along the
// backtraced best path.
GradResult max_loss_grad(const TargetSeq& target, const LogProbMatrix& logprobs,
                         const Vocab& vocab, const DpConfig& cfg);

// Per-token cross entropy -(1/n) sum_i log p_i(y_i); requires m == n.
double cross_entropy(const TargetSeq& target, const LogProbMatrix& logprobs,
                     bool normalize_by_target_len = true);

}  // namespace latalign

#endif
