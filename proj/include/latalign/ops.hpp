#ifndef LATALIGN_OPS_HPP
#define LATALIGN_OPS_HPP

#include <array>
#include <string>

namespace latalign {

// The four local operators a latent alignment dynamic program can apply.
// Each moves through the (target, prediction) lattice by a fixed displacement:
//   Align           (+1,+1)  predict y_i with p_j
//   CloneTarget     ( 0,+1)  repredict y_i with the next distribution
//   ClonePrediction (+1, 0)  reuse p_j for the next target token
//   Delimiter       ( 0,+1)  spend p_j on the blank token
enum class OperatorKind { Align, CloneTarget, ClonePrediction, Delimiter };

inline constexpr std::array<OperatorKind, 4> kAllOperators = {
    OperatorKind::Align, OperatorKind::CloneTarget, OperatorKind::ClonePrediction,
    OperatorKind::Delimiter};

// Deterministic tie-break order used by Viterbi backtrace and the oracle.
// Diagonal progress first, so exact ties resolve to the trivial alignment.
inline constexpr std::array<OperatorKind, 4> kTieBreakOrder = {
    OperatorKind::Align, OperatorKind::Delimiter, OperatorKind::CloneTarget,
    OperatorKind::ClonePrediction};

struct Displacement {
  int di;
  int dj;
};

inline constexpr Displacement displacement(OperatorKind op) {
  switch (op) {
    case OperatorKind::Align: return {1, 1};
    case OperatorKind::CloneTarget: return {0, 1};
    case OperatorKind::ClonePrediction: return {1, 0};
    case OperatorKind::Delimiter: return {0, 1};
  }
  return {0, 0};
}

// True for operators whose factor is p_j(y_i); Delimiter spends p_j on the
// blank instead and is exempt from the causal restriction.
inline constexpr bool consumes_target(OperatorKind op) {
  return op != OperatorKind::Delimiter;
}

const char* op_name(OperatorKind op);

// Which operators the dynamic program may use, plus the causal restriction
// (a target-consuming step landing in (i,j) requires i >= j).
struct OperatorSet {
  bool align = true;  // always on; nothing advances the target otherwise
  bool clone_target = false;
  bool clone_prediction = false;
  bool delimiter = false;
  bool causal = false;

  bool enabled(OperatorKind op) const {
    switch (op) {
      case OperatorKind::Align: return align;
      case OperatorKind::CloneTarget: return clone_target;
      case OperatorKind::ClonePrediction: return clone_prediction;
      case OperatorKind::Delimiter: return delimiter;
    }
    return false;
  }

  static OperatorSet ctc(bool causal = false) {
    return OperatorSet{true, true, false, true, causal};
  }
  static OperatorSet axe(bool causal = false) {
    return OperatorSet{true, false, true, true, causal};
  }

  std::string describe() const;
};

}  // namespace latalign

#endif
