#ifndef LATALIGN_TYPES_HPP
#define LATALIGN_TYPES_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace latalign {

using TokenId = int;

// Token inventory with the two reserved ids every objective needs: the blank
// token emitted by delimiter steps and the end-of-sequence marker.
struct Vocab {
  std::vector<std::string> tokens;
  TokenId blank_id = -1;
  TokenId eos_id = -1;

  int size() const { return static_cast<int>(tokens.size()); }

  // index of a token string, -1 if absent
  TokenId find(const std::string& tok) const;

  // throws std::invalid_argument on duplicate tokens or bad reserved ids
  void check() const;
};

// Gold sequence y_1..y_n. Targets never contain the blank token.
struct TargetSeq {
  std::vector<TokenId> ids;

  int length() const { return static_cast<int>(ids.size()); }
  TokenId at(int i) const { return ids[static_cast<std::size_t>(i - 1)]; }  // 1-based

  void check(const Vocab& vocab) const;
};

// m rows of log-probabilities over the vocabulary, natural log, row-major.
// Each row is expected to be a normalized distribution; check() verifies
// log-sum-exp(row) == 0 within tolerance.
struct LogProbMatrix {
  int rows = 0;
  int vocab_size = 0;
  std::vector<double> values;  // rows * vocab_size

  static constexpr double kRowNormTol = 1e-6;

  double at(int j, TokenId v) const {  // j is 1-based prediction position
    return values[static_cast<std::size_t>(j - 1) * vocab_size + v];
  }
  double& at(int j, TokenId v) {
    return values[static_cast<std::size_t>(j - 1) * vocab_size + v];
  }
  const double* row(int j) const { return values.data() + static_cast<std::size_t>(j - 1) * vocab_size; }
  double* row(int j) { return values.data() + static_cast<std::size_t>(j - 1) * vocab_size; }

  static LogProbMatrix zeros(int rows, int vocab_size);

  void check(const Vocab& vocab) const;
};

// One (Y, P) problem instance together with its vocabulary.
struct Instance {
  Vocab vocab;
  TargetSeq target;
  LogProbMatrix logprobs;

  void check() const;
};

}  // namespace latalign

#endif
