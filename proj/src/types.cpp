#include "latalign/types.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "latalign/numeric.hpp"

namespace latalign {

TokenId Vocab::find(const std::string& tok) const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == tok) return static_cast<TokenId>(i);
  }
  return -1;
}

void Vocab::check() const {
  if (tokens.empty()) throw std::invalid_argument("vocab is empty");
  std::unordered_set<std::string> seen;
  for (const auto& t : tokens) {
    if (!seen.insert(t).second) throw std::invalid_argument("duplicate vocab token: " + t);
  }
  const int n = size();
  if (blank_id < 0 || blank_id >= n) throw std::invalid_argument("blank_id out of range");
  if (eos_id < 0 || eos_id >= n) throw std::invalid_argument("eos_id out of range");
  if (blank_id == eos_id) throw std::invalid_argument("blank_id equals eos_id");
}

void TargetSeq::check(const Vocab& vocab) const {
  if (ids.empty()) throw std::invalid_argument("target sequence is empty");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TokenId id = ids[i];
    if (id < 0 || id >= vocab.size()) {
      throw std::invalid_argument("target id out of vocabulary at position " + std::to_string(i + 1));
    }
    if (id == vocab.blank_id) {
      throw std::invalid_argument("target contains the blank token at position " + std::to_string(i + 1));
    }
  }
}

LogProbMatrix LogProbMatrix::zeros(int rows, int vocab_size) {
  LogProbMatrix m;
  m.rows = rows;
  m.vocab_size = vocab_size;
  m.values.assign(static_cast<std::size_t>(rows) * vocab_size, 0.0);
  return m;
}

void LogProbMatrix::check(const Vocab& vocab) const {
  if (rows < 1) throw std::invalid_argument("log-prob matrix has no rows");
  if (vocab_size != vocab.size()) throw std::invalid_argument("log-prob matrix width does not match vocab");
  if (values.size() != static_cast<std::size_t>(rows) * vocab_size) {
    throw std::invalid_argument("log-prob matrix storage size mismatch");
  }
  for (int j = 1; j <= rows; ++j) {
    const std::span<const double> row(values.data() + static_cast<std::size_t>(j - 1) * vocab_size,
                                      static_cast<std::size_t>(vocab_size));
    for (double v : row) {
      if (std::isnan(v)) throw std::invalid_argument("log-prob row " + std::to_string(j) + " contains NaN");
      if (v > kRowNormTol) {
        throw std::invalid_argument("log-prob row " + std::to_string(j) + " has an entry above 0");
      }
    }
    const double lse = log_sum_exp(row);
    if (std::abs(lse) > kRowNormTol) {
      throw std::invalid_argument("log-prob row " + std::to_string(j) + " is not normalized (log-sum-exp = " +
                                  std::to_string(lse) + ")");
    }
  }
}

void Instance::check() const {
  vocab.check();
  target.check(vocab);
  logprobs.check(vocab);
}

}  // namespace latalign
