#ifndef LATALIGN_TOY_TASK_HPP
#define LATALIGN_TOY_TASK_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "latalign/types.hpp"

namespace latalign::toy {

// Synthetic substitution-translation task. Sources are strictly increasing
// runs over the table's source tokens (consecutive indices, gaps of 1 or 2)
// closed by the sentence-final "." token; targets substitute each source
// token with one or two tokens and append <eos>. Increasing runs keep the
// source order recoverable from its token set, which is all a mean-pooled
// encoder can see.
struct TaskSpec {
  int vocab_size = 24;  // includes <eps>, <eos>, <bos>, "."
  int min_len = 4;      // source content length bounds, excluding "."
  int max_len = 10;
  std::map<std::string, std::vector<std::string>> substitution_table;
  int train_size = 2000;
  int valid_size = 200;
  int test_size = 200;
  std::uint64_t seed = 7;

  void check() const;  // throws std::invalid_argument
};

// the stock task: identity substitutions plus two length-doubling pairs
TaskSpec default_task_spec();

// vocab layout: 0 <eps>, 1 <eos>, 2 <bos>, 3 ".", then content tokens w00..
Vocab task_vocab(const TaskSpec& spec);
inline constexpr TokenId kBosId = 2;
inline constexpr TokenId kDotId = 3;

struct Example {
  std::vector<TokenId> source;  // ends with "."
  TargetSeq target;             // substituted source, ends with <eos>
};

struct Dataset {
  std::vector<Example> train, valid, test;

  double mean_target_len() const;
};

// substitution table resolved to ids against the task vocab
using IdTable = std::map<TokenId, std::vector<TokenId>>;
IdTable resolve_table(const TaskSpec& spec, const Vocab& vocab);

// concat of per-token images plus <eos>; pure
TargetSeq derive_target(const std::vector<TokenId>& source, const IdTable& table, const Vocab& vocab);

// Deterministic for a given spec; the three splits are disjoint as token
// sequences. Throws when the spec cannot produce enough distinct sources.
Dataset gen_dataset(const TaskSpec& spec);

}  // namespace latalign::toy

#endif
