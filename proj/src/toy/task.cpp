#include "latalign/toy/task.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "latalign/rng.hpp"

namespace latalign::toy {

namespace {

std::string content_token(int k) {
  return "w" + std::string(k < 10 ? "0" : "") + std::to_string(k);
}

}  // namespace

void TaskSpec::check() const {
  if (vocab_size < 6) throw std::invalid_argument("task vocab_size too small");
  if (min_len < 1 || max_len < min_len) throw std::invalid_argument("bad source length bounds");
  if (substitution_table.empty()) throw std::invalid_argument("substitution table is empty");
  if (train_size < 0 || valid_size < 0 || test_size < 0) throw std::invalid_argument("negative split size");
  for (const auto& [src, images] : substitution_table) {
    if (images.empty() || images.size() > 2) {
      throw std::invalid_argument("substitution images for \"" + src + "\" must have 1 or 2 tokens");
    }
  }
}

TaskSpec default_task_spec() {
  TaskSpec spec;
  spec.substitution_table["."] = {"."};
  for (int k = 0; k < 16; ++k) spec.substitution_table[content_token(k)] = {content_token(k)};
  // two length-doubling paraphrase pairs; images stay unique across the table
  spec.substitution_table[content_token(5)] = {content_token(16), content_token(17)};
  spec.substitution_table[content_token(12)] = {content_token(18), content_token(19)};
  return spec;
}

Vocab task_vocab(const TaskSpec& spec) {
  Vocab v;
  v.tokens = {"<eps>", "<eos>", "<bos>", "."};
  for (int k = 0; k + 4 < spec.vocab_size; ++k) v.tokens.push_back(content_token(k));
  v.blank_id = 0;
  v.eos_id = 1;
  v.check();
  return v;
}

IdTable resolve_table(const TaskSpec& spec, const Vocab& vocab) {
  IdTable table;
  for (const auto& [src, images] : spec.substitution_table) {
    const TokenId sid = vocab.find(src);
    if (sid < 0) throw std::invalid_argument("substitution source token not in vocab: " + src);
    std::vector<TokenId> ids;
    for (const auto& img : images) {
      const TokenId iid = vocab.find(img);
      if (iid < 0) throw std::invalid_argument("substitution image token not in vocab: " + img);
      ids.push_back(iid);
    }
    table[sid] = std::move(ids);
  }
  return table;
}

TargetSeq derive_target(const std::vector<TokenId>& source, const IdTable& table, const Vocab& vocab) {
  TargetSeq t;
  for (TokenId s : source) {
    const auto it = table.find(s);
    if (it == table.end()) throw std::invalid_argument("source token has no substitution entry");
    for (TokenId img : it->second) t.ids.push_back(img);
  }
  t.ids.push_back(vocab.eos_id);
  return t;
}

Dataset gen_dataset(const TaskSpec& spec) {
  spec.check();
  const Vocab vocab = task_vocab(spec);
  const IdTable table = resolve_table(spec, vocab);

  // source alphabet: table keys other than ".", in vocab order
  std::vector<TokenId> alphabet;
  for (const auto& [sid, images] : table) {
    if (sid != kDotId) alphabet.push_back(sid);
  }
  std::sort(alphabet.begin(), alphabet.end());
  const int K = static_cast<int>(alphabet.size());
  if (K < spec.max_len) throw std::invalid_argument("source alphabet smaller than max_len");

  const int total = spec.train_size + spec.valid_size + spec.test_size;
  Rng rng(spec.seed);
  std::set<std::vector<TokenId>> seen;
  std::vector<Example> pool;
  long dry_spell = 0;  // consecutive draws without a new distinct source
  while (static_cast<int>(pool.size()) < total) {
    if (++dry_spell > 50000) {
      throw std::invalid_argument("task space too small for the requested split sizes");
    }
    const int len = static_cast<int>(rng.uniform_int(spec.min_len, spec.max_len));
    std::vector<int> gaps(static_cast<std::size_t>(len - 1));
    int span = 1;
    for (auto& g : gaps) {
      g = static_cast<int>(rng.uniform_int(1, 2));
      span += g;
    }
    if (span > K) continue;
    const int start = static_cast<int>(rng.uniform_int(0, K - span));
    std::vector<TokenId> source;
    int idx = start;
    source.push_back(alphabet[static_cast<std::size_t>(idx)]);
    for (int g : gaps) {
      idx += g;
      source.push_back(alphabet[static_cast<std::size_t>(idx)]);
    }
    source.push_back(kDotId);
    if (!seen.insert(source).second) continue;
    dry_spell = 0;
    Example ex;
    ex.target = derive_target(source, table, vocab);
    ex.source = std::move(source);
    pool.push_back(std::move(ex));
  }

  Dataset ds;
  ds.train.assign(pool.begin(), pool.begin() + spec.train_size);
  ds.valid.assign(pool.begin() + spec.train_size, pool.begin() + spec.train_size + spec.valid_size);
  ds.test.assign(pool.begin() + spec.train_size + spec.valid_size, pool.end());
  return ds;
}

double Dataset::mean_target_len() const {
  double sum = 0.0;
  for (const auto& ex : train) sum += ex.target.length();
  return train.empty() ? 0.0 : sum / static_cast<double>(train.size());
}

}  // namespace latalign::toy
