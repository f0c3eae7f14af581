#ifndef LATALIGN_TESTS_FIGURES_HPP
#define LATALIGN_TESTS_FIGURES_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "latalign/types.hpp"

namespace latalign::testing {

// Builds an instance from per-position top probability lists: every token
// not listed in a row shares the leftover mass uniformly.
inline Instance instance_from_top_lists(
    const std::vector<std::string>& vocab_tokens, const std::vector<std::string>& target,
    const std::vector<std::vector<std::pair<std::string, double>>>& tops) {
  Instance inst;
  inst.vocab.tokens = vocab_tokens;
  inst.vocab.blank_id = inst.vocab.find("<eps>");
  inst.vocab.eos_id = inst.vocab.find("<eos>");
  inst.vocab.check();
  for (const auto& t : target) inst.target.ids.push_back(inst.vocab.find(t));
  inst.target.check(inst.vocab);

  const int V = inst.vocab.size();
  const int m = static_cast<int>(tops.size());
  inst.logprobs = LogProbMatrix::zeros(m, V);
  for (int j = 1; j <= m; ++j) {
    std::vector<bool> listed(static_cast<std::size_t>(V), false);
    double mass = 0.0;
    for (const auto& [tok, p] : tops[static_cast<std::size_t>(j - 1)]) {
      const TokenId id = inst.vocab.find(tok);
      listed[static_cast<std::size_t>(id)] = true;
      inst.logprobs.at(j, id) = std::log(p);
      mass += p;
    }
    int others = 0;
    for (bool b : listed) {
      if (!b) ++others;
    }
    const double fill = std::log((1.0 - mass) / others);
    for (TokenId v = 0; v < V; ++v) {
      if (!listed[static_cast<std::size_t>(v)]) inst.logprobs.at(j, v) = fill;
    }
  }
  inst.logprobs.check(inst.vocab);
  return inst;
}

// "it is rainy today": the model favors "it is so rainy today"; the best
// alignment is (1,2,4,5,5) via align align delimiter align align
// clone_prediction.
inline Instance weather_instance() {
  const std::vector<std::string> vocab = {
      "it",   "is",   "rainy", "today", "<eos>", "so",   "however", "the",  "but",
      "looks", "this", "rain",  "very",  "and",   "good", "tonight", "<eps>"};
  const std::vector<std::string> target = {"it", "is", "rainy", "today", "<eos>"};
  const std::vector<std::vector<std::pair<std::string, double>>> tops = {
      {{"it", 0.58}, {"however", 0.22}, {"the", 0.12}, {"but", 0.05}},
      {{"is", 0.58}, {"the", 0.22}, {"looks", 0.12}, {"this", 0.05}},
      {{"so", 0.58}, {"rain", 0.22}, {"very", 0.12}, {"<eps>", 0.05}},
      {{"rainy", 0.58}, {"good", 0.22}, {"and", 0.12}, {"very", 0.05}},
      {{"today", 0.58}, {"tonight", 0.22}, {"<eos>", 0.12}, {"good", 0.05}}};
  return instance_from_top_lists(vocab, target, tops);
}

// "thank you for listening . <eos>" with the shifted constant alignment
// (2,3,4,5,6,6): the model predicts its teacher-forced input at each
// position and shares the last prediction between "." and <eos>.
inline Instance listening_instance() {
  const std::vector<std::string> vocab = {
      "thank", "you", "for", "listening", ".", "<eos>", "<eps>", "'s", "super@@",
      "unfortunate", "pre@@", "ke", "cu@@", "is", "audience", "oil", "ver@@",
      "taking", "sever@@", "...", "use", "'"};
  const std::vector<std::string> target = {"thank", "you", "for", "listening", ".", "<eos>"};
  const std::vector<std::vector<std::pair<std::string, double>>> tops = {
      {{"<eps>", 0.999}, {"<eos>", 8e-8}, {"...", 8e-8}, {"use", 7e-8}},
      {{"thank", 0.995}, {"'s", 5e-5}, {"super@@", 2e-5}, {"unfortunate", 2e-5}},
      {{"you", 0.999}, {"pre@@", 2e-7}, {"ke", 2e-7}, {"cu@@", 2e-7}},
      {{"for", 0.999}, {"is", 1e-5}, {"audience", 6e-6}, {"oil", 5e-6}},
      {{"listening", 0.994}, {"ver@@", 3e-5}, {"taking", 2e-5}, {"sever@@", 2e-5}},
      {{".", 0.627}, {"<eos>", 0.370}, {"...", 1e-4}, {"'", 1e-4}}};
  return instance_from_top_lists(vocab, target, tops);
}

}  // namespace latalign::testing

#endif
