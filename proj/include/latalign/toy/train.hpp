#ifndef LATALIGN_TOY_TRAIN_HPP
#define LATALIGN_TOY_TRAIN_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "latalign/dp.hpp"
#include "latalign/toy/model.hpp"
#include "latalign/toy/task.hpp"

namespace latalign::toy {

enum class Objective { CrossEntropy, Axe, AxeCausal, Ctc, CtcDoubled };

const char* objective_name(Objective o);
Objective objective_from_name(const std::string& name);  // throws on unknown

struct TrainConfig {
  Objective objective = Objective::CrossEntropy;
  double lr = 1e-3;
  int epochs = 30;
  int batch_size = 16;
  std::uint64_t seed = 1;
  double grad_clip = 5.0;  // global norm; <= 0 disables
  bool adam = true;        // adaptive moments; plain SGD when false
  int embed_dim = 16;
  int hidden_dim = 96;
  int pattern_sample = 500;  // train examples probed for alignment patterns
  // stop early once this train loss is reached; <= 0 disables
  double stop_at_train_loss = 0.0;
  // stop early once this validation exact-match rate is reached; > 1 disables
  double stop_at_exact_match = 2.0;

  void check() const;
};

// One metrics row as emitted to CSV; rates not measured for a row are NaN.
struct MetricsRow {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double empty_rate = 0.0;
  double exact_match = 0.0;
  double trivial_rate = 0.0;
  double degenerate_rate = 0.0;
};

struct Metrics {
  std::vector<MetricsRow> rows;

  std::string to_csv() const;
  const MetricsRow* last(const std::string& split) const;
};

struct TrainOutcome {
  ToyModel model;
  Metrics history;
  double mean_target_len = 0.0;
};

// thrown when the loss turns NaN/inf; carries the offending epoch
struct TrainDivergedError : std::runtime_error {
  explicit TrainDivergedError(const std::string& what) : std::runtime_error(what) {}
};

// teacher-forced loss and its gradient w.r.t. the log-prob rows
struct ExampleLoss {
  bool skipped = false;  // no valid alignment path
  double loss = 0.0;     // per target token
  std::vector<double> dlogp;
};

ExampleLoss example_loss(Objective obj, const TargetSeq& target, const LogProbMatrix& logprobs,
                         const Vocab& vocab);

// decoder inputs appropriate for the objective (doubled for CtcDoubled)
std::vector<TokenId> objective_inputs(Objective obj, const ToyModel& model, const TargetSeq& y);

// Deterministic training run; metrics recorded per epoch for the train
// sample and the validation split.
TrainOutcome train(const TrainConfig& cfg, const TaskSpec& spec);

struct EvalResult {
  double loss = 0.0;
  double empty_rate = 0.0;
  double exact_match = 0.0;
  double trivial_rate = 0.0;
  double degenerate_rate = 0.0;
  int skipped = 0;
};

// The one decode/strip/match pipeline every objective is judged by; loss is
// the objective's own, pattern rates come from the max-aggregation probe.
EvalResult evaluate(const ToyModel& model, const std::vector<Example>& examples,
                    Objective obj, const Vocab& vocab, int max_decode_len);

struct PatternStats {
  double trivial_rate = 0.0;
  double degenerate_rate = 0.0;
};

// Classifies each example's best path under the max-aggregation probe as
// trivial (all align), degenerate (delimiter, align^{n-1}, clone_prediction)
// or other, and reports the rates.
PatternStats alignment_pattern_stats(const ToyModel& model, const std::vector<Example>& examples,
                                     const Vocab& vocab, bool causal);

}  // namespace latalign::toy

#endif
