#include "latalign/toy/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "latalign/numeric.hpp"

namespace latalign::toy {

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::CrossEntropy: return "ce";
    case Objective::Axe: return "axe";
    case Objective::AxeCausal: return "axe_causal";
    case Objective::Ctc: return "ctc";
    case Objective::CtcDoubled: return "ctc_doubled";
  }
  return "?";
}

Objective objective_from_name(const std::string& name) {
  if (name == "ce") return Objective::CrossEntropy;
  if (name == "axe") return Objective::Axe;
  if (name == "axe_causal") return Objective::AxeCausal;
  if (name == "ctc") return Objective::Ctc;
  if (name == "ctc_doubled") return Objective::CtcDoubled;
  throw std::invalid_argument("unknown objective: " + name);
}

void TrainConfig::check() const {
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (embed_dim < 1 || hidden_dim < 1) throw std::invalid_argument("bad model dims");
}

std::vector<TokenId> objective_inputs(Objective obj, const ToyModel& model, const TargetSeq& y) {
  return obj == Objective::CtcDoubled ? doubled_inputs(model, y) : teacher_inputs(model, y);
}

ExampleLoss example_loss(Objective obj, const TargetSeq& target, const LogProbMatrix& logprobs,
                         const Vocab& vocab) {
  const int n = target.length();
  const int m = logprobs.rows;
  const int V = logprobs.vocab_size;
  ExampleLoss out;
  out.dlogp.assign(static_cast<std::size_t>(m) * V, 0.0);

  switch (obj) {
    case Objective::CrossEntropy: {
      out.loss = cross_entropy(target, logprobs);
      for (int i = 1; i <= n; ++i) {
        out.dlogp[static_cast<std::size_t>(i - 1) * V + target.at(i)] = -1.0 / n;
      }
      return out;
    }
    case Objective::Axe:
    case Objective::AxeCausal: {
      const DpConfig cfg{OperatorSet::axe(obj == Objective::AxeCausal), Aggregation::Max, true, false};
      const DpResult res = latent_loss(target, logprobs, vocab, cfg);
      if (res.no_valid_path) {
        out.skipped = true;
        return out;
      }
      out.loss = res.neg_log_loss;
      for (const auto& st : res.best_path->steps) {
        const TokenId tok = consumes_target(st.op) ? target.at(st.i) : vocab.blank_id;
        out.dlogp[static_cast<std::size_t>(st.j - 1) * V + tok] -= 1.0 / n;
      }
      return out;
    }
    case Objective::Ctc:
    case Objective::CtcDoubled: {
      const DpConfig cfg{OperatorSet::ctc(), Aggregation::Sum, true, false};
      const DpResult res = latent_loss(target, logprobs, vocab, cfg);
      if (res.no_valid_path) {
        out.skipped = true;
        return out;
      }
      out.loss = res.neg_log_loss;
      const GradResult g = sum_loss_grad(target, logprobs, vocab, cfg);
      out.dlogp = g.grad;
      return out;
    }
  }
  throw std::logic_error("unreachable objective");
}

namespace {

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};

void apply_update(std::vector<double>& theta, std::vector<double>& grad, const TrainConfig& cfg,
                  AdamState& adam) {
  if (cfg.grad_clip > 0.0) {
    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    const double norm = std::sqrt(norm2);
    if (norm > cfg.grad_clip) {
      const double scale = cfg.grad_clip / norm;
      for (double& g : grad) g *= scale;
    }
  }
  if (!cfg.adam) {
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= cfg.lr * grad[k];
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (adam.m.empty()) {
    adam.m.assign(theta.size(), 0.0);
    adam.v.assign(theta.size(), 0.0);
  }
  adam.t += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam.t));
  for (std::size_t k = 0; k < theta.size(); ++k) {
    adam.m[k] = b1 * adam.m[k] + (1.0 - b1) * grad[k];
    adam.v[k] = b2 * adam.v[k] + (1.0 - b2) * grad[k] * grad[k];
    theta[k] -= cfg.lr * (adam.m[k] / c1) / (std::sqrt(adam.v[k] / c2) + eps);
  }
}

int max_decode_len_for(const std::vector<Example>& examples) {
  int longest = 0;
  for (const auto& ex : examples) longest = std::max(longest, ex.target.length());
  return 2 * longest + 4;
}

}  // namespace

PatternStats alignment_pattern_stats(const ToyModel& model, const std::vector<Example>& examples,
                                     const Vocab& vocab, bool causal) {
  PatternStats stats;
  if (examples.empty()) return stats;
  const DpConfig cfg{OperatorSet::axe(causal), Aggregation::Max, true, false};
  int trivial = 0, degenerate = 0;
  for (const auto& ex : examples) {
    const LogProbMatrix lp = forward_teacher_forced(model, ex.source, ex.target);
    const DpResult res = latent_loss(ex.target, lp, vocab, cfg);
    if (res.no_valid_path) continue;
    const auto& steps = res.best_path->steps;
    const int n = ex.target.length();
    bool is_trivial = static_cast<int>(steps.size()) == n;
    for (const auto& st : steps) {
      if (st.op != OperatorKind::Align) is_trivial = false;
    }
    if (is_trivial) {
      ++trivial;
      continue;
    }
    bool is_degenerate = static_cast<int>(steps.size()) == n + 1 &&
                         steps.front().op == OperatorKind::Delimiter &&
                         steps.back().op == OperatorKind::ClonePrediction;
    if (is_degenerate) {
      for (std::size_t k = 1; k + 1 < steps.size(); ++k) {
        if (steps[k].op != OperatorKind::Align) is_degenerate = false;
      }
    }
    if (is_degenerate) ++degenerate;
  }
  stats.trivial_rate = static_cast<double>(trivial) / static_cast<double>(examples.size());
  stats.degenerate_rate = static_cast<double>(degenerate) / static_cast<double>(examples.size());
  return stats;
}

EvalResult evaluate(const ToyModel& model, const std::vector<Example>& examples,
                    Objective obj, const Vocab& vocab, int max_decode_len) {
  EvalResult res;
  if (examples.empty()) return res;
  if (max_decode_len <= 0) max_decode_len = max_decode_len_for(examples);

  double loss_sum = 0.0;
  int scored = 0, empty = 0, matched = 0;
  for (const auto& ex : examples) {
    const ForwardCache cache = forward_cached(model, ex.source, objective_inputs(obj, model, ex.target));
    const ExampleLoss el = example_loss(obj, ex.target, cache.logprobs, vocab);
    if (el.skipped) {
      ++res.skipped;
    } else {
      loss_sum += el.loss;
      ++scored;
    }

    const std::vector<TokenId> decoded =
        decode(model, ex.source, DecodeMode::Greedy, 1, max_decode_len);
    std::vector<TokenId> stripped = strip_blanks(decoded, vocab.blank_id);
    if (stripped == ex.target.ids) ++matched;
    if (!stripped.empty() && stripped.back() == vocab.eos_id) stripped.pop_back();
    if (stripped.empty()) ++empty;
  }
  res.loss = scored > 0 ? loss_sum / scored : 0.0;
  res.empty_rate = static_cast<double>(empty) / static_cast<double>(examples.size());
  res.exact_match = static_cast<double>(matched) / static_cast<double>(examples.size());

  const PatternStats ps =
      alignment_pattern_stats(model, examples, vocab, obj == Objective::AxeCausal);
  res.trivial_rate = ps.trivial_rate;
  res.degenerate_rate = ps.degenerate_rate;
  return res;
}

std::string Metrics::to_csv() const {
  std::ostringstream out;
  out << "epoch,split,loss,empty_rate,exact_match,trivial_rate,degenerate_rate\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.split << ',' << r.loss << ',' << r.empty_rate << ','
        << r.exact_match << ',' << r.trivial_rate << ',' << r.degenerate_rate << "\n";
  }
  return out.str();
}

const MetricsRow* Metrics::last(const std::string& split) const {
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->split == split) return &*it;
  }
  return nullptr;
}

TrainOutcome train(const TrainConfig& cfg, const TaskSpec& spec) {
  cfg.check();
  const Dataset ds = gen_dataset(spec);
  const Vocab vocab = task_vocab(spec);

  Rng rng(cfg.seed);
  ModelDims dims;
  dims.vocab = vocab.size();
  dims.embed = cfg.embed_dim;
  dims.hidden = cfg.hidden_dim;
  ToyModel model = init_model(dims, kBosId, vocab.blank_id, vocab.eos_id, rng);

  const int max_decode_len = max_decode_len_for(ds.train);
  const int sample_size = std::min<int>(cfg.pattern_sample, static_cast<int>(ds.train.size()));
  const std::vector<Example> train_sample(ds.train.begin(), ds.train.begin() + sample_size);

  TrainOutcome out;
  out.mean_target_len = ds.mean_target_len();

  std::vector<std::size_t> order(ds.train.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;

  AdamState adam;
  std::vector<double> batch_grad(model.theta.size(), 0.0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int scored = 0;
    std::size_t pos = 0;
    while (pos < order.size()) {
      const std::size_t batch_end = std::min(order.size(), pos + static_cast<std::size_t>(cfg.batch_size));
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      int in_batch = 0;
      for (; pos < batch_end; ++pos) {
        const Example& ex = ds.train[order[pos]];
        const ForwardCache cache =
            forward_cached(model, ex.source, objective_inputs(cfg.objective, model, ex.target));
        const ExampleLoss el = example_loss(cfg.objective, ex.target, cache.logprobs, vocab);
        if (el.skipped) continue;
        if (!std::isfinite(el.loss)) {
          throw TrainDivergedError("loss is not finite at epoch " + std::to_string(epoch) +
                                   " (objective " + objective_name(cfg.objective) + ")");
        }
        epoch_loss += el.loss;
        ++scored;
        ++in_batch;
        const std::vector<double> g = backward(model, cache, el.dlogp);
        for (std::size_t k = 0; k < batch_grad.size(); ++k) batch_grad[k] += g[k];
      }
      if (in_batch == 0) continue;
      for (auto& g : batch_grad) g /= static_cast<double>(in_batch);
      apply_update(model.theta, batch_grad, cfg, adam);
    }

    MetricsRow train_row;
    train_row.epoch = epoch;
    train_row.split = "train";
    train_row.loss = scored > 0 ? epoch_loss / scored : 0.0;
    const PatternStats ps = alignment_pattern_stats(model, train_sample, vocab,
                                                    cfg.objective == Objective::AxeCausal);
    train_row.trivial_rate = ps.trivial_rate;
    train_row.degenerate_rate = ps.degenerate_rate;
    train_row.empty_rate = std::nan("");
    train_row.exact_match = std::nan("");
    out.history.rows.push_back(train_row);

    const EvalResult val = evaluate(model, ds.valid, cfg.objective, vocab, max_decode_len);
    MetricsRow val_row{epoch, "valid", val.loss, val.empty_rate, val.exact_match,
                       val.trivial_rate, val.degenerate_rate};
    out.history.rows.push_back(val_row);

    if (cfg.stop_at_train_loss > 0.0 && train_row.loss <= cfg.stop_at_train_loss) break;
    if (val.exact_match >= cfg.stop_at_exact_match) break;
  }

  out.model = std::move(model);
  return out;
}

}  // namespace latalign::toy
