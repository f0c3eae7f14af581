#include "latalign/dp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latalign/numeric.hpp"

namespace latalign {

namespace {

constexpr double kTieEps = 1e-12;

struct Lattice {
  int n = 0, m = 0;
  std::vector<double> a;        // (n+1) x (m+1)
  std::vector<signed char> bp;  // chosen operator per cell, -1 if none

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * (m + 1) + j]; }
  double get(int i, int j) const { return a[static_cast<std::size_t>(i) * (m + 1) + j]; }
  signed char& bp_at(int i, int j) { return bp[static_cast<std::size_t>(i) * (m + 1) + j]; }
};

// Incoming transition into (i,j) via op; returns false when inadmissible.
bool incoming(OperatorKind op, int i, int j, const OperatorSet& ops, int& pi, int& pj) {
  if (!ops.enabled(op)) return false;
  if (j < 1) return false;
  if (consumes_target(op)) {
    if (i < 1) return false;
    if (ops.causal && i < j) return false;
  }
  const Displacement d = displacement(op);
  pi = i - d.di;
  pj = j - d.dj;
  return pi >= 0 && pj >= 0;
}

double step_factor(OperatorKind op, int i, int j, const TargetSeq& target,
                   const LogProbMatrix& logprobs, const Vocab& vocab) {
  const TokenId tok = consumes_target(op) ? target.at(i) : vocab.blank_id;
  return logprobs.at(j, tok);
}

Lattice fill_forward(const TargetSeq& target, const LogProbMatrix& logprobs,
                     const Vocab& vocab, const OperatorSet& ops, Aggregation agg) {
  Lattice lat;
  lat.n = target.length();
  lat.m = logprobs.rows;
  lat.a.assign(static_cast<std::size_t>(lat.n + 1) * (lat.m + 1), kNegInf);
  lat.bp.assign(lat.a.size(), -1);
  lat.at(0, 0) = 0.0;

  for (int i = 0; i <= lat.n; ++i) {
    for (int j = 0; j <= lat.m; ++j) {
      if (i == 0 && j == 0) continue;
      if (agg == Aggregation::Max) {
        double best = kNegInf;
        signed char best_op = -1;
        for (std::size_t r = 0; r < kTieBreakOrder.size(); ++r) {
          const OperatorKind op = kTieBreakOrder[r];
          int pi, pj;
          if (!incoming(op, i, j, ops, pi, pj)) continue;
          const double prev = lat.get(pi, pj);
          if (prev == kNegInf) continue;
          const double v = prev + step_factor(op, i, j, target, logprobs, vocab);
          // preference order wins unless a later operator beats it clearly
          if (v > best + kTieEps) {
            best = v;
            best_op = static_cast<signed char>(op);
          }
        }
        lat.at(i, j) = best;
        lat.bp_at(i, j) = best_op;
      } else {
        double acc = kNegInf;
        for (OperatorKind op : kAllOperators) {
          int pi, pj;
          if (!incoming(op, i, j, ops, pi, pj)) continue;
          const double prev = lat.get(pi, pj);
          if (prev == kNegInf) continue;
          acc = log_add(acc, prev + step_factor(op, i, j, target, logprobs, vocab));
        }
        lat.at(i, j) = acc;
      }
    }
  }
  return lat;
}

// Backward lattice for the Sum gradient: B(i,j) = log sum over suffix paths
// (i,j) -> (n,m) of the product of the remaining factors; B(n,m) = 0.
Lattice fill_backward(const TargetSeq& target, const LogProbMatrix& logprobs,
                      const Vocab& vocab, const OperatorSet& ops) {
  Lattice lat;
  lat.n = target.length();
  lat.m = logprobs.rows;
  lat.a.assign(static_cast<std::size_t>(lat.n + 1) * (lat.m + 1), kNegInf);
  lat.at(lat.n, lat.m) = 0.0;

  for (int i = lat.n; i >= 0; --i) {
    for (int j = lat.m; j >= 0; --j) {
      if (i == lat.n && j == lat.m) continue;
      double acc = kNegInf;
      for (OperatorKind op : kAllOperators) {
        const Displacement d = displacement(op);
        const int ni = i + d.di, nj = j + d.dj;
        if (ni > lat.n || nj > lat.m) continue;
        int pi, pj;
        if (!incoming(op, ni, nj, ops, pi, pj)) continue;
        const double nxt = lat.get(ni, nj);
        if (nxt == kNegInf) continue;
        acc = log_add(acc, nxt + step_factor(op, ni, nj, target, logprobs, vocab));
      }
      lat.at(i, j) = acc;
    }
  }
  return lat;
}

void check_dims(const TargetSeq& target, const LogProbMatrix& logprobs, const Vocab& vocab) {
  if (target.length() < 1) throw std::invalid_argument("empty target");
  if (logprobs.rows < 1) throw std::invalid_argument("empty prediction matrix");
  if (logprobs.vocab_size != vocab.size()) {
    throw std::invalid_argument("prediction matrix width does not match vocab");
  }
  for (TokenId id : target.ids) {
    if (id < 0 || id >= vocab.size()) throw std::invalid_argument("target id out of vocabulary");
  }
}

}  // namespace

DpResult latent_loss(const TargetSeq& target, const LogProbMatrix& logprobs,
                     const Vocab& vocab, const DpConfig& cfg) {
  check_dims(target, logprobs, vocab);
  const int n = target.length();
  const int m = logprobs.rows;

  Lattice lat = fill_forward(target, logprobs, vocab, cfg.ops, cfg.aggregation);
  const double total = lat.get(n, m);

  DpResult res;
  if (cfg.keep_table) {
    res.table = lat.a;
    res.table_cols = m + 1;
  }
  if (total == kNegInf) {
    res.no_valid_path = true;
    res.neg_log_loss = kPosInf;
    return res;
  }
  res.neg_log_loss = -total;
  if (cfg.normalize_by_target_len) res.neg_log_loss /= n;

  if (cfg.aggregation == Aggregation::Max) {
    AlignmentPath path;
    int ci = n, cj = m;
    while (ci != 0 || cj != 0) {
      const signed char raw = lat.bp_at(ci, cj);
      if (raw < 0) throw std::logic_error("backtrace hit a cell with no predecessor");
      const OperatorKind op = static_cast<OperatorKind>(raw);
      path.steps.push_back({op, ci, cj});
      const Displacement d = displacement(op);
      ci -= d.di;
      cj -= d.dj;
    }
    std::reverse(path.steps.begin(), path.steps.end());
    res.best_path = std::move(path);
  }
  return res;
}

GradResult sum_loss_grad(const TargetSeq& target, const LogProbMatrix& logprobs,
                         const Vocab& vocab, const DpConfig& cfg) {
  check_dims(target, logprobs, vocab);
  const int n = target.length();
  const int m = logprobs.rows;

  GradResult res;
  res.rows = m;
  res.vocab_size = vocab.size();
  res.grad.assign(static_cast<std::size_t>(m) * vocab.size(), 0.0);

  Lattice fwd = fill_forward(target, logprobs, vocab, cfg.ops, Aggregation::Sum);
  const double total = fwd.get(n, m);
  if (total == kNegInf) {
    res.no_valid_path = true;
    return res;
  }
  Lattice bwd = fill_backward(target, logprobs, vocab, cfg.ops);

  const double norm = cfg.normalize_by_target_len ? static_cast<double>(n) : 1.0;
  // posterior occupancy of each transition edge
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= m; ++j) {
      if (bwd.get(i, j) == kNegInf) continue;
      for (OperatorKind op : kAllOperators) {
        int pi, pj;
        if (!incoming(op, i, j, cfg.ops, pi, pj)) continue;
        const double f = fwd.get(pi, pj);
        if (f == kNegInf) continue;
        const double factor = step_factor(op, i, j, target, logprobs, vocab);
        const double log_mass = f + factor + bwd.get(i, j) - total;
        if (log_mass == kNegInf) continue;
        const TokenId tok = consumes_target(op) ? target.at(i) : vocab.blank_id;
        res.grad[static_cast<std::size_t>(j - 1) * vocab.size() + tok] -= std::exp(log_mass) / norm;
      }
    }
  }
  return res;
}

GradResult max_loss_grad(const TargetSeq& target, const LogProbMatrix& logprobs,
                         const Vocab& vocab, const DpConfig& cfg) {
  check_dims(target, logprobs, vocab);
  const int m = logprobs.rows;

  GradResult res;
  res.rows = m;
  res.vocab_size = vocab.size();
  res.grad.assign(static_cast<std::size_t>(m) * vocab.size(), 0.0);

  DpConfig max_cfg = cfg;
  max_cfg.aggregation = Aggregation::Max;
  max_cfg.keep_table = false;
  const DpResult dp = latent_loss(target, logprobs, vocab, max_cfg);
  if (dp.no_valid_path) {
    res.no_valid_path = true;
    return res;
  }

  const double norm = cfg.normalize_by_target_len ? static_cast<double>(target.length()) : 1.0;
  for (const auto& st : dp.best_path->steps) {
    const TokenId tok = consumes_target(st.op) ? target.at(st.i) : vocab.blank_id;
    res.grad[static_cast<std::size_t>(st.j - 1) * vocab.size() + tok] -= 1.0 / norm;
  }
  return res;
}

double cross_entropy(const TargetSeq& target, const LogProbMatrix& logprobs,
                     bool normalize_by_target_len) {
  const int n = target.length();
  if (logprobs.rows != n) {
    throw std::invalid_argument("cross entropy requires m == n");
  }
  double loss = 0.0;
  for (int i = 1; i <= n; ++i) {
    loss -= logprobs.at(i, target.at(i));
  }
  return normalize_by_target_len ? loss / n : loss;
}

}  // namespace latalign
