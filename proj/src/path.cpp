#include "latalign/path.hpp"

#include <algorithm>
#include <stdexcept>

namespace latalign {

const char* op_name(OperatorKind op) {
  switch (op) {
    case OperatorKind::Align: return "align";
    case OperatorKind::CloneTarget: return "clone_target";
    case OperatorKind::ClonePrediction: return "clone_prediction";
    case OperatorKind::Delimiter: return "delimiter";
  }
  return "?";
}

std::string OperatorSet::describe() const {
  std::string s = "{align";
  if (clone_target) s += ",clone_target";
  if (clone_prediction) s += ",clone_prediction";
  if (delimiter) s += ",delimiter";
  s += "}";
  if (causal) s += " causal";
  return s;
}

std::string AlignmentPath::trace() const {
  std::string s;
  for (const auto& st : steps) {
    if (!s.empty()) s += ' ';
    s += op_name(st.op);
  }
  return s;
}

PathCheck validate_path(const AlignmentPath& path, int n, int m, const OperatorSet& ops) {
  int ci = 0, cj = 0;
  for (std::size_t k = 0; k < path.steps.size(); ++k) {
    const PathStep& st = path.steps[k];
    const int idx = static_cast<int>(k);
    if (!ops.enabled(st.op)) {
      return {false, idx, std::string("operator not enabled: ") + op_name(st.op)};
    }
    const Displacement d = displacement(st.op);
    ci += d.di;
    cj += d.dj;
    if (st.i != ci || st.j != cj) {
      return {false, idx, "step cell does not chain from the previous cell"};
    }
    if (ci > n) return {false, idx, "target position exceeds n"};
    if (cj > m) return {false, idx, "prediction position exceeds m"};
    // every factor reads p_j, and target-consuming factors read y_i
    if (cj < 1) return {false, idx, "operator lands before the first prediction"};
    if (consumes_target(st.op) && ci < 1) {
      return {false, idx, "target-consuming operator lands before the first target"};
    }
    if (ops.causal && consumes_target(st.op) && ci < cj) {
      return {false, idx, "causal violation: prediction j aligns target i < j"};
    }
  }
  if (ci != n || cj != m) {
    return {false, -1, "path does not end at (n,m)"};
  }
  return {};
}

std::string Alignment::describe() const {
  bool all_single = true;
  for (const auto& s : alpha) {
    if (s.size() != 1) all_single = false;
  }
  std::string out;
  for (const auto& s : alpha) {
    if (!out.empty()) out += ' ';
    if (all_single) {
      out += std::to_string(s.front());
    } else {
      out += '{';
      for (std::size_t k = 0; k < s.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(s[k]);
      }
      out += '}';
    }
  }
  return out;
}

AlignmentResult path_to_alignment(const AlignmentPath& path) {
  AlignmentResult res;
  const int n = path.target_len();
  res.alignment.alpha.assign(static_cast<std::size_t>(n), {});

  int ci = 0, cj = 0;
  for (const auto& st : path.steps) {
    const Displacement d = displacement(st.op);
    ci += d.di;
    cj += d.dj;
    if (st.i != ci || st.j != cj) {
      res.error = "steps do not chain; validate the path first";
      return res;
    }
    if (consumes_target(st.op)) {
      if (ci < 1 || ci > n || cj < 1) {
        res.error = "step lands outside the lattice; validate the path first";
        return res;
      }
      res.alignment.alpha[static_cast<std::size_t>(ci - 1)].push_back(cj);
    } else {
      if (cj < 1) {
        res.error = "step lands outside the lattice; validate the path first";
        return res;
      }
      res.alignment.unaligned.push_back(cj);
    }
  }

  for (int i = 1; i <= n; ++i) {
    const auto& s = res.alignment.alpha[static_cast<std::size_t>(i - 1)];
    if (s.empty()) {
      res.error = "alpha(" + std::to_string(i) + ") is empty";
      return res;
    }
    for (std::size_t k = 1; k < s.size(); ++k) {
      if (s[k] != s[k - 1] + 1) {
        res.error = "alpha(" + std::to_string(i) + ") is not consecutive";
        return res;
      }
    }
    if (i > 1) {
      const auto& prev = res.alignment.alpha[static_cast<std::size_t>(i - 2)];
      if (prev.back() > s.front()) {
        res.error = "alignment is not monotonic at target " + std::to_string(i);
        return res;
      }
    }
  }
  res.valid = true;
  return res;
}

double path_log_likelihood(const TargetSeq& target, const LogProbMatrix& logprobs,
                           const Vocab& vocab, const AlignmentPath& path) {
  if (path.target_len() != target.length() || path.pred_len() != logprobs.rows) {
    throw std::invalid_argument("path dimensions do not match the instance");
  }
  double ll = 0.0;
  for (const auto& st : path.steps) {
    const TokenId tok = consumes_target(st.op) ? target.at(st.i) : vocab.blank_id;
    ll += logprobs.at(st.j, tok);
  }
  return ll;
}

}  // namespace latalign
