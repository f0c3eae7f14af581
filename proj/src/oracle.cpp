#include "latalign/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "latalign/numeric.hpp"

namespace latalign {

namespace {

void check_guard(int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("enumeration requires n >= 1 and m >= 1");
  if (n * m > kOracleCellLimit) {
    throw std::invalid_argument("enumeration size guard exceeded: n*m = " + std::to_string(n * m));
  }
}

// A step landing in (i,j) is admissible when it stays inside the lattice,
// reads an existing prediction row, and respects the causal restriction.
bool step_ok(OperatorKind op, int i, int j, int n, int m, const OperatorSet& ops) {
  if (!ops.enabled(op)) return false;
  if (i > n || j > m) return false;
  if (j < 1) return false;
  if (consumes_target(op)) {
    if (i < 1) return false;
    if (ops.causal && i < j) return false;
  }
  return true;
}

void enumerate_rec(int ci, int cj, int n, int m, const OperatorSet& ops,
                   AlignmentPath& cur, std::vector<AlignmentPath>& out) {
  if (ci == n && cj == m) {
    out.push_back(cur);
    return;
  }
  for (OperatorKind op : kAllOperators) {
    const Displacement d = displacement(op);
    const int ni = ci + d.di, nj = cj + d.dj;
    if (!step_ok(op, ni, nj, n, m, ops)) continue;
    cur.steps.push_back({op, ni, nj});
    enumerate_rec(ni, nj, n, m, ops, cur, out);
    cur.steps.pop_back();
  }
}

int pref_rank(OperatorKind op) {
  for (std::size_t r = 0; r < kTieBreakOrder.size(); ++r) {
    if (kTieBreakOrder[r] == op) return static_cast<int>(r);
  }
  return 4;
}

// Tie-break comparison from the path tail, matching the direction the DP
// backtrace resolves ties in. True when a beats b.
bool preferred_over(const AlignmentPath& a, const AlignmentPath& b) {
  auto ia = a.steps.rbegin();
  auto ib = b.steps.rbegin();
  for (; ia != a.steps.rend() && ib != b.steps.rend(); ++ia, ++ib) {
    const int ra = pref_rank(ia->op), rb = pref_rank(ib->op);
    if (ra != rb) return ra < rb;
  }
  return a.steps.size() < b.steps.size();
}

}  // namespace

std::vector<AlignmentPath> enumerate_paths(int n, int m, const OperatorSet& ops) {
  check_guard(n, m);
  std::vector<AlignmentPath> out;
  AlignmentPath cur;
  enumerate_rec(0, 0, n, m, ops, cur, out);
  return out;
}

std::uint64_t count_paths(int n, int m, const OperatorSet& ops) {
  check_guard(n, m);
  // counts[i][j] = number of valid prefixes from (0,0) into (i,j)
  std::vector<std::vector<std::uint64_t>> counts(static_cast<std::size_t>(n) + 1,
                                                 std::vector<std::uint64_t>(static_cast<std::size_t>(m) + 1, 0));
  counts[0][0] = 1;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      std::uint64_t c = 0;
      for (OperatorKind op : kAllOperators) {
        if (!step_ok(op, i, j, n, m, ops)) continue;
        const Displacement d = displacement(op);
        const int pi = i - d.di, pj = j - d.dj;
        if (pi < 0 || pj < 0) continue;
        c += counts[static_cast<std::size_t>(pi)][static_cast<std::size_t>(pj)];
      }
      counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
    }
  }
  return counts[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
}

AlignmentPath sample_valid_path(int n, int m, const OperatorSet& ops, Rng& rng) {
  check_guard(n, m);
  // suffix counts: paths from (i,j) to (n,m)
  std::vector<std::vector<std::uint64_t>> suffix(static_cast<std::size_t>(n) + 1,
                                                 std::vector<std::uint64_t>(static_cast<std::size_t>(m) + 1, 0));
  suffix[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] = 1;
  for (int i = n; i >= 0; --i) {
    for (int j = m; j >= 0; --j) {
      if (i == n && j == m) continue;
      std::uint64_t c = 0;
      for (OperatorKind op : kAllOperators) {
        const Displacement d = displacement(op);
        const int ni = i + d.di, nj = j + d.dj;
        if (ni > n || nj > m) continue;
        if (!step_ok(op, ni, nj, n, m, ops)) continue;
        c += suffix[static_cast<std::size_t>(ni)][static_cast<std::size_t>(nj)];
      }
      suffix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
    }
  }
  if (suffix[0][0] == 0) throw std::invalid_argument("no valid path to sample");

  AlignmentPath path;
  int ci = 0, cj = 0;
  while (ci != n || cj != m) {
    const std::uint64_t total = suffix[static_cast<std::size_t>(ci)][static_cast<std::size_t>(cj)];
    std::uint64_t pick = rng.next_u64() % total;
    for (OperatorKind op : kAllOperators) {
      const Displacement d = displacement(op);
      const int ni = ci + d.di, nj = cj + d.dj;
      if (ni > n || nj > m) continue;
      if (!step_ok(op, ni, nj, n, m, ops)) continue;
      const std::uint64_t c = suffix[static_cast<std::size_t>(ni)][static_cast<std::size_t>(nj)];
      if (pick < c) {
        path.steps.push_back({op, ni, nj});
        ci = ni;
        cj = nj;
        break;
      }
      pick -= c;
    }
  }
  return path;
}

EnumerationResult oracle_loss(const TargetSeq& target, const LogProbMatrix& logprobs,
                              const Vocab& vocab, const OperatorSet& ops) {
  const int n = target.length();
  const int m = logprobs.rows;
  EnumerationResult res;
  res.paths = enumerate_paths(n, m, ops);

  std::vector<double> lls;
  lls.reserve(res.paths.size());
  res.max_log = kNegInf;
  for (const auto& p : res.paths) {
    const double ll = path_log_likelihood(target, logprobs, vocab, p);
    lls.push_back(ll);
    res.max_log = std::max(res.max_log, ll);
  }
  res.sum_log = log_sum_exp(lls);

  // among near-maximal paths, pick by operator preference
  int best = -1;
  for (std::size_t k = 0; k < res.paths.size(); ++k) {
    if (lls[k] < res.max_log - 1e-12) continue;
    if (best < 0 || preferred_over(res.paths[k], res.paths[static_cast<std::size_t>(best)])) {
      best = static_cast<int>(k);
    }
  }
  if (best >= 0) res.argmax_path = res.paths[static_cast<std::size_t>(best)];
  return res;
}

double oracle_path_likelihood(const TargetSeq& target, const LogProbMatrix& logprobs,
                              const Vocab& vocab, const AlignmentPath& path) {
  double prod = 1.0;
  for (const auto& st : path.steps) {
    const TokenId tok = consumes_target(st.op) ? target.at(st.i) : vocab.blank_id;
    prod *= std::exp(logprobs.at(st.j, tok));
  }
  return prod;
}

}  // namespace latalign
