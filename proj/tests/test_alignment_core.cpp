#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latalign/oracle.hpp"
#include "latalign/path.hpp"
#include "latalign/types.hpp"
#include "support/figures.hpp"
#include "support/instances.hpp"
#include "support/paths.hpp"

using namespace latalign;
using namespace latalign::testing;

using OK = OperatorKind;

TEST_CASE("vocab invariants") {
  Vocab v = make_vocab(5);
  CHECK_NOTHROW(v.check());

  Vocab dup = v;
  dup.tokens[3] = dup.tokens[2];
  CHECK_THROWS(dup.check());

  Vocab same = v;
  same.eos_id = same.blank_id;
  CHECK_THROWS(same.check());

  Vocab bad = v;
  bad.blank_id = 99;
  CHECK_THROWS(bad.check());
}

TEST_CASE("target invariants") {
  Vocab v = make_vocab(5);
  TargetSeq t;
  CHECK_THROWS(t.check(v));  // empty

  t.ids = {2, 3, 1};
  CHECK_NOTHROW(t.check(v));

  t.ids = {2, v.blank_id};
  CHECK_THROWS(t.check(v));

  t.ids = {2, 17};
  CHECK_THROWS(t.check(v));
}

TEST_CASE("log-prob rows must be normalized") {
  Vocab v = make_vocab(4);
  Rng rng(1);
  LogProbMatrix good = random_logprobs(3, 4, rng);
  CHECK_NOTHROW(good.check(v));

  LogProbMatrix bad = good;
  bad.at(2, 1) += 0.5;
  CHECK_THROWS(bad.check(v));

  LogProbMatrix above = good;
  above.at(1, 0) = 0.1;
  CHECK_THROWS(above.check(v));
}

TEST_CASE("validate_path: diagonal under CTC") {
  const auto path = path_from_ops({OK::Align, OK::Align, OK::Align});
  CHECK(validate_path(path, 3, 3, OperatorSet::ctc()).ok());
}

TEST_CASE("validate_path: weather example path under AXE") {
  const auto path = path_from_ops(
      {OK::Align, OK::Align, OK::Delimiter, OK::Align, OK::Align, OK::ClonePrediction});
  CHECK(validate_path(path, 5, 5, OperatorSet::axe()).ok());
  // clone operators are preset-specific
  CHECK_FALSE(validate_path(path, 5, 5, OperatorSet::ctc()).ok());
}

TEST_CASE("validate_path: causal restriction rejects forward-shifted aligns") {
  const auto path =
      path_from_ops({OK::Delimiter, OK::Align, OK::Align, OK::ClonePrediction});
  CHECK(validate_path(path, 3, 3, OperatorSet::axe(false)).ok());
  const PathCheck chk = validate_path(path, 3, 3, OperatorSet::axe(true));
  CHECK_FALSE(chk.ok());
  CHECK(chk.step_index == 1);  // Align landing in (1,2) has i < j
  // delimiter steps are exempt: they consume no target
  const auto diag = path_from_ops({OK::Align, OK::Align, OK::Align});
  CHECK(validate_path(diag, 3, 3, OperatorSet::axe(true)).ok());
}

TEST_CASE("validate_path: chain and bounds violations") {
  AlignmentPath broken = path_from_ops({OK::Align, OK::Align});
  broken.steps[1].j = 3;
  const PathCheck chk = validate_path(broken, 2, 2, OperatorSet::ctc());
  CHECK_FALSE(chk.ok());
  CHECK(chk.step_index == 1);

  // does not reach (n,m)
  const auto shortpath = path_from_ops({OK::Align});
  CHECK_FALSE(validate_path(shortpath, 2, 2, OperatorSet::ctc()).ok());

  // first step cannot consume a target before the first prediction
  const auto cp_first = path_from_ops({OK::ClonePrediction, OK::Align});
  CHECK_FALSE(validate_path(cp_first, 2, 1, OperatorSet::axe()).ok());
}

TEST_CASE("path_to_alignment: identity") {
  const auto path = path_from_ops({OK::Align, OK::Align});
  const AlignmentResult res = path_to_alignment(path);
  REQUIRE(res.valid);
  CHECK(res.alignment.alpha == std::vector<std::vector<int>>{{1}, {2}});
  CHECK(res.alignment.unaligned.empty());
}

TEST_CASE("path_to_alignment: weather path lands on (1,2,4,5,5)") {
  const auto path = path_from_ops(
      {OK::Align, OK::Align, OK::Delimiter, OK::Align, OK::Align, OK::ClonePrediction});
  const AlignmentResult res = path_to_alignment(path);
  REQUIRE(res.valid);
  CHECK(res.alignment.alpha == std::vector<std::vector<int>>{{1}, {2}, {4}, {5}, {5}});
  CHECK(res.alignment.unaligned == std::vector<int>{3});
  CHECK(res.alignment.describe() == "1 2 4 5 5");
}

TEST_CASE("path_to_alignment: shifted constant alignment (2,3,4,5,6,6)") {
  const auto path = path_from_ops({OK::Delimiter, OK::Align, OK::Align, OK::Align, OK::Align,
                                   OK::Align, OK::ClonePrediction});
  const AlignmentResult res = path_to_alignment(path);
  REQUIRE(res.valid);
  CHECK(res.alignment.describe() == "2 3 4 5 6 6");
  CHECK(res.alignment.unaligned == std::vector<int>{1});
}

TEST_CASE("path_to_alignment rejects a delimiter splitting a clone-target run") {
  const auto path = path_from_ops({OK::Align, OK::Delimiter, OK::CloneTarget});
  CHECK(validate_path(path, 1, 3, OperatorSet::ctc()).ok());
  const AlignmentResult res = path_to_alignment(path);
  CHECK_FALSE(res.valid);
  CHECK(res.error.find("consecutive") != std::string::npos);
}

TEST_CASE("path_log_likelihood: certain prediction scores zero") {
  Instance inst;
  inst.vocab = make_vocab(3);
  inst.target.ids = {2};
  inst.logprobs = LogProbMatrix::zeros(1, 3);
  inst.logprobs.at(1, 0) = kNegInf;
  inst.logprobs.at(1, 1) = kNegInf;
  inst.logprobs.at(1, 2) = 0.0;
  const auto path = path_from_ops({OK::Align});
  CHECK(path_log_likelihood(inst.target, inst.logprobs, inst.vocab, path) == 0.0);
}

TEST_CASE("path_log_likelihood: listening instance reproduces the quoted factors") {
  const Instance inst = listening_instance();
  const auto path = path_from_ops({OK::Delimiter, OK::Align, OK::Align, OK::Align, OK::Align,
                                   OK::Align, OK::ClonePrediction});
  REQUIRE(validate_path(path, 6, 6, OperatorSet::axe()).ok());
  const double expected = std::log(0.999) + std::log(0.995) + std::log(0.999) +
                          std::log(0.999) + std::log(0.994) + std::log(0.627) +
                          std::log(0.370);
  CHECK(path_log_likelihood(inst.target, inst.logprobs, inst.vocab, path) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("path_log_likelihood agrees with the linear-space evaluator") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = random_instance(3, 4, 6, rng);
    const OperatorSet ops = (trial % 2 == 0) ? OperatorSet::ctc() : OperatorSet::axe();
    const AlignmentPath path = sample_valid_path(3, 4, ops, rng);
    const double ll = path_log_likelihood(inst.target, inst.logprobs, inst.vocab, path);
    const double lin = oracle_path_likelihood(inst.target, inst.logprobs, inst.vocab, path);
    CHECK(rel_err(std::exp(ll), lin) < 1e-12);
  }
}

TEST_CASE("property: converted paths are monotonic and well-covered") {
  Rng rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const bool use_axe = rng.uniform() < 0.5;
    const int m = use_axe ? static_cast<int>(rng.uniform_int(1, 6))
                          : static_cast<int>(rng.uniform_int(n, 7));
    const OperatorSet ops = use_axe ? OperatorSet::axe() : OperatorSet::ctc();
    const AlignmentPath path = sample_valid_path(n, m, ops, rng);
    REQUIRE(validate_path(path, n, m, ops).ok());
    const AlignmentResult res = path_to_alignment(path);
    if (!res.valid) continue;  // delimiter-split clone runs have no alignment
    const Alignment& a = res.alignment;
    for (int i = 1; i < a.target_len(); ++i) {
      CHECK(a.alpha[static_cast<std::size_t>(i - 1)].back() <=
            a.alpha[static_cast<std::size_t>(i)].front());
    }
    // every prediction position is aligned or unaligned
    std::vector<int> covered(static_cast<std::size_t>(m) + 1, 0);
    for (const auto& js : a.alpha) {
      for (int j : js) covered[static_cast<std::size_t>(j)] = 1;
    }
    for (int j : a.unaligned) covered[static_cast<std::size_t>(j)] = 1;
    for (int j = 1; j <= m; ++j) CHECK(covered[static_cast<std::size_t>(j)] == 1);
  }
}

TEST_CASE("property: preset alignment shapes") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 5));

    // CTC: prediction positions are aligned to at most one target
    const int m = static_cast<int>(rng.uniform_int(n, 7));
    const AlignmentPath cp = sample_valid_path(n, m, OperatorSet::ctc(), rng);
    const AlignmentResult cres = path_to_alignment(cp);
    if (cres.valid) {
      std::vector<int> uses(static_cast<std::size_t>(m) + 1, 0);
      for (const auto& js : cres.alignment.alpha) {
        for (int j : js) uses[static_cast<std::size_t>(j)]++;
      }
      for (int j = 1; j <= m; ++j) CHECK(uses[static_cast<std::size_t>(j)] <= 1);
    }

    // AXE: every target position aligns to exactly one prediction
    const int m2 = static_cast<int>(rng.uniform_int(1, 7));
    const AlignmentPath ap = sample_valid_path(n, m2, OperatorSet::axe(), rng);
    const AlignmentResult ares = path_to_alignment(ap);
    REQUIRE(ares.valid);  // AXE has no clone-target runs to split
    for (const auto& js : ares.alignment.alpha) CHECK(js.size() == 1);
  }
}

TEST_CASE("property: alignment round-trips to the original operator multiset") {
  Rng rng(13);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 5));
    const bool use_axe = rng.uniform() < 0.5;
    const int m = use_axe ? static_cast<int>(rng.uniform_int(1, 6))
                          : static_cast<int>(rng.uniform_int(n, 7));
    const OperatorSet ops = use_axe ? OperatorSet::axe() : OperatorSet::ctc();
    const AlignmentPath path = sample_valid_path(n, m, ops, rng);
    const AlignmentResult res = path_to_alignment(path);
    if (!res.valid || has_aligned_unaligned_overlap(res.alignment)) continue;
    CHECK(step_multiset(steps_from_alignment(res.alignment)) == step_multiset(path.steps));
    ++checked;
  }
  CHECK(checked > 100);
}
