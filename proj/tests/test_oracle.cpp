#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "latalign/oracle.hpp"
#include "support/figures.hpp"
#include "support/instances.hpp"
#include "support/paths.hpp"

using namespace latalign;
using namespace latalign::testing;

using OK = OperatorKind;

namespace {

std::set<std::string> trace_set(const std::vector<AlignmentPath>& paths) {
  std::set<std::string> out;
  for (const auto& p : paths) out.insert(p.trace());
  return out;
}

}  // namespace

TEST_CASE("ctc with m == n admits exactly the diagonal") {
  const auto p1 = enumerate_paths(1, 1, OperatorSet::ctc());
  REQUIRE(p1.size() == 1);
  CHECK(p1[0].trace() == "align");

  const auto p3 = enumerate_paths(3, 3, OperatorSet::ctc());
  REQUIRE(p3.size() == 1);
  CHECK(p3[0].trace() == "align align align");
}

TEST_CASE("axe 2x2 path count regression") {
  // verified against the displacement-recurrence counter on first run
  const auto paths = enumerate_paths(2, 2, OperatorSet::axe());
  CHECK(paths.size() == 8);
  CHECK(count_paths(2, 2, OperatorSet::axe()) == 8);
}

TEST_CASE("enumerator agrees with the independent counter") {
  for (int n = 1; n <= 4; ++n) {
    for (int m = 1; m <= 4; ++m) {
      for (bool causal : {false, true}) {
        for (const OperatorSet base : {OperatorSet::ctc(causal), OperatorSet::axe(causal)}) {
          const auto paths = enumerate_paths(n, m, base);
          CHECK(paths.size() == count_paths(n, m, base));
          for (const auto& p : paths) CHECK(validate_path(p, n, m, base).ok());
        }
      }
    }
  }
}

TEST_CASE("causal paths are a subset of unrestricted paths") {
  for (int n = 1; n <= 4; ++n) {
    for (int m = 1; m <= 4; ++m) {
      const auto all = trace_set(enumerate_paths(n, m, OperatorSet::axe(false)));
      const auto causal = trace_set(enumerate_paths(n, m, OperatorSet::axe(true)));
      for (const auto& t : causal) CHECK(all.count(t) == 1);
      CHECK(causal.size() <= all.size());
    }
  }
}

TEST_CASE("size guard") {
  CHECK_THROWS(enumerate_paths(9, 9, OperatorSet::axe()));
  CHECK_THROWS(count_paths(13, 5, OperatorSet::ctc()));
}

TEST_CASE("oracle_loss: certainty instance") {
  Instance inst;
  inst.vocab = make_vocab(3);
  inst.target.ids = {2};
  inst.logprobs = LogProbMatrix::zeros(1, 3);
  inst.logprobs.at(1, 0) = kNegInf;
  inst.logprobs.at(1, 1) = kNegInf;
  const auto res = oracle_loss(inst.target, inst.logprobs, inst.vocab, OperatorSet::ctc());
  CHECK(res.sum_log == 0.0);
  CHECK(res.max_log == 0.0);
  CHECK(res.argmax_path.trace() == "align");
}

TEST_CASE("oracle_loss: ctc m == n reduces to the diagonal factors") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 5));
    const Instance inst = random_instance(n, n, 6, rng);
    const auto res = oracle_loss(inst.target, inst.logprobs, inst.vocab, OperatorSet::ctc());
    double diag = 0.0;
    for (int i = 1; i <= n; ++i) diag += inst.logprobs.at(i, inst.target.at(i));
    CHECK(rel_err(res.sum_log, diag) < 1e-12);
    CHECK(res.sum_log == res.max_log);
  }
}

TEST_CASE("oracle_loss: listening instance argmax is the shifted constant path") {
  const Instance inst = listening_instance();
  const auto res = oracle_loss(inst.target, inst.logprobs, inst.vocab, OperatorSet::axe());
  CHECK(res.argmax_path.trace() ==
        "delimiter align align align align align clone_prediction");
  const AlignmentResult conv = path_to_alignment(res.argmax_path);
  REQUIRE(conv.valid);
  CHECK(conv.alignment.describe() == "2 3 4 5 6 6");
}

TEST_CASE("uniform sampler produces valid, reasonably spread paths") {
  Rng rng(5);
  std::set<std::string> seen;
  for (int trial = 0; trial < 200; ++trial) {
    const AlignmentPath p = sample_valid_path(2, 2, OperatorSet::axe(), rng);
    CHECK(validate_path(p, 2, 2, OperatorSet::axe()).ok());
    seen.insert(p.trace());
  }
  CHECK(seen.size() == 8);  // all axe 2x2 paths show up
}
