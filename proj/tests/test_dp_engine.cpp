#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "latalign/dp.hpp"
#include "latalign/oracle.hpp"
#include "support/figures.hpp"
#include "support/instances.hpp"
#include "support/paths.hpp"

using namespace latalign;
using namespace latalign::testing;

namespace {

Instance copy_model_instance(int n) {
  // p_1 certain on blank, p_i certain on y_{i-1}, p_n split between the
  // last two targets: the loss floor construction
  Instance inst;
  inst.vocab = make_vocab(n + 4);
  Rng rng(99);
  inst.target = random_target(n, inst.vocab, rng);
  inst.logprobs = LogProbMatrix::zeros(n, inst.vocab.size());
  for (auto& v : inst.logprobs.values) v = kNegInf;
  inst.logprobs.at(1, inst.vocab.blank_id) = 0.0;
  for (int i = 2; i < n; ++i) inst.logprobs.at(i, inst.target.at(i - 1)) = 0.0;
  inst.logprobs.at(n, inst.target.at(n - 1)) = std::log(0.5);
  inst.logprobs.at(n, inst.target.at(n)) = std::log(0.5);
  return inst;
}

}  // namespace

TEST_CASE("ctc with m == n equals per-token cross entropy") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 8));
    const Instance inst = random_instance(n, n, static_cast<int>(rng.uniform_int(3, 12)), rng);
    DpConfig cfg{OperatorSet::ctc(), Aggregation::Sum, true, false};
    const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);
    const double ce = cross_entropy(inst.target, inst.logprobs);
    CHECK(std::abs(res.neg_log_loss - ce) < 1e-12);
  }
}

TEST_CASE("listening instance: max backtrace recovers the shifted path") {
  const Instance inst = listening_instance();
  DpConfig cfg{OperatorSet::axe(), Aggregation::Max, true, false};
  const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);
  REQUIRE(res.best_path.has_value());
  CHECK(res.best_path->trace() == "delimiter align align align align align clone_prediction");
  CHECK(path_to_alignment(*res.best_path).alignment.describe() == "2 3 4 5 6 6");
}

TEST_CASE("weather instance: max backtrace recovers (1,2,4,5,5)") {
  const Instance inst = weather_instance();
  DpConfig cfg{OperatorSet::axe(), Aggregation::Max, true, false};
  const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);
  REQUIRE(res.best_path.has_value());
  CHECK(res.best_path->trace() == "align align delimiter align align clone_prediction");
  CHECK(path_to_alignment(*res.best_path).alignment.describe() == "1 2 4 5 5");
}

TEST_CASE("copy construction attains the -2 log(0.5) floor") {
  for (int n : {4, 6, 9}) {
    const Instance inst = copy_model_instance(n);
    DpConfig cfg{OperatorSet::axe(), Aggregation::Max, false, false};
    const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);
    CHECK(std::abs(res.neg_log_loss - 2.0 * std::log(2.0)) < 1e-9);

    DpConfig norm = cfg;
    norm.normalize_by_target_len = true;
    const DpResult nres = latent_loss(inst.target, inst.logprobs, inst.vocab, norm);
    CHECK(std::abs(nres.neg_log_loss - 2.0 * std::log(2.0) / n) < 1e-9);
    REQUIRE(nres.best_path.has_value());
    std::string expect = "delimiter";
    for (int i = 1; i < n; ++i) expect += " align";
    expect += " clone_prediction";
    CHECK(nres.best_path->trace() == expect);
  }
}

TEST_CASE("dp agrees with enumeration on small instances") {
  Rng rng(31);
  for (int n = 1; n <= 4; ++n) {
    for (int m = 1; m <= 4; ++m) {
      for (bool causal : {false, true}) {
        for (const OperatorSet ops : {OperatorSet::ctc(causal), OperatorSet::axe(causal)}) {
          for (int trial = 0; trial < 10; ++trial) {
            const Instance inst = random_instance(n, m, 5, rng);
            const EnumerationResult oracle = oracle_loss(inst.target, inst.logprobs, inst.vocab, ops);

            DpConfig sum_cfg{ops, Aggregation::Sum, false, false};
            const DpResult sum = latent_loss(inst.target, inst.logprobs, inst.vocab, sum_cfg);
            DpConfig max_cfg{ops, Aggregation::Max, false, false};
            const DpResult mx = latent_loss(inst.target, inst.logprobs, inst.vocab, max_cfg);

            if (oracle.paths.empty()) {
              CHECK(sum.no_valid_path);
              CHECK(mx.no_valid_path);
              continue;
            }
            CHECK(rel_err(-sum.neg_log_loss, oracle.sum_log) < 1e-9);
            CHECK(rel_err(-mx.neg_log_loss, oracle.max_log) < 1e-9);
            REQUIRE(mx.best_path.has_value());
            const double dp_ll =
                path_log_likelihood(inst.target, inst.logprobs, inst.vocab, *mx.best_path);
            const double oracle_ll =
                path_log_likelihood(inst.target, inst.logprobs, inst.vocab, oracle.argmax_path);
            CHECK(rel_err(dp_ll, oracle_ll) < 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("ctc with m < n has no valid path and reports a flagged infinity") {
  Rng rng(41);
  const Instance inst = random_instance(4, 3, 5, rng);
  DpConfig cfg{OperatorSet::ctc(), Aggregation::Sum, true, false};
  const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);
  CHECK(res.no_valid_path);
  CHECK(std::isinf(res.neg_log_loss));
  CHECK(res.neg_log_loss > 0);
}

TEST_CASE("property: sum dominates max; causal restriction never helps") {
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const int m = static_cast<int>(rng.uniform_int(1, 6));
    const Instance inst = random_instance(n, m, 6, rng);
    for (const OperatorSet ops : {OperatorSet::ctc(), OperatorSet::axe()}) {
      DpConfig sum_cfg{ops, Aggregation::Sum, true, false};
      DpConfig max_cfg{ops, Aggregation::Max, true, false};
      const DpResult sum = latent_loss(inst.target, inst.logprobs, inst.vocab, sum_cfg);
      const DpResult mx = latent_loss(inst.target, inst.logprobs, inst.vocab, max_cfg);
      if (sum.no_valid_path) {
        CHECK(mx.no_valid_path);
        continue;
      }
      CHECK(sum.neg_log_loss <= mx.neg_log_loss + 1e-9);

      OperatorSet causal = ops;
      causal.causal = true;
      DpConfig causal_cfg{causal, Aggregation::Max, true, false};
      const DpResult cres = latent_loss(inst.target, inst.logprobs, inst.vocab, causal_cfg);
      if (!cres.no_valid_path) {
        CHECK(cres.neg_log_loss >= mx.neg_log_loss - 1e-9);
      }
    }
  }
}

TEST_CASE("best path round-trips through path_log_likelihood") {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const int m = static_cast<int>(rng.uniform_int(1, 6));
    const Instance inst = random_instance(n, m, 6, rng);
    DpConfig cfg{OperatorSet::axe(), Aggregation::Max, true, false};
    const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);
    REQUIRE(res.best_path.has_value());
    CHECK(validate_path(*res.best_path, n, m, cfg.ops).ok());
    const double ll = path_log_likelihood(inst.target, inst.logprobs, inst.vocab, *res.best_path);
    CHECK(std::abs(ll + res.neg_log_loss * n) < 1e-9);
  }
}

TEST_CASE("diagnostic table has lattice shape and base cell") {
  Rng rng(71);
  const Instance inst = random_instance(3, 4, 5, rng);
  DpConfig cfg{OperatorSet::axe(), Aggregation::Sum, true, true};
  const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);
  REQUIRE(res.table.has_value());
  CHECK(res.table->size() == 4u * 5u);
  CHECK(res.table_cols == 5);
  CHECK((*res.table)[0] == 0.0);               // A(0,0)
  CHECK((*res.table)[5] == kNegInf);           // A(1,0) unreachable
}
