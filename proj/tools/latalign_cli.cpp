// latalign: latent alignment losses (sum/max aggregation over monotonic
// alignment operators), a brute-force oracle, and a toy teacher-forced
// seq2seq harness that demonstrates how these objectives collapse into
// copy solutions under teacher forcing.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latalign/dp.hpp"
#include "latalign/instance_json.hpp"
#include "latalign/numeric.hpp"
#include "latalign/oracle.hpp"
#include "latalign/toy/config.hpp"
#include "latalign/version.hpp"

using namespace latalign;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitAcceptance = 3;
constexpr int kExitNumeric = 4;

struct GlobalOpts {
  std::string out_dir = "runs";
  std::string format = "pretty";
  std::uint64_t seed = 12345;
};

void write_manifest(const GlobalOpts& g, const std::string& command, const json& resolved) {
  std::filesystem::create_directories(g.out_dir);
  json j;
  j["tool"] = "latalign";
  j["version"] = kVersion;
  j["command"] = command;
  j["options"] = resolved;
  std::ofstream out(g.out_dir + "/manifest.json");
  out << j.dump(2) << "\n";
}

std::string render_columns(const std::vector<std::vector<std::string>>& rows) {
  std::size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  std::vector<std::size_t> width(cols, 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::string cell = r[c];
      if (c + 1 < r.size()) cell.resize(width[c] + 2, ' ');
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

std::string format_loss(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string target_tokens(const Instance& inst) {
  std::string s;
  for (TokenId id : inst.target.ids) {
    if (!s.empty()) s += ' ';
    s += inst.vocab.tokens[static_cast<std::size_t>(id)];
  }
  return s;
}

// ---------------------------------------------------------------- loss ----

struct LossArgs {
  std::string instance_path;
  std::string objective = "axe";
  std::string aggregation;  // empty -> preset default
  bool causal = false;
  bool no_normalize = false;
};

int run_loss(const GlobalOpts& g, const LossArgs& a) {
  const Instance inst = load_instance_file(a.instance_path);
  write_manifest(g, "loss",
                 {{"instance", a.instance_path},
                  {"objective", a.objective},
                  {"aggregation", a.aggregation.empty() ? std::string("default") : a.aggregation},
                  {"causal", a.causal},
                  {"normalize", !a.no_normalize}});

  if (a.objective == "ce") {
    if (inst.logprobs.rows != inst.target.length()) {
      throw std::runtime_error("cross entropy requires m == n");
    }
    const double ce = cross_entropy(inst.target, inst.logprobs, !a.no_normalize);
    if (g.format == "json") {
      json j{{"objective", "ce"}, {"neg_log_loss", ce}};
      std::cout << j.dump() << "\n";
    } else if (g.format == "csv") {
      std::cout << "objective,neg_log_loss\nce," << format_loss(ce) << "\n";
    } else {
      std::cout << "objective    : ce\nneg_log_loss : " << format_loss(ce) << "\n";
    }
    return 0;
  }

  DpConfig cfg;
  if (a.objective == "ctc") {
    cfg.ops = OperatorSet::ctc(a.causal);
    cfg.aggregation = Aggregation::Sum;
  } else if (a.objective == "axe") {
    cfg.ops = OperatorSet::axe(a.causal);
    cfg.aggregation = Aggregation::Max;
  } else {
    throw std::runtime_error("unknown objective: " + a.objective);
  }
  if (a.aggregation == "sum") cfg.aggregation = Aggregation::Sum;
  if (a.aggregation == "max") cfg.aggregation = Aggregation::Max;
  cfg.normalize_by_target_len = !a.no_normalize;

  const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);

  std::string trace, alignment;
  if (res.best_path) {
    trace = res.best_path->trace();
    const AlignmentResult conv = path_to_alignment(*res.best_path);
    if (conv.valid) alignment = conv.alignment.describe();
  }
  if (g.format == "json") {
    json j{{"objective", a.objective},
           {"aggregation", cfg.aggregation == Aggregation::Sum ? "sum" : "max"},
           {"causal", a.causal},
           {"normalized", cfg.normalize_by_target_len},
           {"no_valid_path", res.no_valid_path},
           {"neg_log_loss", res.neg_log_loss}};
    if (res.best_path) {
      j["path"] = trace;
      j["alignment"] = alignment;
    }
    std::cout << j.dump() << "\n";
  } else if (g.format == "csv") {
    std::cout << "objective,aggregation,no_valid_path,neg_log_loss,path,alignment\n"
              << a.objective << ',' << (cfg.aggregation == Aggregation::Sum ? "sum" : "max") << ','
              << (res.no_valid_path ? 1 : 0) << ',' << format_loss(res.neg_log_loss) << ",\""
              << trace << "\",\"" << alignment << "\"\n";
  } else {
    std::cout << "objective    : " << a.objective
              << " (" << (cfg.aggregation == Aggregation::Sum ? "sum" : "max")
              << (a.causal ? ", causal" : "") << ")\n";
    if (res.no_valid_path) {
      std::cout << "neg_log_loss : +inf (no valid alignment path)\n";
    } else {
      std::cout << "neg_log_loss : " << format_loss(res.neg_log_loss)
                << (cfg.normalize_by_target_len ? " (per target token)" : "") << "\n";
      if (res.best_path) {
        std::cout << "path         : " << trace << "\n";
        std::cout << "alignment    : " << alignment << "\n";
      }
    }
  }
  return 0;
}

// --------------------------------------------------------------- align ----

struct AlignArgs {
  std::string instance_path;
  std::string objective = "axe";
  bool causal = false;
  int topk = 4;
};

int run_align(const GlobalOpts& g, const AlignArgs& a) {
  const Instance inst = load_instance_file(a.instance_path);
  write_manifest(g, "align",
                 {{"instance", a.instance_path},
                  {"objective", a.objective},
                  {"causal", a.causal},
                  {"topk", a.topk}});

  DpConfig cfg;
  if (a.objective == "axe") {
    cfg.ops = OperatorSet::axe(a.causal);
  } else if (a.objective == "ctc") {
    cfg.ops = OperatorSet::ctc(a.causal);
  } else {
    throw std::runtime_error("align supports objectives axe and ctc");
  }
  cfg.aggregation = Aggregation::Max;
  const DpResult res = latent_loss(inst.target, inst.logprobs, inst.vocab, cfg);
  if (res.no_valid_path) {
    std::cout << "no valid alignment path\n";
    return 0;
  }

  const int m = inst.logprobs.rows;
  // tokens the best path consumes at each prediction position
  std::vector<std::set<TokenId>> chosen(static_cast<std::size_t>(m) + 1);
  for (const auto& st : res.best_path->steps) {
    const TokenId tok = consumes_target(st.op) ? inst.target.at(st.i) : inst.vocab.blank_id;
    chosen[static_cast<std::size_t>(st.j)].insert(tok);
  }

  const AlignmentResult conv = path_to_alignment(*res.best_path);
  if (g.format == "json") {
    json positions = json::array();
    for (int j = 1; j <= m; ++j) {
      std::vector<std::pair<double, TokenId>> ranked;
      for (TokenId v = 0; v < inst.vocab.size(); ++v) ranked.push_back({inst.logprobs.at(j, v), v});
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& x, const auto& y) { return x.first > y.first; });
      json top = json::array();
      for (int k = 0; k < a.topk && k < static_cast<int>(ranked.size()); ++k) {
        top.push_back({{"token", inst.vocab.tokens[static_cast<std::size_t>(ranked[k].second)]},
                       {"prob", std::exp(ranked[k].first)},
                       {"chosen", chosen[static_cast<std::size_t>(j)].count(ranked[k].second) > 0}});
      }
      positions.push_back({{"pos", j}, {"top", top}});
    }
    json j{{"neg_log_loss", res.neg_log_loss},
           {"path", res.best_path->trace()},
           {"alignment", conv.valid ? conv.alignment.describe() : ""},
           {"positions", positions}};
    std::cout << j.dump() << "\n";
    return 0;
  }

  std::cout << "objective    : " << a.objective << " (max" << (a.causal ? ", causal" : "") << ")\n"
            << "neg_log_loss : " << format_loss(res.neg_log_loss) << " (per target token)\n"
            << "path         : " << res.best_path->trace() << "\n"
            << "alignment    : " << (conv.valid ? conv.alignment.describe() : "-") << "\n"
            << "target       : " << target_tokens(inst) << "\n\n";

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"pos", "top-" + std::to_string(a.topk) + " predictions (chosen marked *)"});
  for (int j = 1; j <= m; ++j) {
    std::vector<std::pair<double, TokenId>> ranked;
    for (TokenId v = 0; v < inst.vocab.size(); ++v) ranked.push_back({inst.logprobs.at(j, v), v});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    std::vector<std::string> row{std::to_string(j)};
    std::set<TokenId> shown;
    for (int k = 0; k < a.topk && k < static_cast<int>(ranked.size()); ++k) {
      const TokenId v = ranked[k].second;
      shown.insert(v);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3f", std::exp(ranked[k].first));
      row.push_back((chosen[static_cast<std::size_t>(j)].count(v) ? "*" : "") +
                    inst.vocab.tokens[static_cast<std::size_t>(v)] + " " + buf);
    }
    // a chosen token outside the top-k still gets a cell
    for (TokenId v : chosen[static_cast<std::size_t>(j)]) {
      if (shown.count(v)) continue;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3f", std::exp(inst.logprobs.at(j, v)));
      row.push_back("*" + inst.vocab.tokens[static_cast<std::size_t>(v)] + " " + buf);
    }
    rows.push_back(std::move(row));
  }
  std::cout << render_columns(rows);
  return 0;
}

// ------------------------------------------------------- oracle-check ----

struct OracleArgs {
  int max_n = 5;
  int max_m = 5;
  int trials = 100;
  int vocab_size = 5;
};

int run_oracle_check(const GlobalOpts& g, const OracleArgs& a) {
  if (a.max_n * a.max_m > kOracleCellLimit) {
    throw std::runtime_error("oracle-check size guard: max-n * max-m must be <= 64");
  }
  write_manifest(g, "oracle-check",
                 {{"max_n", a.max_n}, {"max_m", a.max_m}, {"trials", a.trials}, {"seed", g.seed}});

  Rng rng(g.seed);
  double max_dev = 0.0;
  long checked = 0;
  bool ok = true;

  for (int n = 1; n <= a.max_n && ok; ++n) {
    for (int m = 1; m <= a.max_m && ok; ++m) {
      for (bool causal : {false, true}) {
        for (bool use_axe : {false, true}) {
          const OperatorSet ops = use_axe ? OperatorSet::axe(causal) : OperatorSet::ctc(causal);
          // feasible-set inclusion: causal paths are a subset
          if (causal) {
            std::set<std::string> full;
            for (const auto& p :
                 enumerate_paths(n, m, use_axe ? OperatorSet::axe(false) : OperatorSet::ctc(false))) {
              full.insert(p.trace());
            }
            for (const auto& p : enumerate_paths(n, m, ops)) {
              if (!full.count(p.trace())) {
                std::cout << "FAIL: causal path not in unrestricted set at n=" << n << " m=" << m << "\n";
                ok = false;
              }
            }
          }
          for (int t = 0; t < a.trials; ++t) {
            Instance inst;
            inst.vocab.tokens = {"<eps>", "<eos>"};
            for (int k = 2; k < a.vocab_size; ++k) inst.vocab.tokens.push_back("t" + std::to_string(k));
            inst.vocab.blank_id = 0;
            inst.vocab.eos_id = 1;
            inst.target.ids.clear();
            for (int i = 0; i < n; ++i) {
              TokenId id;
              do {
                id = static_cast<TokenId>(rng.uniform_int(0, a.vocab_size - 1));
              } while (id == 0);
              inst.target.ids.push_back(id);
            }
            inst.logprobs = LogProbMatrix::zeros(m, a.vocab_size);
            for (int j = 1; j <= m; ++j) {
              std::vector<double> logits(static_cast<std::size_t>(a.vocab_size));
              for (auto& x : logits) x = 1.5 * rng.normal();
              const double lse = log_sum_exp(logits);
              for (TokenId v = 0; v < a.vocab_size; ++v) {
                inst.logprobs.at(j, v) = logits[static_cast<std::size_t>(v)] - lse;
              }
            }

            const EnumerationResult oracle =
                oracle_loss(inst.target, inst.logprobs, inst.vocab, ops);
            const DpConfig sum_cfg{ops, Aggregation::Sum, false, false};
            const DpConfig max_cfg{ops, Aggregation::Max, false, false};
            const DpResult sum = latent_loss(inst.target, inst.logprobs, inst.vocab, sum_cfg);
            const DpResult mx = latent_loss(inst.target, inst.logprobs, inst.vocab, max_cfg);
            ++checked;

            if (oracle.paths.empty()) {
              if (!sum.no_valid_path || !mx.no_valid_path) {
                std::cout << "FAIL: no-valid-path disagreement at n=" << n << " m=" << m << "\n";
                ok = false;
              }
              continue;
            }
            auto dev = [](double x, double y) {
              return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
            };
            const double d1 = dev(-sum.neg_log_loss, oracle.sum_log);
            const double d2 = dev(-mx.neg_log_loss, oracle.max_log);
            const double dp_ll =
                path_log_likelihood(inst.target, inst.logprobs, inst.vocab, *mx.best_path);
            const double or_ll =
                path_log_likelihood(inst.target, inst.logprobs, inst.vocab, oracle.argmax_path);
            const double d3 = dev(dp_ll, or_ll);
            max_dev = std::max({max_dev, d1, d2, d3});
            if (d1 > 1e-9 || d2 > 1e-9 || d3 > 1e-9) {
              std::cout << "FAIL: deviation above 1e-9 at n=" << n << " m=" << m
                        << " preset=" << (use_axe ? "axe" : "ctc") << " causal=" << causal << "\n";
              ok = false;
            }
          }
        }
      }
    }
  }

  std::cout << "checked " << checked << " instances (n<=" << a.max_n << ", m<=" << a.max_m
            << ", both presets, both aggregations, causal on/off)\n";
  std::cout << "max relative deviation: " << max_dev << "\n";
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : kExitAcceptance;
}

// --------------------------------------------------------------- train ----

int run_train(const GlobalOpts& g, const std::string& config_path) {
  const toy::RunConfig cfg = toy::load_run_config_file(config_path);
  write_manifest(g, "train", json::parse(toy::run_config_to_json(cfg)));

  const toy::TrainOutcome out = toy::train(cfg.train, cfg.task);
  std::filesystem::create_directories(g.out_dir);
  {
    std::ofstream csv(g.out_dir + "/metrics.csv");
    csv << out.history.to_csv();
  }
  toy::save_model_file(out.model, g.out_dir + "/model.json");

  const auto* tr = out.history.last("train");
  const auto* va = out.history.last("valid");
  const double floor = 2.0 * std::log(2.0) / out.mean_target_len;
  if (g.format == "json") {
    json j{{"objective", toy::objective_name(cfg.train.objective)},
           {"epochs_run", tr ? tr->epoch : 0},
           {"mean_target_len", out.mean_target_len},
           {"loss_floor", floor},
           {"train_loss", tr ? tr->loss : 0.0},
           {"valid_loss", va ? va->loss : 0.0},
           {"valid_empty_rate", va ? va->empty_rate : 0.0},
           {"valid_exact_match", va ? va->exact_match : 0.0},
           {"valid_trivial_rate", va ? va->trivial_rate : 0.0},
           {"valid_degenerate_rate", va ? va->degenerate_rate : 0.0}};
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "objective        : " << toy::objective_name(cfg.train.objective) << "\n"
              << "epochs run       : " << (tr ? tr->epoch : 0) << "\n"
              << "mean target len  : " << format_loss(out.mean_target_len) << "\n"
              << "copy loss floor  : " << format_loss(floor) << " (2 ln 2 / mean target len)\n"
              << "final train loss : " << (tr ? format_loss(tr->loss) : "-") << "\n";
    if (va) {
      std::cout << "final valid      : loss " << format_loss(va->loss) << "  empty "
                << format_loss(va->empty_rate) << "  exact " << format_loss(va->exact_match)
                << "  trivial " << format_loss(va->trivial_rate) << "  degenerate "
                << format_loss(va->degenerate_rate) << "\n";
    }
    std::cout << "wrote " << g.out_dir << "/metrics.csv, " << g.out_dir << "/model.json\n";
  }
  return 0;
}

// ---------------------------------------------------------------- eval ----

int run_eval(const GlobalOpts& g, const std::string& model_path, const std::string& config_path,
             const std::string& split) {
  const toy::RunConfig cfg = toy::load_run_config_file(config_path);
  const toy::ToyModel model = toy::load_model_file(model_path);
  write_manifest(g, "eval", {{"model", model_path}, {"config", config_path}, {"split", split}});

  const toy::Dataset ds = toy::gen_dataset(cfg.task);
  const std::vector<toy::Example>* examples = nullptr;
  if (split == "train") examples = &ds.train;
  else if (split == "valid") examples = &ds.valid;
  else if (split == "test") examples = &ds.test;
  else throw std::runtime_error("split must be train, valid or test");

  const Vocab vocab = toy::task_vocab(cfg.task);
  const toy::EvalResult res = toy::evaluate(model, *examples, cfg.train.objective, vocab, 0);
  if (g.format == "json") {
    json j{{"split", split},
           {"objective", toy::objective_name(cfg.train.objective)},
           {"loss", res.loss},
           {"empty_rate", res.empty_rate},
           {"exact_match", res.exact_match},
           {"trivial_rate", res.trivial_rate},
           {"degenerate_rate", res.degenerate_rate},
           {"skipped", res.skipped}};
    std::cout << j.dump() << "\n";
  } else if (g.format == "csv") {
    std::cout << "split,objective,loss,empty_rate,exact_match,trivial_rate,degenerate_rate\n"
              << split << ',' << toy::objective_name(cfg.train.objective) << ','
              << format_loss(res.loss) << ',' << format_loss(res.empty_rate) << ','
              << format_loss(res.exact_match) << ',' << format_loss(res.trivial_rate) << ','
              << format_loss(res.degenerate_rate) << "\n";
  } else {
    std::cout << "split            : " << split << "\n"
              << "objective        : " << toy::objective_name(cfg.train.objective) << "\n"
              << "loss             : " << format_loss(res.loss) << "\n"
              << "empty rate       : " << format_loss(res.empty_rate) << "\n"
              << "exact match      : " << format_loss(res.exact_match) << "\n"
              << "trivial rate     : " << format_loss(res.trivial_rate) << "\n"
              << "degenerate rate  : " << format_loss(res.degenerate_rate) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent alignment objectives (sum/max over monotonic alignment operators)\n"
               "with a teacher-forced toy seq2seq harness"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--out-dir", g.out_dir, "directory for manifests and run artifacts")
      ->capture_default_str();
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"pretty", "json", "csv"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed, "seed for randomized commands")->capture_default_str();

  LossArgs loss_args;
  CLI::App* loss = app.add_subcommand("loss", "alignment loss of a (target, logprobs) instance");
  loss->add_option("instance", loss_args.instance_path, "instance JSON file")->required();
  loss->add_option("--objective", loss_args.objective, "ctc, axe or ce")
      ->check(CLI::IsMember({"ctc", "axe", "ce"}))
      ->capture_default_str();
  loss->add_option("--aggregation", loss_args.aggregation, "sum or max (default per objective)")
      ->check(CLI::IsMember({"sum", "max"}));
  loss->add_flag("--causal", loss_args.causal, "restrict to alignments with i >= j");
  loss->add_flag("--no-normalize", loss_args.no_normalize, "report the unnormalized loss");

  AlignArgs align_args;
  CLI::App* align = app.add_subcommand("align", "best alignment trace as a table");
  align->add_option("instance", align_args.instance_path, "instance JSON file")->required();
  align->add_option("--objective", align_args.objective, "axe or ctc")
      ->check(CLI::IsMember({"axe", "ctc"}))
      ->capture_default_str();
  align->add_flag("--causal", align_args.causal, "restrict to alignments with i >= j");
  align->add_option("--topk", align_args.topk, "prediction rows to display")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand("oracle-check",
                                        "compare the dynamic program against brute-force enumeration");
  oracle->add_option("--max-n", oracle_args.max_n)->capture_default_str();
  oracle->add_option("--max-m", oracle_args.max_m)->capture_default_str();
  oracle->add_option("--trials", oracle_args.trials, "random instances per cell")
      ->capture_default_str();

  std::string train_config;
  CLI::App* train_cmd = app.add_subcommand("train", "train the toy model per a JSON config");
  train_cmd->add_option("config", train_config, "run config JSON file")->required();

  std::string eval_model, eval_config, eval_split = "test";
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a saved model on a dataset split");
  eval_cmd->add_option("--model", eval_model, "model JSON file")->required();
  eval_cmd->add_option("--config", eval_config, "run config JSON file")->required();
  eval_cmd->add_option("--split", eval_split, "train, valid or test")
      ->check(CLI::IsMember({"train", "valid", "test"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (loss->parsed()) return run_loss(g, loss_args);
    if (align->parsed()) return run_align(g, align_args);
    if (oracle->parsed()) return run_oracle_check(g, oracle_args);
    if (train_cmd->parsed()) return run_train(g, train_config);
    if (eval_cmd->parsed()) return run_eval(g, eval_model, eval_config, eval_split);
  } catch (const toy::TrainDivergedError& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
