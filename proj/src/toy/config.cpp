#include "latalign/toy/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace latalign::toy {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("run config: " + what); }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  check_keys(j, {"task", "train"}, "the top level");

  RunConfig cfg;
  cfg.task = default_task_spec();
  if (j.contains("task")) {
    const json& t = j["task"];
    check_keys(t,
               {"vocab_size", "min_len", "max_len", "substitution_table", "train_size",
                "valid_size", "test_size", "seed"},
               "\"task\"");
    read(t, "vocab_size", cfg.task.vocab_size);
    read(t, "min_len", cfg.task.min_len);
    read(t, "max_len", cfg.task.max_len);
    read(t, "train_size", cfg.task.train_size);
    read(t, "valid_size", cfg.task.valid_size);
    read(t, "test_size", cfg.task.test_size);
    read(t, "seed", cfg.task.seed);
    if (t.contains("substitution_table")) {
      cfg.task.substitution_table.clear();
      for (const auto& [src, images] : t["substitution_table"].items()) {
        cfg.task.substitution_table[src] = images.get<std::vector<std::string>>();
      }
    }
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    check_keys(t,
               {"objective", "lr", "epochs", "batch_size", "seed", "grad_clip", "adam",
                "embed_dim", "hidden_dim", "pattern_sample", "stop_at_train_loss",
                "stop_at_exact_match"},
               "\"train\"");
    if (t.contains("objective")) {
      try {
        cfg.train.objective = objective_from_name(t["objective"].get<std::string>());
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
    }
    read(t, "lr", cfg.train.lr);
    read(t, "epochs", cfg.train.epochs);
    read(t, "batch_size", cfg.train.batch_size);
    read(t, "seed", cfg.train.seed);
    read(t, "grad_clip", cfg.train.grad_clip);
    read(t, "adam", cfg.train.adam);
    read(t, "embed_dim", cfg.train.embed_dim);
    read(t, "hidden_dim", cfg.train.hidden_dim);
    read(t, "pattern_sample", cfg.train.pattern_sample);
    read(t, "stop_at_train_loss", cfg.train.stop_at_train_loss);
    read(t, "stop_at_exact_match", cfg.train.stop_at_exact_match);
  }
  try {
    cfg.task.check();
    cfg.train.check();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return cfg;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_run_config_json(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  json task;
  task["vocab_size"] = cfg.task.vocab_size;
  task["min_len"] = cfg.task.min_len;
  task["max_len"] = cfg.task.max_len;
  task["train_size"] = cfg.task.train_size;
  task["valid_size"] = cfg.task.valid_size;
  task["test_size"] = cfg.task.test_size;
  task["seed"] = cfg.task.seed;
  json table;
  for (const auto& [src, images] : cfg.task.substitution_table) table[src] = images;
  task["substitution_table"] = table;

  json train;
  train["objective"] = objective_name(cfg.train.objective);
  train["lr"] = cfg.train.lr;
  train["epochs"] = cfg.train.epochs;
  train["batch_size"] = cfg.train.batch_size;
  train["seed"] = cfg.train.seed;
  train["grad_clip"] = cfg.train.grad_clip;
  train["adam"] = cfg.train.adam;
  train["embed_dim"] = cfg.train.embed_dim;
  train["hidden_dim"] = cfg.train.hidden_dim;
  train["pattern_sample"] = cfg.train.pattern_sample;
  train["stop_at_train_loss"] = cfg.train.stop_at_train_loss;
  train["stop_at_exact_match"] = cfg.train.stop_at_exact_match;

  json j;
  j["task"] = task;
  j["train"] = train;
  return j.dump(2);
}

}  // namespace latalign::toy
