#include "latalign/instance_json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace latalign {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("instance schema: " + what); }

json need(const json& j, const char* key) {
  if (!j.contains(key)) fail(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

}  // namespace

Instance load_instance_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }

  Instance inst;
  const json jvocab = need(j, "vocab");
  if (!jvocab.is_array() || jvocab.empty()) fail("\"vocab\" must be a non-empty array of strings");
  for (const auto& t : jvocab) {
    if (!t.is_string()) fail("\"vocab\" must contain only strings");
    inst.vocab.tokens.push_back(t.get<std::string>());
  }

  const json jblank = need(j, "blank");
  const json jeos = need(j, "eos");
  if (!jblank.is_string() || !jeos.is_string()) fail("\"blank\" and \"eos\" must be token strings");
  inst.vocab.blank_id = inst.vocab.find(jblank.get<std::string>());
  inst.vocab.eos_id = inst.vocab.find(jeos.get<std::string>());
  if (inst.vocab.blank_id < 0) fail("\"blank\" token not present in vocab");
  if (inst.vocab.eos_id < 0) fail("\"eos\" token not present in vocab");
  try {
    inst.vocab.check();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }

  const json jtarget = need(j, "target");
  if (!jtarget.is_array() || jtarget.empty()) fail("\"target\" must be a non-empty array of tokens");
  for (std::size_t i = 0; i < jtarget.size(); ++i) {
    const auto& t = jtarget[i];
    if (!t.is_string()) fail("\"target\" must contain only strings");
    const TokenId id = inst.vocab.find(t.get<std::string>());
    if (id < 0) fail("target token \"" + t.get<std::string>() + "\" (position " + std::to_string(i + 1) +
                     ") not in vocab");
    inst.target.ids.push_back(id);
  }

  const json jrows = need(j, "logprobs");
  if (!jrows.is_array() || jrows.empty()) fail("\"logprobs\" must be a non-empty array of rows");
  inst.logprobs.rows = static_cast<int>(jrows.size());
  inst.logprobs.vocab_size = inst.vocab.size();
  inst.logprobs.values.reserve(jrows.size() * inst.vocab.tokens.size());
  for (std::size_t r = 0; r < jrows.size(); ++r) {
    const auto& row = jrows[r];
    if (!row.is_array() || row.size() != inst.vocab.tokens.size()) {
      fail("logprobs row " + std::to_string(r + 1) + " must have exactly |vocab| = " +
           std::to_string(inst.vocab.tokens.size()) + " entries");
    }
    for (const auto& v : row) {
      if (!v.is_number()) fail("logprobs row " + std::to_string(r + 1) + " contains a non-number");
      inst.logprobs.values.push_back(v.get<double>());
    }
  }

  try {
    inst.target.check(inst.vocab);
    inst.logprobs.check(inst.vocab);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return inst;
}

Instance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_instance_json(ss.str());
}

std::string instance_to_json(const Instance& inst) {
  json j;
  j["vocab"] = inst.vocab.tokens;
  j["blank"] = inst.vocab.tokens[static_cast<std::size_t>(inst.vocab.blank_id)];
  j["eos"] = inst.vocab.tokens[static_cast<std::size_t>(inst.vocab.eos_id)];
  json tgt = json::array();
  for (TokenId id : inst.target.ids) tgt.push_back(inst.vocab.tokens[static_cast<std::size_t>(id)]);
  j["target"] = tgt;
  json rows = json::array();
  for (int r = 1; r <= inst.logprobs.rows; ++r) {
    json row = json::array();
    for (TokenId v = 0; v < inst.vocab.size(); ++v) row.push_back(inst.logprobs.at(r, v));
    rows.push_back(row);
  }
  j["logprobs"] = rows;
  return j.dump(2);
}

void save_instance_file(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << instance_to_json(inst) << "\n";
}

}  // namespace latalign
