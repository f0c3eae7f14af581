#ifndef LATALIGN_INSTANCE_JSON_HPP
#define LATALIGN_INSTANCE_JSON_HPP

#include <string>

#include "latalign/types.hpp"

namespace latalign {

// Instance files look like:
//   {"vocab": ["it","is",...,"<eps>","<eos>"],
//    "blank": "<eps>", "eos": "<eos>",
//    "target": ["it","is",...],
//    "logprobs": [[...], ...]}           // m rows of natural-log probs
//
// Loaders throw std::runtime_error with a field/row diagnostic on schema
// violations (including rows that fail normalization).
Instance load_instance_json(const std::string& text);
Instance load_instance_file(const std::string& path);

std::string instance_to_json(const Instance& inst);
void save_instance_file(const Instance& inst, const std::string& path);

}  // namespace latalign

#endif
