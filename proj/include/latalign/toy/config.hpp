#ifndef LATALIGN_TOY_CONFIG_HPP
#define LATALIGN_TOY_CONFIG_HPP

#include <string>

#include "latalign/toy/task.hpp"
#include "latalign/toy/train.hpp"

namespace latalign::toy {

struct RunConfig {
  TaskSpec task;
  TrainConfig train;
};

// Single JSON config driving both the task generator and the trainer:
//   {"task": {...}, "train": {"objective": "axe", ...}}
// Unknown keys are rejected; omitted keys keep their defaults (including the
// stock substitution table). Throws std::runtime_error with the offending
// field.
RunConfig load_run_config_json(const std::string& text);
RunConfig load_run_config_file(const std::string& path);

std::string run_config_to_json(const RunConfig& cfg);

}  // namespace latalign::toy

#endif
