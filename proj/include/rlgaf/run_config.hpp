#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rlgaf/adversarial.hpp"
#include "rlgaf/backbone.hpp"
#include "rlgaf/judge.hpp"

namespace rlgaf {

struct TaskConfig {
  std::string name = "sentiment";  // sentiment | form
  int vocab = 32;
  int p_set_size = 8;  // sentiment
  int n_set_size = 8;  // sentiment
  int k = 3;           // form: max well-formed length
};

struct PretrainConfig {
  int steps = 0;
  double lr = 0.05;
  int batch_size = 8;
};

// Everything that determines a run, one JSON object on disk. Unknown keys are
// rejected so typos fail loudly; omitted keys take the defaults here and the
// persisted copy always carries the fully resolved values.
struct RunConfig {
  std::uint64_t seed = 1;
  TaskConfig task;
  ModelDims dims;
  Arch arch = Arch::RecurrentCell;
  PretrainConfig pretrain;
  LoopConfig loop;
  std::string output_dir = "run";
  std::optional<JudgeEndpoint> judge;
};

RunConfig parse_run_config(const std::string& json_text);
std::string run_config_text(const RunConfig& cfg);  // pretty, fully resolved

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

}  // namespace rlgaf
