#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rlgaf/adversarial.hpp"
#include "rlgaf/disc_model.hpp"
#include "rlgaf/gen_model.hpp"
#include "rlgaf/run_config.hpp"
#include "rlgaf/tasks.hpp"

namespace rlgaf {

TaskSpec task_from_config(const RunConfig& cfg);

GenModel init_generator(const RunConfig& cfg);
DiscModel init_discriminator(const RunConfig& cfg);

struct RunResult {
  std::string output_dir;
  std::vector<RoundMetrics> rounds;
  double final_reward_mean = 0.0;
};

// Full pipeline: persist resolved config, pretrain, adversarial rounds,
// final checkpoints. Everything under cfg.output_dir.
RunResult run_training(const RunConfig& cfg,
                       const std::function<void(int)>& on_round = {});

std::string gen_checkpoint_path(const RunConfig& cfg);
std::string disc_checkpoint_path(const RunConfig& cfg);
std::string metrics_path(const RunConfig& cfg);
std::string resolved_config_path(const RunConfig& cfg);

// Draws `count` responses from a checkpointed generator and formats them
// one per line in corpus file syntax (prompt tokens, then response tokens).
std::string sample_responses(const RunConfig& cfg,
                             const std::string& checkpoint_path, int count,
                             std::uint64_t sample_seed);

struct OracleEvalResult {
  int total = 0;
  int matches = 0;
  double rate = 0.0;
};

// Scores `count` sampled responses against the task oracle.
OracleEvalResult evaluate_against_oracle(const RunConfig& cfg,
                                         const std::string& checkpoint_path,
                                         int count, std::uint64_t sample_seed);

}  // namespace rlgaf
