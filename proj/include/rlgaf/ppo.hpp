#pragma once

#include "rlgaf/disc_model.hpp"
#include "rlgaf/gen_model.hpp"
#include "rlgaf/reinforce.hpp"
#include "rlgaf/tasks.hpp"

namespace rlgaf {

// Scalar exponential-moving-average advantage baseline; seeded with the first
// batch mean it sees.
struct BaselineState {
  double decay = 0.95;
  double value = 0.0;
  bool initialized = false;

  double observe_batch_mean(double mean) {
    if (!initialized) {
      value = mean;
      initialized = true;
    }
    const double before = value;
    value = decay * value + (1.0 - decay) * mean;
    return before;
  }
};

struct PPOConfig {
  double beta = 0.1;      // KL-to-reference coefficient
  double gamma = 0.0;     // pretraining log-likelihood coefficient
  double clip_eps = 0.2;  // importance-ratio clip radius
  int ppo_epochs = 4;
  int batch_size = 8;
  double lr = 0.05;
  RewardMode reward_mode = RewardMode::Sigmoid;
  ParamStore ref_params;  // frozen reference policy; never mutated
  BaselineState baseline;
};

double sequence_kl(const GenModel& gen, const ParamStore& ref_params,
                   const Sequence& seq);

double ppo_objective_value(double reward, double kl, double pretrain_lp,
                           const PPOConfig& cfg);

double clip_ratio(double rho, double eps);

// One PPO update: sample a batch under the current policy, compute per
// sequence advantages against the EMA baseline, then run ppo_epochs of
// clipped-surrogate ascent over the frozen batch. Mutates gen and
// cfg.baseline only.
GenStepInfo ppo_step(GenModel& gen, const DiscModel& disc,
                     const TaskSpec& task, PPOConfig& cfg, RngStream& rng);

}  // namespace rlgaf
