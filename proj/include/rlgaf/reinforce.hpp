#pragma once

#include <optional>
#include <vector>

#include "rlgaf/disc_model.hpp"
#include "rlgaf/gen_model.hpp"
#include "rlgaf/tasks.hpp"

namespace rlgaf {

// How a raw discriminator score becomes a reward.
enum class RewardMode { Raw, Sigmoid, Normalized };

std::string reward_mode_name(RewardMode mode);
RewardMode reward_mode_from_name(const std::string& name);

double normalize_reward(double score, RewardMode mode);

struct Trajectory {
  Sequence sequence;
  std::vector<double> step_log_probs;
  std::vector<double> step_rewards;
  std::vector<double> reward_to_go;
};

struct ReinforceConfig {
  int batch_size = 8;
  // completions sampled per intermediate position; 0 = terminal-reward-only
  int rollout_count = 0;
  RewardMode reward_mode = RewardMode::Sigmoid;
  double lr = 0.1;
};

struct GenStepInfo {
  double loss_g = 0.0;
  double reward_mean = 0.0;
  std::optional<double> kl_mean;
};

std::vector<double> reward_to_go(const std::vector<double>& step_rewards);

std::vector<double> assign_rewards(const GenModel& gen, const DiscModel& disc,
                                   const Sequence& seq,
                                   const ReinforceConfig& cfg, RngStream& rng);

// Monte Carlo policy-gradient estimate, averaged over the trajectories.
GradStore estimate_gradient(const GenModel& gen,
                            const std::vector<Trajectory>& trajectories);

// Sample a batch of trajectories from the task's prompts, assign rewards from
// the discriminator, and take one gradient-ascent step.
GenStepInfo reinforce_step(GenModel& gen, const DiscModel& disc,
                           const TaskSpec& task, const ReinforceConfig& cfg,
                           RngStream& rng);

}  // namespace rlgaf
