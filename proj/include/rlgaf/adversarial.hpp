#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rlgaf/disc_model.hpp"
#include "rlgaf/gen_model.hpp"
#include "rlgaf/gumbel.hpp"
#include "rlgaf/ppo.hpp"
#include "rlgaf/reinforce.hpp"
#include "rlgaf/tasks.hpp"

namespace rlgaf {

enum class Strategy { Reinforce, PPO, Gumbel };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct LoopConfig {
  Strategy strategy = Strategy::Reinforce;
  int gen_steps_per_round = 10;
  int disc_steps_per_round = 1;
  int disc_samples_per_round = 10;
  int total_rounds = 20;
  int eval_samples_per_round = 100;  // split evenly between real and fake
  double disc_lr = 1e-2;
  double distinct_ratio_min = 0.1;
  double bigram_entropy_min = 1.0;  // nats
  int smoothing_window = 100;
  bool halt_on_collapse = false;
  ReinforceConfig reinforce;
  PPOConfig ppo;
  GumbelConfig gumbel;
  int gumbel_batch_size = 4;
};

struct CollapseReport {
  bool flagged = false;
  double distinct_response_ratio = 1.0;
  double mean_distinct_token_ratio = 1.0;
  double bigram_entropy = 0.0;  // nats
  std::vector<int> most_frequent_response;
  double most_frequent_share = 0.0;
};

struct RoundMetrics {
  int round = -1;
  int fake_batch_provenance = -1;
  std::optional<double> disc_loss_total;
  std::optional<double> disc_loss_real;
  std::optional<double> disc_loss_fake;
  double disc_eval_accuracy = 0.0;
  std::vector<GenStepInfo> gen_steps;
  double reward_mean = 0.0;  // mean over the round's generator steps
  CollapseReport collapse;
};

CollapseReport detect_mode_collapse(const std::vector<Sequence>& samples,
                                    const LoopConfig& cfg);

std::vector<double> smooth_rewards(const std::vector<double>& raw, int window);

// One adversarial round: train the discriminator on fresh expert/generated
// pairs, then the generator against the updated discriminator, then evaluate
// discriminator accuracy and collapse statistics on held-out fresh samples.
RoundMetrics rlgaf_round(GenModel& gen, DiscModel& disc, const TaskSpec& task,
                         LoopConfig& cfg, int round_index, RngStream& rng);

}  // namespace rlgaf
