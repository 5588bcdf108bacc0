#include "rlgaf/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include "rlgaf/errors.hpp"

namespace rlgaf {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Reinforce: return "reinforce";
    case Strategy::PPO: return "ppo";
    case Strategy::Gumbel: return "gumbel";
  }
  throw StructuralError("unknown strategy");
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "reinforce") return Strategy::Reinforce;
  if (name == "ppo") return Strategy::PPO;
  if (name == "gumbel") return Strategy::Gumbel;
  throw InvalidInputError("unknown strategy '" + name + "'");
}

CollapseReport detect_mode_collapse(const std::vector<Sequence>& samples,
                                    const LoopConfig& cfg) {
  if (samples.size() < 20)
    throw InvalidInputError("collapse detection needs at least 20 samples");
  CollapseReport report;

  std::map<std::vector<int>, int> counts;
  for (const Sequence& s : samples) ++counts[s.response];
  report.distinct_response_ratio =
      static_cast<double>(counts.size()) / static_cast<double>(samples.size());
  int best_count = 0;
  for (const auto& [response, count] : counts) {
    if (count > best_count) {
      best_count = count;
      report.most_frequent_response = response;
    }
  }
  report.most_frequent_share =
      static_cast<double>(best_count) / static_cast<double>(samples.size());

  double ratio_sum = 0.0;
  for (const Sequence& s : samples) {
    if (s.response.empty()) {
      ratio_sum += 1.0;
      continue;
    }
    std::vector<int> sorted = s.response;
    std::sort(sorted.begin(), sorted.end());
    const auto distinct =
        std::unique(sorted.begin(), sorted.end()) - sorted.begin();
    ratio_sum += static_cast<double>(distinct) /
                 static_cast<double>(s.response.size());
  }
  report.mean_distinct_token_ratio =
      ratio_sum / static_cast<double>(samples.size());

  std::map<std::pair<int, int>, int> bigrams;
  long total_bigrams = 0;
  for (const Sequence& s : samples) {
    for (std::size_t i = 0; i + 1 < s.response.size(); ++i) {
      ++bigrams[{s.response[i], s.response[i + 1]}];
      ++total_bigrams;
    }
  }
  double entropy = 0.0;
  for (const auto& [bigram, count] : bigrams) {
    const double p = static_cast<double>(count) /
                     static_cast<double>(total_bigrams);
    entropy -= p * std::log(p);
  }
  report.bigram_entropy = entropy;

  report.flagged = report.distinct_response_ratio < cfg.distinct_ratio_min ||
                   report.bigram_entropy < cfg.bigram_entropy_min ||
                   report.most_frequent_share > 0.5;
  return report;
}

std::vector<double> smooth_rewards(const std::vector<double>& raw, int window) {
  if (window < 1) throw InvalidInputError("smoothing window must be >= 1");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t begin =
        i + 1 >= static_cast<std::size_t>(window) ? i + 1 - window : 0;
    // extended precision keeps the average of a constant slice exact
    long double sum = 0.0L;
    for (std::size_t j = begin; j <= i; ++j) sum += raw[j];
    out[i] = static_cast<double>(sum / static_cast<long double>(i + 1 - begin));
  }
  return out;
}

namespace {

LabeledBatch draw_real_batch(const TaskSpec& task, int count, int round,
                             RngStream& rng) {
  LabeledBatch batch;
  batch.provenance_round = round;
  for (int i = 0; i < count; ++i) {
    LabeledItem item;
    item.seq = task.expert_demonstration(task.sample_prompt(rng), rng);
    item.label = 1;
    batch.items.push_back(std::move(item));
  }
  return batch;
}

LabeledBatch draw_fake_batch(const GenModel& gen, const TaskSpec& task,
                             int count, int round, RngStream& rng) {
  LabeledBatch batch;
  batch.provenance_round = round;
  for (int i = 0; i < count; ++i) {
    LabeledItem item;
    item.seq = sample_response(gen, task.sample_prompt(rng), rng);
    item.label = 0;
    batch.items.push_back(std::move(item));
  }
  return batch;
}

}  // namespace

RoundMetrics rlgaf_round(GenModel& gen, DiscModel& disc, const TaskSpec& task,
                         LoopConfig& cfg, int round_index, RngStream& rng) {
  if (cfg.gen_steps_per_round < 0 || cfg.disc_steps_per_round < 0 ||
      cfg.disc_samples_per_round < 0)
    throw InvalidInputError("per-round step counts must be non-negative");
  if (round_index == 0 && cfg.disc_steps_per_round > cfg.gen_steps_per_round)
    std::cerr << "warning: disc_steps_per_round exceeds gen_steps_per_round; "
                 "the discriminator is usually regularized by training it "
                 "less, not more\n";

  RoundMetrics metrics;
  metrics.round = round_index;

  if (cfg.disc_steps_per_round > 0 && cfg.disc_samples_per_round > 0) {
    LabeledBatch real = draw_real_batch(task, cfg.disc_samples_per_round,
                                        round_index, rng);
    LabeledBatch fake = draw_fake_batch(gen, task, cfg.disc_samples_per_round,
                                        round_index, rng);
    metrics.fake_batch_provenance = fake.provenance_round;
    for (int s = 0; s < cfg.disc_steps_per_round; ++s) {
      auto [total, loss_real, loss_fake] =
          disc_update(disc, real, fake, cfg.disc_lr);
      metrics.disc_loss_total = total;
      metrics.disc_loss_real = loss_real;
      metrics.disc_loss_fake = loss_fake;
    }
  }

  for (int s = 0; s < cfg.gen_steps_per_round; ++s) {
    GenStepInfo info;
    switch (cfg.strategy) {
      case Strategy::Reinforce:
        info = reinforce_step(gen, disc, task, cfg.reinforce, rng);
        break;
      case Strategy::PPO:
        info = ppo_step(gen, disc, task, cfg.ppo, rng);
        break;
      case Strategy::Gumbel: {
        std::vector<std::vector<int>> prompts;
        for (int p = 0; p < cfg.gumbel_batch_size; ++p)
          prompts.push_back(task.sample_prompt(rng));
        info = gumbel_generator_step(gen, disc, prompts, cfg.gumbel, rng);
        break;
      }
    }
    metrics.reward_mean += info.reward_mean;
    metrics.gen_steps.push_back(info);
  }
  if (!metrics.gen_steps.empty())
    metrics.reward_mean /= static_cast<double>(metrics.gen_steps.size());

  const int eval_half = cfg.eval_samples_per_round / 2;
  if (eval_half > 0) {
    LabeledBatch eval = draw_real_batch(task, eval_half, round_index, rng);
    LabeledBatch fakes =
        draw_fake_batch(gen, task, eval_half, round_index, rng);
    std::vector<Sequence> fake_seqs;
    for (const LabeledItem& item : fakes.items) fake_seqs.push_back(item.seq);
    for (LabeledItem& item : fakes.items)
      eval.items.push_back(std::move(item));
    metrics.disc_eval_accuracy = accuracy(disc, eval);
    if (fake_seqs.size() >= 20)
      metrics.collapse = detect_mode_collapse(fake_seqs, cfg);
  }

  if (cfg.halt_on_collapse && metrics.collapse.flagged)
    throw TrainingDivergenceError(
        "mode collapse detected (round " + std::to_string(round_index) + ")");
  return metrics;
}

}  // namespace rlgaf
