#include "rlgaf/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "rlgaf/errors.hpp"

namespace rlgaf {

double sequence_kl(const GenModel& gen, const ParamStore& ref_params,
                   const Sequence& seq) {
  if (!gen.params.congruent_with(ref_params))
    throw InvalidInputError("reference params incongruent with generator");
  GenModel ref;
  ref.dims = gen.dims;
  ref.arch = gen.arch;
  ref.terminator = gen.terminator;
  ref.params = ref_params;
  return log_prob(gen, seq) - log_prob(ref, seq);
}

double ppo_objective_value(double reward, double kl, double pretrain_lp,
                           const PPOConfig& cfg) {
  if (!std::isfinite(reward) || !std::isfinite(kl) ||
      !std::isfinite(pretrain_lp))
    throw InvalidInputError("objective inputs must be finite");
  return reward - cfg.beta * kl + cfg.gamma * pretrain_lp;
}

double clip_ratio(double rho, double eps) {
  return std::min(std::max(rho, 1.0 - eps), 1.0 + eps);
}

namespace {

void check_config(const GenModel& gen, const PPOConfig& cfg) {
  if (!(cfg.beta >= 0.0) || !std::isfinite(cfg.beta))
    throw InvalidInputError("beta must be finite and non-negative");
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma))
    throw InvalidInputError("gamma must be finite and non-negative");
  if (!(cfg.clip_eps > 0.0) || !(cfg.clip_eps < 1.0))
    throw InvalidInputError("clip_eps must lie in (0, 1)");
  if (cfg.ppo_epochs < 1) throw InvalidInputError("ppo_epochs must be >= 1");
  if (cfg.batch_size < 1) throw InvalidInputError("batch size must be positive");
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr))
    throw InvalidInputError("learning rate must be finite and non-negative");
  if (!gen.params.congruent_with(cfg.ref_params))
    throw InvalidInputError("reference params incongruent with generator");
}

}  // namespace

GenStepInfo ppo_step(GenModel& gen, const DiscModel& disc,
                     const TaskSpec& task, PPOConfig& cfg, RngStream& rng) {
  check_config(gen, cfg);
  const std::size_t n = static_cast<std::size_t>(cfg.batch_size);

  std::vector<Sequence> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    batch.push_back(sample_response(gen, task.sample_prompt(rng), rng));

  std::vector<double> rewards(n), kls(n), lp_old(n), advantages(n);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = normalize_reward(score(disc, batch[i]), cfg.reward_mode);
    kls[i] = sequence_kl(gen, cfg.ref_params, batch[i]);
  }
  {
    // same operation order as the per-epoch training tapes, so the first
    // epoch's importance ratios are exactly 1
    Tape tape;
    BoundParams bound = bind_constants(tape, gen.params);
    for (std::size_t i = 0; i < n; ++i)
      lp_old[i] = tape.scalar_value(log_prob_on_tape(tape, bound, gen, batch[i]));
  }

  double batch_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    advantages[i] = rewards[i] - cfg.beta * kls[i];
    batch_mean += advantages[i];
  }
  batch_mean /= static_cast<double>(n);
  const double baseline = cfg.baseline.observe_batch_mean(batch_mean);
  for (double& a : advantages) a -= baseline;

  std::vector<Sequence> pretrain_batch;
  if (cfg.gamma > 0.0) {
    if (task.pretrain_corpus.empty())
      throw InvalidInputError("gamma > 0 requires a pretraining corpus");
    for (std::size_t i = 0; i < n; ++i)
      pretrain_batch.push_back(
          task.pretrain_corpus[static_cast<std::size_t>(rng.next_int(
                                   static_cast<int>(task.pretrain_corpus.size())))]
              .seq);
  }

  double last_objective = 0.0;
  for (int epoch = 0; epoch < cfg.ppo_epochs; ++epoch) {
    Tape tape;
    BoundParams bound = bind_params(tape, gen.params);
    std::vector<Var> surrogates;
    for (std::size_t i = 0; i < n; ++i) {
      Var lp_new = log_prob_on_tape(tape, bound, gen, batch[i]);
      Var ratio = tape.exp(tape.sub(lp_new, tape.scalar(lp_old[i])));
      Var unclipped = tape.scale(ratio, advantages[i]);
      Var clipped = tape.scale(
          tape.clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps),
          advantages[i]);
      surrogates.push_back(tape.vmin(unclipped, clipped));
    }
    Var objective = tape.mean(tape.concat_rows(surrogates));
    if (cfg.gamma > 0.0) {
      std::vector<Var> lps;
      for (const Sequence& seq : pretrain_batch)
        lps.push_back(log_prob_on_tape(tape, bound, gen, seq));
      objective = tape.add(
          objective, tape.scale(tape.mean(tape.concat_rows(lps)), cfg.gamma));
    }
    tape.backward(objective);
    GradStore grads = tape.grads_for(gen.params);
    if (!grads.all_finite())
      throw TrainingDivergenceError("non-finite policy gradient");
    gen.params.axpy(cfg.lr, grads);
    if (gen.params.max_abs_value() > kParamMagnitudeGuard)
      throw TrainingDivergenceError("parameter magnitude exceeded guard");
    last_objective = tape.scalar_value(objective);
  }

  GenStepInfo info;
  info.loss_g = -last_objective;
  for (std::size_t i = 0; i < n; ++i) info.reward_mean += rewards[i];
  info.reward_mean /= static_cast<double>(n);
  double kl_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) kl_mean += kls[i];
  info.kl_mean = kl_mean / static_cast<double>(n);
  return info;
}

}  // namespace rlgaf
