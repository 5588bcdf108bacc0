#include "rlgaf/reinforce.hpp"

#include <cmath>

#include "rlgaf/errors.hpp"
#include "rlgaf/numeric.hpp"

namespace rlgaf {

std::string reward_mode_name(RewardMode mode) {
  switch (mode) {
    case RewardMode::Raw: return "raw";
    case RewardMode::Sigmoid: return "sigmoid";
    case RewardMode::Normalized: return "normalized";
  }
  throw StructuralError("unknown reward mode");
}

RewardMode reward_mode_from_name(const std::string& name) {
  if (name == "raw") return RewardMode::Raw;
  if (name == "sigmoid") return RewardMode::Sigmoid;
  if (name == "normalized") return RewardMode::Normalized;
  throw InvalidInputError("unknown reward mode '" + name + "'");
}

double normalize_reward(double score, RewardMode mode) {
  if (!std::isfinite(score))
    throw InvalidInputError("reward input must be finite");
  switch (mode) {
    case RewardMode::Raw: return score;
    case RewardMode::Sigmoid: return sigmoid(score);
    case RewardMode::Normalized: return sigmoid(score) - 0.5;
  }
  throw StructuralError("unknown reward mode");
}

std::vector<double> reward_to_go(const std::vector<double>& step_rewards) {
  if (step_rewards.empty())
    throw InvalidInputError("reward_to_go: empty rewards");
  std::vector<double> out(step_rewards.size());
  double running = 0.0;
  for (std::size_t i = step_rewards.size(); i > 0; --i) {
    running += step_rewards[i - 1];
    out[i - 1] = running;
  }
  return out;
}

std::vector<double> assign_rewards(const GenModel& gen, const DiscModel& disc,
                                   const Sequence& seq,
                                   const ReinforceConfig& cfg, RngStream& rng) {
  const std::size_t steps = seq.response.size();
  if (steps == 0) throw InvalidInputError("assign_rewards: empty response");
  std::vector<double> rewards(steps, 0.0);
  rewards.back() = normalize_reward(score(disc, seq), cfg.reward_mode);
  if (cfg.rollout_count <= 0) return rewards;
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    const std::vector<int> partial(seq.response.begin(),
                                   seq.response.begin() +
                                       static_cast<std::ptrdiff_t>(t) + 1);
    double total = 0.0;
    for (int r = 0; r < cfg.rollout_count; ++r) {
      const Sequence completed =
          continue_response(gen, seq.prompt, partial, rng);
      total += normalize_reward(score(disc, completed), cfg.reward_mode);
    }
    rewards[t] = total / static_cast<double>(cfg.rollout_count);
  }
  return rewards;
}

GradStore estimate_gradient(const GenModel& gen,
                            const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty())
    throw InvalidInputError("estimate_gradient: no trajectories");
  Tape tape;
  BoundParams bound = bind_params(tape, gen.params);
  std::vector<Var> per_traj;
  for (const Trajectory& traj : trajectories) {
    const Sequence& seq = traj.sequence;
    if (traj.reward_to_go.size() != seq.response.size())
      throw InvalidInputError(
          "estimate_gradient: reward-to-go length mismatch");
    backbone::TapeEncoder enc(tape, bound, gen.dims, gen.arch);
    for (int t : seq.prompt) enc.consume_token(t);
    std::vector<Var> terms;
    for (std::size_t i = 0; i < seq.response.size(); ++i) {
      Var lsm = tape.log_softmax(logits_on_tape(tape, bound, enc));
      terms.push_back(
          tape.scale(tape.pick(lsm, seq.response[i]), traj.reward_to_go[i]));
      if (i + 1 < seq.response.size()) enc.consume_token(seq.response[i]);
    }
    per_traj.push_back(tape.sum(tape.concat_rows(terms)));
  }
  Var objective = tape.scale(tape.sum(tape.concat_rows(per_traj)),
                             1.0 / static_cast<double>(trajectories.size()));
  tape.backward(objective);
  GradStore grads = tape.grads_for(gen.params);
  if (!grads.all_finite())
    throw TrainingDivergenceError("non-finite policy gradient");
  return grads;
}

GenStepInfo reinforce_step(GenModel& gen, const DiscModel& disc,
                           const TaskSpec& task, const ReinforceConfig& cfg,
                           RngStream& rng) {
  if (cfg.batch_size < 1)
    throw InvalidInputError("batch size must be positive");
  if (cfg.rollout_count < 0)
    throw InvalidInputError("rollout count must be non-negative");
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr))
    throw InvalidInputError("learning rate must be finite and non-negative");
  std::vector<Trajectory> trajectories;
  trajectories.reserve(static_cast<std::size_t>(cfg.batch_size));
  for (int i = 0; i < cfg.batch_size; ++i) {
    Trajectory traj;
    traj.sequence = sample_response(gen, task.sample_prompt(rng), rng);
    traj.step_log_probs = step_log_probs(gen, traj.sequence);
    traj.step_rewards = assign_rewards(gen, disc, traj.sequence, cfg, rng);
    traj.reward_to_go = reward_to_go(traj.step_rewards);
    trajectories.push_back(std::move(traj));
  }
  GradStore grads = estimate_gradient(gen, trajectories);
  gen.params.axpy(cfg.lr, grads);
  if (gen.params.max_abs_value() > kParamMagnitudeGuard)
    throw TrainingDivergenceError("parameter magnitude exceeded guard");
  GenStepInfo info;
  double objective = 0.0;
  for (const Trajectory& traj : trajectories) {
    info.reward_mean += traj.reward_to_go.front();
    for (std::size_t t = 0; t < traj.step_log_probs.size(); ++t)
      objective += traj.step_log_probs[t] * traj.reward_to_go[t];
  }
  info.reward_mean /= static_cast<double>(trajectories.size());
  info.loss_g = -objective / static_cast<double>(trajectories.size());
  return info;
}

}  // namespace rlgaf
