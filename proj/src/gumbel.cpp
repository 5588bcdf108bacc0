#include "rlgaf/gumbel.hpp"

#include <cmath>

#include "rlgaf/errors.hpp"
#include "rlgaf/numeric.hpp"

namespace rlgaf {

RelaxedToken gumbel_softmax_sample(const Eigen::VectorXd& logits, double tau,
                                   RngStream& rng) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw InvalidInputError("temperature must be positive");
  if (logits.size() == 0 || !logits.allFinite())
    throw InvalidInputError("logits must be non-empty and finite");
  Eigen::VectorXd noisy(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    noisy(i) = logits(i) + rng.next_gumbel();
  RelaxedToken out;
  out.weights = softmax(noisy * (1.0 / tau));
  return out;
}

Eigen::VectorXd onehot_embed(const RelaxedToken& relaxed,
                             const Matrix& embedding) {
  if (relaxed.weights.size() != embedding.rows())
    throw InvalidInputError("relaxed token length does not match embedding");
  return embedding.transpose() * relaxed.weights;
}

GenStepInfo gumbel_generator_step(GenModel& gen, const DiscModel& disc,
                                  const std::vector<std::vector<int>>& prompts,
                                  GumbelConfig& cfg, RngStream& rng) {
  if (prompts.empty()) throw InvalidInputError("no prompts");
  if (!(cfg.temperature > 0.0) || !std::isfinite(cfg.temperature))
    throw InvalidInputError("temperature must be positive");
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr))
    throw InvalidInputError("learning rate must be finite and non-negative");
  if (gen.dims.vocab != disc.dims.vocab)
    throw InvalidTokenError("generator and discriminator vocabularies differ");

  Tape tape;
  BoundParams gen_bound = bind_params(tape, gen.params);
  BoundParams disc_bound = bind_constants(tape, disc.params);
  std::vector<Var> losses;
  std::vector<Var> sigmoids;
  for (const std::vector<int>& prompt : prompts) {
    validate_prompt(gen.dims, prompt);
    backbone::TapeEncoder enc(tape, gen_bound, gen.dims, gen.arch);
    for (int t : prompt) enc.consume_token(t);
    std::vector<Var> relaxed;
    while (static_cast<int>(relaxed.size()) < gen.dims.max_response) {
      Var logits = logits_on_tape(tape, gen_bound, enc);
      Matrix noise(gen.dims.vocab, 1);
      for (Eigen::Index i = 0; i < noise.rows(); ++i)
        noise(i, 0) = rng.next_gumbel();
      Var noisy = tape.add(logits, tape.constant(std::move(noise)));
      Var token = tape.softmax(tape.scale(noisy, 1.0 / cfg.temperature));
      if (cfg.straight_through) token = tape.hard_onehot(token);
      relaxed.push_back(token);
      Eigen::Index argmax = 0;
      tape.value(token).col(0).maxCoeff(&argmax);
      const bool ended =
          gen.terminator && static_cast<int>(argmax) == *gen.terminator;
      if (ended) break;
      if (static_cast<int>(relaxed.size()) < gen.dims.max_response)
        enc.consume_soft(token);
    }
    Var disc_score = score_relaxed(tape, disc_bound, disc, prompt, relaxed);
    losses.push_back(tape.bce_with_logits(disc_score, 1));
    sigmoids.push_back(tape.sigmoid(disc_score));
  }
  Var loss = tape.mean(tape.concat_rows(losses));
  Var reward = tape.mean(tape.concat_rows(sigmoids));
  tape.backward(loss);
  GradStore grads = tape.grads_for(gen.params);
  if (!grads.all_finite())
    throw TrainingDivergenceError("non-finite generator gradient");
  gen.params.axpy(-cfg.lr, grads);
  if (gen.params.max_abs_value() > kParamMagnitudeGuard)
    throw TrainingDivergenceError("parameter magnitude exceeded guard");

  GenStepInfo info;
  info.loss_g = tape.scalar_value(loss);
  info.reward_mean = tape.scalar_value(reward);
  if (cfg.anneal) cfg.temperature *= 0.995;
  return info;
}

}  // namespace rlgaf
