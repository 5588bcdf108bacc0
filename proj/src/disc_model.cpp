#include "rlgaf/disc_model.hpp"

#include <cmath>
#include <string>

#include "rlgaf/errors.hpp"
#include "rlgaf/numeric.hpp"

namespace rlgaf {

namespace {

void check_batch(const LabeledBatch& batch, const char* which) {
  if (batch.items.empty())
    throw InvalidInputError(std::string(which) + " batch is empty");
  for (const LabeledItem& item : batch.items)
    if (item.label != 0 && item.label != 1)
      throw InvalidInputError("labels must be 0 or 1");
}

double pooled_score(const DiscModel& disc,
                    const std::vector<Eigen::VectorXd>& hiddens) {
  Eigen::VectorXd pooled;
  if (hiddens.empty()) {
    pooled = Eigen::VectorXd::Zero(disc.dims.hidden);
  } else {
    pooled = hiddens[0];
    for (std::size_t i = 1; i < hiddens.size(); ++i) pooled += hiddens[i];
    pooled *= 1.0 / static_cast<double>(hiddens.size());
  }
  const Matrix& head_w = disc.params.at("head_w");
  const Matrix& head_b = disc.params.at("head_b");
  return (head_w.transpose() * pooled)(0, 0) + head_b(0, 0);
}

Var pooled_score_on_tape(Tape& tape, const BoundParams& bound,
                         const DiscModel& disc, const std::vector<Var>& hiddens) {
  Var pooled;
  if (hiddens.empty()) {
    pooled = tape.constant(Matrix::Zero(disc.dims.hidden, 1));
  } else {
    pooled = hiddens[0];
    for (std::size_t i = 1; i < hiddens.size(); ++i)
      pooled = tape.add(pooled, hiddens[i]);
    pooled = tape.scale(pooled, 1.0 / static_cast<double>(hiddens.size()));
  }
  return tape.add(tape.tmatmul(bound.at("head_w"), pooled), bound.at("head_b"));
}

}  // namespace

DiscModel make_disc_model(const ModelDims& dims, Arch arch, RngStream& rng) {
  if (dims.vocab < 2 || dims.embed < 1 || dims.hidden < 1 ||
      dims.max_response < 1 || dims.max_prompt < 0)
    throw InvalidInputError("model dimensions must be positive");
  DiscModel disc;
  disc.dims = dims;
  disc.arch = arch;
  backbone::add_params(disc.params, dims, arch, rng);
  const auto h = static_cast<uint32_t>(dims.hidden);
  disc.params.add_uniform("head_w", {h}, rng, -0.1, 0.1);
  disc.params.add_uniform("head_b", {1u}, rng, -0.1, 0.1);
  return disc;
}

double score(const DiscModel& disc, const Sequence& seq) {
  validate_sequence(disc.dims, seq);
  backbone::Encoder enc(disc.params, disc.dims, disc.arch);
  for (int t : seq.prompt) enc.consume(t);
  std::vector<Eigen::VectorXd> hiddens;
  hiddens.reserve(seq.response.size());
  for (int t : seq.response) {
    enc.consume(t);
    hiddens.push_back(enc.hidden());
  }
  return pooled_score(disc, hiddens);
}

Var score_on_tape(Tape& tape, const BoundParams& bound, const DiscModel& disc,
                  const Sequence& seq) {
  validate_sequence(disc.dims, seq);
  backbone::TapeEncoder enc(tape, bound, disc.dims, disc.arch);
  for (int t : seq.prompt) enc.consume_token(t);
  std::vector<Var> hiddens;
  hiddens.reserve(seq.response.size());
  for (int t : seq.response) {
    enc.consume_token(t);
    hiddens.push_back(enc.hidden());
  }
  return pooled_score_on_tape(tape, bound, disc, hiddens);
}

Var score_relaxed(Tape& tape, const BoundParams& bound, const DiscModel& disc,
                  const std::vector<int>& prompt,
                  const std::vector<Var>& response_weights) {
  validate_prompt(disc.dims, prompt);
  if (static_cast<int>(response_weights.size()) > disc.dims.max_response)
    throw InvalidInputError("response longer than " +
                            std::to_string(disc.dims.max_response) + " tokens");
  backbone::TapeEncoder enc(tape, bound, disc.dims, disc.arch);
  for (int t : prompt) enc.consume_token(t);
  std::vector<Var> hiddens;
  hiddens.reserve(response_weights.size());
  for (Var w : response_weights) {
    enc.consume_soft(w);
    hiddens.push_back(enc.hidden());
  }
  return pooled_score_on_tape(tape, bound, disc, hiddens);
}

std::tuple<double, double, double> disc_loss(const DiscModel& disc,
                                             const LabeledBatch& real_batch,
                                             const LabeledBatch& fake_batch) {
  check_batch(real_batch, "real");
  check_batch(fake_batch, "fake");
  double loss_real = 0.0;
  for (const LabeledItem& item : real_batch.items)
    loss_real += bce_with_logits(score(disc, item.seq), 1);
  loss_real /= static_cast<double>(real_batch.items.size());
  double loss_fake = 0.0;
  for (const LabeledItem& item : fake_batch.items)
    loss_fake += bce_with_logits(score(disc, item.seq), 0);
  loss_fake /= static_cast<double>(fake_batch.items.size());
  return {(loss_real + loss_fake) / 2.0, loss_real, loss_fake};
}

std::tuple<double, double, double> disc_update(DiscModel& disc,
                                               const LabeledBatch& real_batch,
                                               const LabeledBatch& fake_batch,
                                               double lr) {
  check_batch(real_batch, "real");
  check_batch(fake_batch, "fake");
  if (!(lr >= 0.0) || !std::isfinite(lr))
    throw InvalidInputError("learning rate must be finite and non-negative");
  Tape tape;
  BoundParams bound = bind_params(tape, disc.params);
  std::vector<Var> real_losses, fake_losses;
  for (const LabeledItem& item : real_batch.items)
    real_losses.push_back(
        tape.bce_with_logits(score_on_tape(tape, bound, disc, item.seq), 1));
  for (const LabeledItem& item : fake_batch.items)
    fake_losses.push_back(
        tape.bce_with_logits(score_on_tape(tape, bound, disc, item.seq), 0));
  Var loss_real = tape.mean(tape.concat_rows(real_losses));
  Var loss_fake = tape.mean(tape.concat_rows(fake_losses));
  Var total = tape.scale(tape.add(loss_real, loss_fake), 0.5);
  tape.backward(total);
  GradStore grads = tape.grads_for(disc.params);
  if (!grads.all_finite())
    throw TrainingDivergenceError("non-finite discriminator gradient");
  disc.params.axpy(-lr, grads);
  return {tape.scalar_value(total), tape.scalar_value(loss_real),
          tape.scalar_value(loss_fake)};
}

double accuracy(const DiscModel& disc, const LabeledBatch& batch) {
  check_batch(batch, "accuracy");
  int correct = 0;
  for (const LabeledItem& item : batch.items) {
    const double p = sigmoid(score(disc, item.seq));
    const int predicted = p > 0.5 ? 1 : 0;
    if (predicted == item.label) ++correct;
  }
  return static_cast<double>(correct) /
         static_cast<double>(batch.items.size());
}

}  // namespace rlgaf
