#include "rlgaf/gen_model.hpp"

#include <string>

#include "rlgaf/errors.hpp"
#include "rlgaf/numeric.hpp"

namespace rlgaf {

namespace {

Eigen::VectorXd head_logits(const GenModel& model,
                            const Eigen::VectorXd& hidden) {
  const Matrix& w = model.params.at("proj_w");
  const Matrix& b = model.params.at("proj_b");
  const Eigen::VectorXd projected = w * hidden;
  return projected + b.col(0);
}

int draw_token(const GenModel& model, const Eigen::VectorXd& hidden,
               RngStream& rng, double temperature) {
  Eigen::VectorXd logits = head_logits(model, hidden);
  if (temperature != 1.0) {
    if (!(temperature > 0.0))
      throw InvalidInputError("temperature must be positive");
    logits /= temperature;
  }
  return rng.next_categorical(softmax(logits));
}

}  // namespace

GenModel make_gen_model(const ModelDims& dims, Arch arch, RngStream& rng,
                        bool with_terminator) {
  if (dims.vocab < 2 || dims.embed < 1 || dims.hidden < 1 ||
      dims.max_response < 1 || dims.max_prompt < 0)
    throw InvalidInputError("model dimensions must be positive");
  GenModel model;
  model.dims = dims;
  model.arch = arch;
  if (with_terminator) model.terminator = dims.vocab - 1;
  backbone::add_params(model.params, dims, arch, rng);
  const auto v = static_cast<uint32_t>(dims.vocab);
  const auto h = static_cast<uint32_t>(dims.hidden);
  model.params.add_uniform("proj_w", {v, h}, rng, -0.1, 0.1);
  model.params.add_uniform("proj_b", {v}, rng, -0.1, 0.1);
  return model;
}

void validate_prompt(const GenModel& model, const std::vector<int>& prompt) {
  validate_prompt(model.dims, prompt);
}

void validate_sequence(const GenModel& model, const Sequence& seq) {
  validate_sequence(model.dims, seq);
}

Eigen::VectorXd next_token_logits(const GenModel& model,
                                  std::span<const int> prefix) {
  const int cap = model.dims.max_prompt + model.dims.max_response;
  if (static_cast<int>(prefix.size()) > cap)
    throw InvalidInputError("prefix longer than " + std::to_string(cap) +
                            " tokens");
  backbone::Encoder enc(model.params, model.dims, model.arch);
  for (int t : prefix) {
    validate_token(t, model.dims.vocab);
    enc.consume(t);
  }
  return head_logits(model, enc.hidden());
}

Sequence sample_response(const GenModel& model, const std::vector<int>& prompt,
                         RngStream& rng, double temperature) {
  return continue_response(model, prompt, {}, rng, temperature);
}

Sequence continue_response(const GenModel& model,
                           const std::vector<int>& prompt,
                           const std::vector<int>& partial_response,
                           RngStream& rng, double temperature) {
  Sequence seq;
  seq.prompt = prompt;
  seq.response = partial_response;
  validate_sequence(model, seq);
  if (model.terminator && !seq.response.empty() &&
      seq.response.back() == *model.terminator)
    return seq;
  backbone::Encoder enc(model.params, model.dims, model.arch);
  for (int t : prompt) enc.consume(t);
  for (int t : seq.response) enc.consume(t);
  while (static_cast<int>(seq.response.size()) < model.dims.max_response) {
    const int token = draw_token(model, enc.hidden(), rng, temperature);
    seq.response.push_back(token);
    if (model.terminator && token == *model.terminator) break;
    if (static_cast<int>(seq.response.size()) < model.dims.max_response)
      enc.consume(token);
  }
  return seq;
}

Sequence greedy_decode(const GenModel& model, const std::vector<int>& prompt) {
  validate_prompt(model, prompt);
  backbone::Encoder enc(model.params, model.dims, model.arch);
  for (int t : prompt) enc.consume(t);
  Sequence seq;
  seq.prompt = prompt;
  while (static_cast<int>(seq.response.size()) < model.dims.max_response) {
    const Eigen::VectorXd logits = head_logits(model, enc.hidden());
    Eigen::Index best = 0;
    logits.maxCoeff(&best);  // first maximum, so ties pick the lowest id
    const int token = static_cast<int>(best);
    seq.response.push_back(token);
    if (model.terminator && token == *model.terminator) break;
    enc.consume(token);
  }
  return seq;
}

double log_prob(const GenModel& model, const Sequence& seq) {
  double total = 0.0;
  for (double lp : step_log_probs(model, seq)) total += lp;
  return total;
}

std::vector<double> step_log_probs(const GenModel& model, const Sequence& seq) {
  validate_sequence(model, seq);
  backbone::Encoder enc(model.params, model.dims, model.arch);
  for (int t : seq.prompt) enc.consume(t);
  std::vector<double> out;
  out.reserve(seq.response.size());
  for (std::size_t i = 0; i < seq.response.size(); ++i) {
    const Eigen::VectorXd logits = head_logits(model, enc.hidden());
    const Eigen::VectorXd lsm = log_softmax(logits);
    out.push_back(lsm(seq.response[i]));
    if (i + 1 < seq.response.size()) enc.consume(seq.response[i]);
  }
  return out;
}

Var logits_on_tape(Tape& tape, const BoundParams& bound,
                   const backbone::TapeEncoder& encoder) {
  return tape.add(tape.matmul(bound.at("proj_w"), encoder.hidden()),
                  bound.at("proj_b"));
}

Var log_prob_on_tape(Tape& tape, const BoundParams& bound,
                     const GenModel& model, const Sequence& seq) {
  validate_sequence(model, seq);
  backbone::TapeEncoder enc(tape, bound, model.dims, model.arch);
  for (int t : seq.prompt) enc.consume_token(t);
  std::vector<Var> terms;
  for (std::size_t i = 0; i < seq.response.size(); ++i) {
    Var lsm = tape.log_softmax(logits_on_tape(tape, bound, enc));
    terms.push_back(tape.pick(lsm, seq.response[i]));
    if (i + 1 < seq.response.size()) enc.consume_token(seq.response[i]);
  }
  if (terms.empty()) return tape.scalar(0.0);
  return tape.sum(tape.concat_rows(terms));
}

}  // namespace rlgaf
