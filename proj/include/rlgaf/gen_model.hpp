#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>

#include "rlgaf/backbone.hpp"
#include "rlgaf/param_store.hpp"
#include "rlgaf/rng.hpp"
#include "rlgaf/sequence.hpp"
#include "rlgaf/tape.hpp"

namespace rlgaf {

// Autoregressive policy: embedding -> backbone -> projection to vocab logits.
// When `terminator` is set (default: last vocabulary id), sampling and greedy
// decoding stop after emitting it; otherwise responses run to max_response.
struct GenModel {
  ModelDims dims;
  Arch arch = Arch::RecurrentCell;
  std::optional<int> terminator;
  ParamStore params;
};

GenModel make_gen_model(const ModelDims& dims, Arch arch, RngStream& rng,
                        bool with_terminator = true);

Eigen::VectorXd next_token_logits(const GenModel& model,
                                  std::span<const int> prefix);

Sequence sample_response(const GenModel& model, const std::vector<int>& prompt,
                         RngStream& rng, double temperature = 1.0);

// Resume sampling from a partially generated response. Returns the partial
// sequence unchanged if it already ended (terminator emitted or length cap).
Sequence continue_response(const GenModel& model,
                           const std::vector<int>& prompt,
                           const std::vector<int>& partial_response,
                           RngStream& rng, double temperature = 1.0);

Sequence greedy_decode(const GenModel& model, const std::vector<int>& prompt);

double log_prob(const GenModel& model, const Sequence& seq);

// Per-step log probabilities log pi(a_t | s_t); sums to log_prob(seq).
std::vector<double> step_log_probs(const GenModel& model, const Sequence& seq);

// log_prob as a tape node, for gradient-based trainers. `bound` must hold the
// generator's tensors (bind_params for trainable, bind_constants for frozen).
Var log_prob_on_tape(Tape& tape, const BoundParams& bound,
                     const GenModel& model, const Sequence& seq);

// Vocabulary logits for the state after `encoder` consumed a prefix.
Var logits_on_tape(Tape& tape, const BoundParams& bound,
                   const backbone::TapeEncoder& encoder);

void validate_prompt(const GenModel& model, const std::vector<int>& prompt);
void validate_sequence(const GenModel& model, const Sequence& seq);

}  // namespace rlgaf
