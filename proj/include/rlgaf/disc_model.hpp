#pragma once

#include <tuple>
#include <vector>

#include "rlgaf/backbone.hpp"
#include "rlgaf/param_store.hpp"
#include "rlgaf/rng.hpp"
#include "rlgaf/sequence.hpp"
#include "rlgaf/tape.hpp"

namespace rlgaf {

// Classifier over (prompt, response) pairs: the shared backbone encodes the
// pair, hidden states at response positions are mean-pooled, and a linear
// head yields a score whose sigmoid is the probability the pair is real.
struct DiscModel {
  ModelDims dims;
  Arch arch = Arch::RecurrentCell;
  ParamStore params;
};

struct LabeledItem {
  Sequence seq;
  int label = 0;  // 1 = real demonstration, 0 = generated
};

struct LabeledBatch {
  std::vector<LabeledItem> items;
  int provenance_round = -1;  // adversarial round that produced the fakes
};

DiscModel make_disc_model(const ModelDims& dims, Arch arch, RngStream& rng);

double score(const DiscModel& disc, const Sequence& seq);

Var score_on_tape(Tape& tape, const BoundParams& bound, const DiscModel& disc,
                  const Sequence& seq);

// Score where each response position is a V x 1 weight vector instead of a
// token id (relaxed inputs from the differentiable sampling path).
Var score_relaxed(Tape& tape, const BoundParams& bound, const DiscModel& disc,
                  const std::vector<int>& prompt,
                  const std::vector<Var>& response_weights);

// (loss_total, loss_d_real, loss_d_fake); fake inputs carry no gradient
// linkage back to the generator because they enter as plain token ids.
std::tuple<double, double, double> disc_loss(const DiscModel& disc,
                                             const LabeledBatch& real_batch,
                                             const LabeledBatch& fake_batch);

// One gradient-descent step on loss_total, in place.
std::tuple<double, double, double> disc_update(DiscModel& disc,
                                               const LabeledBatch& real_batch,
                                               const LabeledBatch& fake_batch,
                                               double lr);

double accuracy(const DiscModel& disc, const LabeledBatch& batch);

}  // namespace rlgaf
