#pragma once

#include <Eigen/Core>
#include <vector>

#include "rlgaf/disc_model.hpp"
#include "rlgaf/gen_model.hpp"
#include "rlgaf/reinforce.hpp"

namespace rlgaf {

// Relaxed one-hot token: positive weights summing to 1 over the vocabulary.
struct RelaxedToken {
  Eigen::VectorXd weights;
};

struct GumbelConfig {
  double temperature = 1.0;
  bool straight_through = false;  // hard one-hot forward, soft backward
  bool anneal = false;            // temperature *= 0.995 after each step
  double lr = 0.05;
  int steps = 200;  // step budget for loop-level runs
};

RelaxedToken gumbel_softmax_sample(const Eigen::VectorXd& logits, double tau,
                                   RngStream& rng);

// weights^T * embedding; an exact one-hot reproduces the embedding row
// bit-for-bit with a lookup.
Eigen::VectorXd onehot_embed(const RelaxedToken& relaxed,
                             const Matrix& embedding);

// One fully differentiable generator update: relaxed responses are generated
// token-by-token, scored by the discriminator through the one-hot-matmul
// embedding, and the generator descends the BCE toward the "real" label. The
// discriminator participates in the graph but its parameters never change.
GenStepInfo gumbel_generator_step(GenModel& gen, const DiscModel& disc,
                                  const std::vector<std::vector<int>>& prompts,
                                  GumbelConfig& cfg, RngStream& rng);

}  // namespace rlgaf
