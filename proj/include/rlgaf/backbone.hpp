#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rlgaf/param_store.hpp"
#include "rlgaf/sequence.hpp"
#include "rlgaf/tape.hpp"

namespace rlgaf {

enum class Arch { RecurrentCell, AttentionBlock };

std::string arch_name(Arch arch);
Arch arch_from_name(const std::string& name);

struct ModelDims {
  int vocab = 32;
  int embed = 16;
  int hidden = 32;
  int max_response = 16;
  int max_prompt = 16;

  int max_positions() const { return max_prompt + max_response; }
  bool operator==(const ModelDims&) const = default;
};

// Tape nodes for a ParamStore, one Var per named tensor.
struct BoundParams {
  std::map<std::string, Var> vars;
  Var at(const std::string& name) const;
};

BoundParams bind_params(Tape& tape, const ParamStore& params);     // leaves
BoundParams bind_constants(Tape& tape, const ParamStore& params);  // no grad

void validate_token(int token, int vocab);
void validate_prompt(const ModelDims& dims, const std::vector<int>& prompt);
void validate_sequence(const ModelDims& dims, const Sequence& seq);

// Token encoder shared by the generator and the discriminator: embedding
// followed by either a tanh recurrent cell or a single causal attention
// block, producing one hidden vector per consumed position. The plain and
// tape variants perform the same operations in the same order so their
// outputs agree bit for bit.
namespace backbone {

// Adds the backbone tensors ("embed", cell or attention weights) to `params`,
// initialized uniformly in [-0.1, 0.1].
void add_params(ParamStore& params, const ModelDims& dims, Arch arch,
                RngStream& rng);

class Encoder {
 public:
  Encoder(const ParamStore& params, const ModelDims& dims, Arch arch);

  void consume(int token);
  // Hidden representation after everything consumed so far (initial state if
  // nothing was consumed yet).
  const Eigen::VectorXd& hidden() const { return hidden_; }
  int consumed() const { return consumed_; }

 private:
  const ParamStore& params_;
  ModelDims dims_;
  Arch arch_;
  int consumed_ = 0;
  Eigen::VectorXd hidden_;
  Matrix inputs_;  // attention only: consumed position embeddings, d x n

  void refresh_attention();
};

class TapeEncoder {
 public:
  TapeEncoder(Tape& tape, const BoundParams& bound, const ModelDims& dims,
              Arch arch);

  void consume_token(int token);
  // Consume a V x 1 weight vector (exact one-hot or relaxed token); the
  // embedding lookup becomes a one-hot matrix multiply.
  void consume_soft(Var weights);
  Var hidden() const { return hidden_; }
  int consumed() const { return consumed_; }

 private:
  Tape& tape_;
  const BoundParams& bound_;
  ModelDims dims_;
  Arch arch_;
  int consumed_ = 0;
  Var hidden_;
  std::vector<Var> inputs_;  // attention only

  void consume_embedded(Var embedded);
};

}  // namespace backbone
}  // namespace rlgaf
