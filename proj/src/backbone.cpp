#include "rlgaf/backbone.hpp"

#include <cmath>

#include "rlgaf/errors.hpp"
#include "rlgaf/numeric.hpp"

namespace rlgaf {

std::string arch_name(Arch arch) {
  return arch == Arch::RecurrentCell ? "recurrent-cell" : "attention-block";
}

Arch arch_from_name(const std::string& name) {
  if (name == "recurrent-cell") return Arch::RecurrentCell;
  if (name == "attention-block") return Arch::AttentionBlock;
  throw InvalidInputError("unknown architecture '" + name + "'");
}

Var BoundParams::at(const std::string& name) const {
  auto it = vars.find(name);
  if (it == vars.end())
    throw StructuralError("no bound tensor named '" + name + "'");
  return it->second;
}

namespace {

BoundParams bind(Tape& tape, const ParamStore& params, bool differentiable) {
  BoundParams bound;
  for (const auto& [name, entry] : params) {
    bound.vars[name] = differentiable ? tape.param(name, entry.values)
                                      : tape.constant(entry.values);
  }
  return bound;
}

}  // namespace

BoundParams bind_params(Tape& tape, const ParamStore& params) {
  return bind(tape, params, true);
}

BoundParams bind_constants(Tape& tape, const ParamStore& params) {
  return bind(tape, params, false);
}

void validate_token(int token, int vocab) {
  if (token < 0 || token >= vocab)
    throw InvalidTokenError("token id " + std::to_string(token) +
                            " outside vocabulary of size " +
                            std::to_string(vocab));
}

void validate_prompt(const ModelDims& dims, const std::vector<int>& prompt) {
  if (static_cast<int>(prompt.size()) > dims.max_prompt)
    throw InvalidInputError("prompt longer than " +
                            std::to_string(dims.max_prompt) + " tokens");
  for (int t : prompt) validate_token(t, dims.vocab);
}

void validate_sequence(const ModelDims& dims, const Sequence& seq) {
  validate_prompt(dims, seq.prompt);
  if (static_cast<int>(seq.response.size()) > dims.max_response)
    throw InvalidInputError("response longer than " +
                            std::to_string(dims.max_response) + " tokens");
  for (int t : seq.response) validate_token(t, dims.vocab);
}

namespace backbone {

void add_params(ParamStore& params, const ModelDims& dims, Arch arch,
                RngStream& rng) {
  const auto d = static_cast<uint32_t>(dims.embed);
  const auto h = static_cast<uint32_t>(dims.hidden);
  const auto v = static_cast<uint32_t>(dims.vocab);
  const double lim = 0.1;
  params.add_uniform("embed", {v, d}, rng, -lim, lim);
  if (arch == Arch::RecurrentCell) {
    params.add_uniform("cell_wx", {h, d}, rng, -lim, lim);
    params.add_uniform("cell_wh", {h, h}, rng, -lim, lim);
    params.add_uniform("cell_b", {h}, rng, -lim, lim);
  } else {
    const auto p = static_cast<uint32_t>(dims.max_positions());
    params.add_uniform("pos", {p, d}, rng, -lim, lim);
    params.add_uniform("attn_wq", {d, d}, rng, -lim, lim);
    params.add_uniform("attn_wk", {d, d}, rng, -lim, lim);
    params.add_uniform("attn_wv", {d, d}, rng, -lim, lim);
    params.add_uniform("ff_w", {h, d}, rng, -lim, lim);
    params.add_uniform("ff_b", {h}, rng, -lim, lim);
  }
}

Encoder::Encoder(const ParamStore& params, const ModelDims& dims, Arch arch)
    : params_(params), dims_(dims), arch_(arch) {
  hidden_ = Eigen::VectorXd::Zero(dims_.hidden);
  if (arch_ == Arch::AttentionBlock) inputs_.resize(dims_.embed, 0);
}

void Encoder::consume(int token) {
  if (token < 0 || token >= dims_.vocab)
    throw InvalidTokenError("token id " + std::to_string(token) +
                            " outside vocabulary of size " +
                            std::to_string(dims_.vocab));
  Eigen::VectorXd embedded =
      params_.at("embed").row(token).transpose();
  if (arch_ == Arch::RecurrentCell) {
    const Matrix& wx = params_.at("cell_wx");
    const Matrix& wh = params_.at("cell_wh");
    const Matrix& b = params_.at("cell_b");
    // materialized step by step to match the tape path bit for bit
    const Eigen::VectorXd from_input = wx * embedded;
    const Eigen::VectorXd from_state = wh * hidden_;
    const Eigen::VectorXd pre = (from_input + from_state) + b.col(0);
    hidden_ = pre.array().tanh();
    ++consumed_;
    return;
  }
  if (consumed_ >= dims_.max_positions())
    throw InvalidInputError("prefix longer than " +
                            std::to_string(dims_.max_positions()) +
                            " positions");
  embedded += params_.at("pos").row(consumed_).transpose();
  inputs_.conservativeResize(Eigen::NoChange, consumed_ + 1);
  inputs_.col(consumed_) = embedded;
  ++consumed_;
  refresh_attention();
}

void Encoder::refresh_attention() {
  const Matrix& wq = params_.at("attn_wq");
  const Matrix& wk = params_.at("attn_wk");
  const Matrix& wv = params_.at("attn_wv");
  const Matrix& ff_w = params_.at("ff_w");
  const Matrix& ff_b = params_.at("ff_b");
  const Eigen::VectorXd q = wq * inputs_.col(consumed_ - 1);
  const Matrix keys = wk * inputs_;
  const Matrix values = wv * inputs_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dims_.embed));
  const Eigen::VectorXd raw_scores = keys.transpose() * q;
  const Eigen::VectorXd scores = raw_scores * scale;
  const Eigen::VectorXd attn = softmax(scores);
  const Eigen::VectorXd ctx = values * attn;
  const Eigen::VectorXd pre = (ff_w * ctx) + ff_b.col(0);
  hidden_ = pre.array().tanh();
}

TapeEncoder::TapeEncoder(Tape& tape, const BoundParams& bound,
                         const ModelDims& dims, Arch arch)
    : tape_(tape), bound_(bound), dims_(dims), arch_(arch) {
  hidden_ = tape_.constant(Matrix::Zero(dims_.hidden, 1));
}

void TapeEncoder::consume_token(int token) {
  if (token < 0 || token >= dims_.vocab)
    throw InvalidTokenError("token id " + std::to_string(token) +
                            " outside vocabulary of size " +
                            std::to_string(dims_.vocab));
  consume_embedded(tape_.embedding_row(bound_.at("embed"), token));
}

void TapeEncoder::consume_soft(Var weights) {
  // embed is V x d; weightsᵀ · embed gives the weighted embedding as d x 1.
  consume_embedded(tape_.tmatmul(bound_.at("embed"), weights));
}

void TapeEncoder::consume_embedded(Var embedded) {
  if (arch_ == Arch::RecurrentCell) {
    Var pre = tape_.add(tape_.add(tape_.matmul(bound_.at("cell_wx"), embedded),
                                  tape_.matmul(bound_.at("cell_wh"), hidden_)),
                        bound_.at("cell_b"));
    hidden_ = tape_.tanh(pre);
    ++consumed_;
    return;
  }
  if (consumed_ >= dims_.max_positions())
    throw InvalidInputError("prefix longer than " +
                            std::to_string(dims_.max_positions()) +
                            " positions");
  Var pos_row = tape_.embedding_row(bound_.at("pos"), consumed_);
  inputs_.push_back(tape_.add(embedded, pos_row));
  ++consumed_;
  Var x = tape_.concat_cols(inputs_);
  Var q = tape_.matmul(bound_.at("attn_wq"), inputs_.back());
  Var keys = tape_.matmul(bound_.at("attn_wk"), x);
  Var values = tape_.matmul(bound_.at("attn_wv"), x);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dims_.embed));
  Var scores = tape_.scale(tape_.tmatmul(keys, q), scale);
  Var attn = tape_.softmax(scores);
  Var ctx = tape_.matmul(values, attn);
  hidden_ = tape_.tanh(
      tape_.add(tape_.matmul(bound_.at("ff_w"), ctx), bound_.at("ff_b")));
}

}  // namespace backbone
}  // namespace rlgaf
