#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "rlgaf/backbone.hpp"
#include "rlgaf/errors.hpp"
#include "rlgaf/rng.hpp"
#include "rlgaf/tape.hpp"

using namespace rlgaf;

namespace {

ParamStore make_params(const ModelDims& dims, Arch arch, std::uint64_t seed) {
  RngFactory factory(seed);
  RngStream rng = factory.stream("model-init");
  ParamStore params;
  backbone::add_params(params, dims, arch, rng);
  return params;
}

Var onehot_const(Tape& tape, int vocab, int token) {
  Matrix w = Matrix::Zero(vocab, 1);
  w(token, 0) = 1.0;
  return tape.constant(w);
}

}  // namespace

TEST_CASE("arch names round trip") {
  CHECK(arch_from_name(arch_name(Arch::RecurrentCell)) == Arch::RecurrentCell);
  CHECK(arch_from_name(arch_name(Arch::AttentionBlock)) == Arch::AttentionBlock);
  CHECK_THROWS_AS((void)arch_from_name("perceptron"), InvalidInputError);
}

TEST_CASE("plain and tape encoders agree bit for bit") {
  ModelDims dims;
  dims.vocab = 8;
  dims.embed = 5;
  dims.hidden = 6;
  dims.max_prompt = 8;
  dims.max_response = 8;
  const std::vector<int> tokens = {3, 1, 7, 0, 2, 2, 5};
  for (Arch arch : {Arch::RecurrentCell, Arch::AttentionBlock}) {
    CAPTURE(arch_name(arch));
    const ParamStore params = make_params(dims, arch, 99);
    backbone::Encoder plain(params, dims, arch);
    Tape tape;
    const BoundParams bound = bind_params(tape, params);
    backbone::TapeEncoder taped(tape, bound, dims, arch);
    for (int token : tokens) {
      plain.consume(token);
      taped.consume_token(token);
      const Matrix& th = tape.value(taped.hidden());
      REQUIRE(th.rows() == dims.hidden);
      CHECK((plain.hidden() - th.col(0)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("consume_soft with an exact one-hot equals the token path bitwise") {
  ModelDims dims;
  dims.vocab = 6;
  dims.embed = 4;
  dims.hidden = 5;
  const std::vector<int> tokens = {2, 5, 0, 4};
  for (Arch arch : {Arch::RecurrentCell, Arch::AttentionBlock}) {
    CAPTURE(arch_name(arch));
    const ParamStore params = make_params(dims, arch, 123);
    Tape tape;
    const BoundParams bound = bind_params(tape, params);
    backbone::TapeEncoder hard(tape, bound, dims, arch);
    backbone::TapeEncoder soft(tape, bound, dims, arch);
    for (int token : tokens) {
      hard.consume_token(token);
      soft.consume_soft(onehot_const(tape, dims.vocab, token));
      CHECK((tape.value(hard.hidden()) - tape.value(soft.hidden()))
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("zero parameters give a zero hidden state") {
  ModelDims dims;
  dims.vocab = 4;
  dims.embed = 3;
  dims.hidden = 3;
  ParamStore params = make_params(dims, Arch::RecurrentCell, 7);
  params.set_all_zero();
  backbone::Encoder enc(params, dims, Arch::RecurrentCell);
  enc.consume(1);
  enc.consume(2);
  CHECK(enc.hidden().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encoders are deterministic") {
  ModelDims dims;
  dims.vocab = 8;
  dims.embed = 4;
  dims.hidden = 4;
  const ParamStore params = make_params(dims, Arch::AttentionBlock, 5);
  backbone::Encoder a(params, dims, Arch::AttentionBlock);
  backbone::Encoder b(params, dims, Arch::AttentionBlock);
  for (int token : {1, 2, 3}) {
    a.consume(token);
    b.consume(token);
  }
  CHECK((a.hidden() - b.hidden()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("token validation rejects out-of-vocabulary ids") {
  ModelDims dims;
  dims.vocab = 4;
  const ParamStore params = make_params(dims, Arch::RecurrentCell, 1);
  backbone::Encoder enc(params, dims, Arch::RecurrentCell);
  CHECK_THROWS_AS(enc.consume(4), InvalidTokenError);
  CHECK_THROWS_AS(enc.consume(-1), InvalidTokenError);
  CHECK_THROWS_AS(validate_token(9, 4), InvalidTokenError);
  CHECK_NOTHROW(validate_token(3, 4));
}

TEST_CASE("prompt and sequence validation enforce the length caps") {
  ModelDims dims;
  dims.vocab = 4;
  dims.max_prompt = 3;
  dims.max_response = 2;
  CHECK_NOTHROW(validate_prompt(dims, {0, 1, 2}));
  CHECK_THROWS_AS(validate_prompt(dims, {0, 1, 2, 3}), InvalidInputError);
  Sequence seq;
  seq.prompt = {0, 1};
  seq.response = {2, 3};
  CHECK_NOTHROW(validate_sequence(dims, seq));
  seq.response = {2, 3, 1};
  CHECK_THROWS_AS(validate_sequence(dims, seq), InvalidInputError);
  seq.response = {9};
  CHECK_THROWS_AS(validate_sequence(dims, seq), InvalidTokenError);
}

TEST_CASE("attention encoder rejects prefixes beyond its position table") {
  ModelDims dims;
  dims.vocab = 4;
  dims.embed = 3;
  dims.hidden = 3;
  dims.max_prompt = 2;
  dims.max_response = 2;
  const ParamStore params = make_params(dims, Arch::AttentionBlock, 3);
  backbone::Encoder enc(params, dims, Arch::AttentionBlock);
  for (int i = 0; i < dims.max_positions(); ++i) enc.consume(1);
  CHECK_THROWS_AS(enc.consume(1), InvalidInputError);
}

TEST_CASE("bound params expose every tensor and reject unknown names") {
  ModelDims dims;
  const ParamStore params = make_params(dims, Arch::RecurrentCell, 11);
  Tape tape;
  const BoundParams bound = bind_params(tape, params);
  for (const auto& [name, entry] : params)
    CHECK((tape.value(bound.at(name)) - entry.values).cwiseAbs().maxCoeff() ==
          0.0);
  CHECK_THROWS_AS((void)bound.at("nope"), StructuralError);
}
