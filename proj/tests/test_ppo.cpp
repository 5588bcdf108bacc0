#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rlgaf/errors.hpp"
#include "rlgaf/finite_diff.hpp"
#include "rlgaf/numeric.hpp"
#include "rlgaf/ppo.hpp"

using namespace rlgaf;

namespace {

GenModel bandit_model(std::uint64_t seed, int max_response = 1) {
  ModelDims dims;
  dims.vocab = 4;
  dims.embed = 3;
  dims.hidden = 4;
  dims.max_response = max_response;
  dims.max_prompt = 2;
  RngFactory factory(seed);
  RngStream rng = factory.stream("model-init");
  return make_gen_model(dims, Arch::RecurrentCell, rng, false);
}

DiscModel favoring_disc(int vocab, int favored) {
  ModelDims dims;
  dims.vocab = vocab;
  dims.embed = 1;
  dims.hidden = 1;
  dims.max_response = 8;
  dims.max_prompt = 8;
  RngFactory factory(99);
  RngStream rng = factory.stream("model-init");
  DiscModel disc = make_disc_model(dims, Arch::RecurrentCell, rng);
  disc.params.set_all_zero();
  for (int v = 0; v < vocab; ++v)
    disc.params.at("embed")(v, 0) = v == favored ? 1.0 : -1.0;
  disc.params.at("cell_wx")(0, 0) = 100.0;
  disc.params.at("head_w")(0, 0) = 50.0;
  return disc;
}

TaskSpec fixed_prompt_task() {
  TaskSpec task;
  task.sample_prompt = [](RngStream&) { return std::vector<int>{0}; };
  return task;
}

}  // namespace

TEST_CASE("the advantage baseline is seeded by its first batch") {
  BaselineState baseline;
  const double first = baseline.observe_batch_mean(3.0);
  CHECK(first == 3.0);  // reported value predates the EMA update
  const double decay = baseline.decay;
  const double v1 = decay * 3.0 + (1.0 - decay) * 3.0;
  const double second = baseline.observe_batch_mean(5.0);
  CHECK(second == v1);
  CHECK(baseline.value == decay * v1 + (1.0 - decay) * 5.0);
  CHECK(baseline.initialized);
}

TEST_CASE("identical policies have exactly zero divergence") {
  const GenModel gen = bandit_model(1, 3);
  const Sequence seq{{0}, {1, 2, 3}};
  CHECK(sequence_kl(gen, gen.params, seq) == 0.0);
}

TEST_CASE("divergence of a deterministic policy from uniform is T log V") {
  ModelDims dims;
  dims.vocab = 5;
  dims.embed = 2;
  dims.hidden = 3;
  dims.max_response = 3;
  dims.max_prompt = 2;
  RngFactory factory(3);
  RngStream rng = factory.stream("model-init");
  GenModel gen = make_gen_model(dims, Arch::RecurrentCell, rng, false);
  gen.params.set_all_zero();
  const ParamStore uniform_ref = gen.params;
  gen.params.at("proj_b")(2, 0) = 1e6;  // always emits token 2
  const Sequence seq{{0}, {2, 2, 2}};
  CHECK(sequence_kl(gen, uniform_ref, seq) ==
        doctest::Approx(3.0 * std::log(5.0)).epsilon(1e-9));
}

TEST_CASE("swapping policy and reference negates the divergence") {
  GenModel gen = bandit_model(5, 3);
  const GenModel other = bandit_model(6, 3);
  const Sequence seq{{1}, {0, 3, 2}};
  const double forward = sequence_kl(gen, other.params, seq);
  GenModel swapped = gen;
  swapped.params = other.params;
  CHECK(sequence_kl(swapped, gen.params, seq) == -forward);
  CHECK(forward == log_prob(gen, seq) - log_prob(other, seq));
}

TEST_CASE("divergence rejects incongruent references") {
  const GenModel gen = bandit_model(7);
  const GenModel wider = [] {
    ModelDims dims;
    dims.vocab = 4;
    dims.embed = 3;
    dims.hidden = 6;
    dims.max_response = 1;
    dims.max_prompt = 2;
    RngFactory factory(8);
    RngStream rng = factory.stream("model-init");
    return make_gen_model(dims, Arch::RecurrentCell, rng, false);
  }();
  CHECK_THROWS_AS((void)sequence_kl(gen, wider.params, {{0}, {1}}),
                  InvalidInputError);
}

TEST_CASE("objective combines reward, divergence penalty, and retention") {
  PPOConfig cfg;
  cfg.beta = 0.2;
  cfg.gamma = 0.0;
  CHECK(ppo_objective_value(1.0, 0.5, 0.0, cfg) ==
        doctest::Approx(0.9).epsilon(1e-15));
  cfg.beta = 0.0;
  CHECK(ppo_objective_value(0.75, 123.0, 0.0, cfg) == 0.75);
  cfg.gamma = 0.5;
  CHECK(ppo_objective_value(0.75, 0.0, -2.0, cfg) ==
        doctest::Approx(-0.25).epsilon(1e-15));
  CHECK_THROWS_AS(
      (void)ppo_objective_value(std::nan(""), 0.0, 0.0, cfg),
      InvalidInputError);
}

TEST_CASE("importance ratios clip to the trust band") {
  CHECK(clip_ratio(1.0, 0.2) == 1.0);
  CHECK(clip_ratio(5.0, 0.2) == 1.2);
  CHECK(clip_ratio(0.1, 0.2) == 0.8);
  CHECK(clip_ratio(0.85, 0.2) == 0.85);
  CHECK(clip_ratio(1.2, 0.2) == 1.2);
}

TEST_CASE("log-probabilities agree bitwise across all three evaluation paths") {
  for (Arch arch : {Arch::RecurrentCell, Arch::AttentionBlock}) {
    CAPTURE(arch_name(arch));
    ModelDims dims;
    dims.vocab = 6;
    dims.embed = 3;
    dims.hidden = 4;
    dims.max_response = 4;
    dims.max_prompt = 4;
    RngFactory factory(13);
    RngStream rng = factory.stream("model-init");
    const GenModel gen = make_gen_model(dims, arch, rng);
    const Sequence seq{{2, 0}, {1, 4, 3}};
    const double plain = log_prob(gen, seq);
    Tape t1;
    const BoundParams live = bind_params(t1, gen.params);
    const double taped = t1.scalar_value(log_prob_on_tape(t1, live, gen, seq));
    Tape t2;
    const BoundParams frozen = bind_constants(t2, gen.params);
    const double frozen_lp =
        t2.scalar_value(log_prob_on_tape(t2, frozen, gen, seq));
    CHECK(taped == plain);
    CHECK(frozen_lp == plain);
  }
}

TEST_CASE("the first update reports exactly zero divergence from its reference") {
  GenModel gen = bandit_model(9);
  const DiscModel disc = favoring_disc(4, 2);
  PPOConfig cfg;
  cfg.ref_params = gen.params;
  RngFactory factory(4);
  RngStream rng = factory.stream("train");
  const GenStepInfo info = ppo_step(gen, disc, fixed_prompt_task(), cfg, rng);
  REQUIRE(info.kl_mean.has_value());
  CHECK(*info.kl_mean == 0.0);
  CHECK(info.reward_mean >= 0.0);
  CHECK(info.reward_mean <= 1.0);
}

TEST_CASE("a frozen batch with unit ratios and a fresh baseline has zero loss") {
  GenModel gen = bandit_model(10);
  const DiscModel disc = favoring_disc(4, 1);
  PPOConfig cfg;
  cfg.ref_params = gen.params;
  cfg.lr = 0.0;
  cfg.ppo_epochs = 1;
  RngFactory factory(6);
  RngStream rng = factory.stream("train");
  const GenStepInfo info = ppo_step(gen, disc, fixed_prompt_task(), cfg, rng);
  // Ratios are exactly one on the first epoch, so the surrogate reduces to
  // the mean advantage, and the seeded baseline centers that mean at zero.
  CHECK(std::abs(info.loss_g) < 1e-12);
}

TEST_CASE("the reference parameters are never mutated") {
  GenModel gen = bandit_model(11);
  const DiscModel disc = favoring_disc(4, 2);
  PPOConfig cfg;
  cfg.ref_params = gen.params;
  const ParamStore ref_before = cfg.ref_params;
  RngFactory factory(8);
  RngStream rng = factory.stream("train");
  for (int step = 0; step < 5; ++step)
    (void)ppo_step(gen, disc, fixed_prompt_task(), cfg, rng);
  CHECK(cfg.ref_params.equals(ref_before));
  CHECK(!gen.params.equals(ref_before));
}

TEST_CASE("a zero learning rate leaves the policy untouched") {
  GenModel gen = bandit_model(12);
  const ParamStore before = gen.params;
  const DiscModel disc = favoring_disc(4, 0);
  PPOConfig cfg;
  cfg.ref_params = gen.params;
  cfg.lr = 0.0;
  RngFactory factory(10);
  RngStream rng = factory.stream("train");
  (void)ppo_step(gen, disc, fixed_prompt_task(), cfg, rng);
  CHECK(gen.params.equals(before));
}

TEST_CASE("updates are deterministic given the seed") {
  GenModel a = bandit_model(13);
  GenModel b = bandit_model(13);
  const DiscModel disc = favoring_disc(4, 2);
  PPOConfig ca, cb;
  ca.ref_params = a.params;
  cb.ref_params = b.params;
  RngFactory fa(14), fb(14);
  RngStream ra = fa.stream("train");
  RngStream rb = fb.stream("train");
  for (int step = 0; step < 3; ++step) {
    (void)ppo_step(a, disc, fixed_prompt_task(), ca, ra);
    (void)ppo_step(b, disc, fixed_prompt_task(), cb, rb);
  }
  CHECK(a.params.equals(b.params));
  CHECK(ca.baseline.value == cb.baseline.value);
}

TEST_CASE("retention term requires a corpus and shifts the objective") {
  GenModel gen = bandit_model(15);
  const DiscModel disc = favoring_disc(4, 2);
  PPOConfig cfg;
  cfg.ref_params = gen.params;
  cfg.gamma = 0.5;
  RngFactory factory(16);
  RngStream rng = factory.stream("train");
  TaskSpec bare = fixed_prompt_task();
  CHECK_THROWS_AS((void)ppo_step(gen, disc, bare, cfg, rng), InvalidInputError);

  TaskSpec with_corpus = fixed_prompt_task();
  with_corpus.pretrain_corpus.push_back({{{0}, {2}}, OracleLabel::Unclear});
  const GenStepInfo info = ppo_step(gen, disc, with_corpus, cfg, rng);
  CHECK(std::isfinite(info.loss_g));
}

TEST_CASE("step configuration is validated") {
  GenModel gen = bandit_model(17);
  const DiscModel disc = favoring_disc(4, 2);
  RngFactory factory(18);
  RngStream rng = factory.stream("train");
  const TaskSpec task = fixed_prompt_task();
  auto fresh = [&gen] {
    PPOConfig cfg;
    cfg.ref_params = gen.params;
    return cfg;
  };
  PPOConfig cfg = fresh();
  cfg.beta = -0.1;
  CHECK_THROWS_AS((void)ppo_step(gen, disc, task, cfg, rng), InvalidInputError);
  cfg = fresh();
  cfg.gamma = -1.0;
  CHECK_THROWS_AS((void)ppo_step(gen, disc, task, cfg, rng), InvalidInputError);
  cfg = fresh();
  cfg.clip_eps = 0.0;
  CHECK_THROWS_AS((void)ppo_step(gen, disc, task, cfg, rng), InvalidInputError);
  cfg = fresh();
  cfg.clip_eps = 1.0;
  CHECK_THROWS_AS((void)ppo_step(gen, disc, task, cfg, rng), InvalidInputError);
  cfg = fresh();
  cfg.ppo_epochs = 0;
  CHECK_THROWS_AS((void)ppo_step(gen, disc, task, cfg, rng), InvalidInputError);
  cfg = fresh();
  cfg.batch_size = 0;
  CHECK_THROWS_AS((void)ppo_step(gen, disc, task, cfg, rng), InvalidInputError);
  cfg = fresh();
  cfg.lr = std::nan("");
  CHECK_THROWS_AS((void)ppo_step(gen, disc, task, cfg, rng), InvalidInputError);
  cfg = fresh();
  cfg.ref_params = ParamStore{};
  CHECK_THROWS_AS((void)ppo_step(gen, disc, task, cfg, rng), InvalidInputError);
}

TEST_CASE("the clipped surrogate gradient passes finite differences") {
  // Frozen batch, frozen advantages, ratios at 1: the clip band is wide open
  // around the evaluation point, so the surrogate is locally smooth.
  const GenModel gen = bandit_model(20, 2);
  const std::vector<Sequence> batch = {{{0}, {1, 2}}, {{0}, {3, 0}}};
  const std::vector<double> advantages = {0.7, -0.4};
  std::vector<double> lp_old(batch.size());
  {
    Tape tape;
    const BoundParams bound = bind_constants(tape, gen.params);
    for (std::size_t i = 0; i < batch.size(); ++i)
      lp_old[i] =
          tape.scalar_value(log_prob_on_tape(tape, bound, gen, batch[i]));
  }
  GenModel probe = gen;
  const TapeProgram f = [&probe, &batch, &advantages, &lp_old](
                            Tape& t, const ParamStore& p) {
    probe.params = p;
    const BoundParams bound = bind_params(t, p);
    std::vector<Var> surrogates;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Var lp_new = log_prob_on_tape(t, bound, probe, batch[i]);
      Var ratio = t.exp(t.sub(lp_new, t.scalar(lp_old[i])));
      Var unclipped = t.scale(ratio, advantages[i]);
      Var clipped = t.scale(t.clamp(ratio, 0.8, 1.2), advantages[i]);
      surrogates.push_back(t.vmin(unclipped, clipped));
    }
    return t.mean(t.concat_rows(surrogates));
  };
  CHECK(finite_diff_check(f, gen.params, 1e-3) < 1e-4);
}

TEST_CASE("a stronger divergence penalty keeps the policy near the reference") {
  const DiscModel disc = favoring_disc(4, 2);
  const TaskSpec task = fixed_prompt_task();
  auto train = [&](double beta) {
    GenModel gen = bandit_model(19);
    PPOConfig cfg;
    cfg.beta = beta;
    cfg.lr = 0.02;
    cfg.ref_params = gen.params;
    RngFactory factory(7);
    RngStream rng = factory.stream("train");
    double reward = 0.0;
    for (int step = 0; step < 300; ++step)
      reward = ppo_step(gen, disc, task, cfg, rng).reward_mean;
    RngStream sam = factory.stream("sampling");
    double drift = 0.0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
      const Sequence seq = sample_response(gen, task.sample_prompt(sam), sam);
      drift += std::abs(sequence_kl(gen, cfg.ref_params, seq));
    }
    return std::pair<double, double>{drift / n, reward};
  };
  const auto [drift_free, reward_free] = train(0.0);
  const auto [drift_anchored, reward_anchored] = train(5.0);
  CHECK(drift_anchored < 0.25 * drift_free);
  CHECK(reward_free >= reward_anchored);
  CHECK(reward_free > 0.9);
}
