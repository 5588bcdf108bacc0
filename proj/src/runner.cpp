#include "rlgaf/runner.hpp"

#include <filesystem>
#include <sstream>

#include "rlgaf/checkpoint.hpp"
#include "rlgaf/errors.hpp"
#include "rlgaf/eval.hpp"
#include "rlgaf/metrics.hpp"

namespace rlgaf {

namespace {

std::string join_path(const std::string& dir, const char* leaf) {
  return (std::filesystem::path(dir) / leaf).string();
}

void format_tokens(std::ostringstream& out, const std::vector<int>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out << ',';
    out << tokens[i];
  }
}

}  // namespace

TaskSpec task_from_config(const RunConfig& cfg) {
  if (cfg.task.vocab != cfg.dims.vocab)
    throw InvalidInputError("task vocabulary (" +
                            std::to_string(cfg.task.vocab) +
                            ") does not match model vocabulary (" +
                            std::to_string(cfg.dims.vocab) + ")");
  if (cfg.task.name == "form") return form_task(cfg.seed, cfg.task.vocab, cfg.task.k);
  if (cfg.task.name == "sentiment")
    return sentiment_task(cfg.seed, cfg.task.vocab, cfg.task.p_set_size,
                          cfg.task.n_set_size);
  throw InvalidInputError("unknown task '" + cfg.task.name + "'");
}

GenModel init_generator(const RunConfig& cfg) {
  RngFactory factory(cfg.seed);
  RngStream rng = factory.stream("model-init", 0);
  return make_gen_model(cfg.dims, cfg.arch, rng);
}

DiscModel init_discriminator(const RunConfig& cfg) {
  RngFactory factory(cfg.seed);
  RngStream rng = factory.stream("model-init", 1);
  return make_disc_model(cfg.dims, cfg.arch, rng);
}

std::string gen_checkpoint_path(const RunConfig& cfg) {
  return join_path(cfg.output_dir, "gen.ckpt");
}

std::string disc_checkpoint_path(const RunConfig& cfg) {
  return join_path(cfg.output_dir, "disc.ckpt");
}

std::string metrics_path(const RunConfig& cfg) {
  return join_path(cfg.output_dir, "metrics.jsonl");
}

std::string resolved_config_path(const RunConfig& cfg) {
  return join_path(cfg.output_dir, "config.json");
}

RunResult run_training(const RunConfig& cfg,
                       const std::function<void(int)>& on_round) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec)
    throw TransportError("cannot create output directory '" + cfg.output_dir +
                         "': " + ec.message());

  // The fully resolved configuration lands on disk before any training state
  // exists and is never touched again.
  save_run_config(cfg, resolved_config_path(cfg));

  const TaskSpec task = task_from_config(cfg);
  GenModel gen = init_generator(cfg);
  DiscModel disc = init_discriminator(cfg);

  MetricsWriter writer(metrics_path(cfg));
  RngFactory factory(cfg.seed);

  if (cfg.pretrain.steps > 0) {
    RngStream pre_rng = factory.stream("pretrain");
    pretrain_generator(gen, task, cfg.pretrain.steps, cfg.pretrain.lr, pre_rng,
                       cfg.pretrain.batch_size, [&](int step, double nll) {
                         MetricsRecord rec;
                         rec.step = step;
                         rec.phase = "pretrain";
                         rec.loss_g = nll;
                         writer.append(rec);
                       });
    writer.flush();
  }

  LoopConfig loop = cfg.loop;
  if (loop.strategy == Strategy::PPO) loop.ppo.ref_params = gen.params;

  RunResult result;
  result.output_dir = cfg.output_dir;

  RngStream train_rng = factory.stream("train");
  long gen_step_counter = 0;
  for (int round = 0; round < loop.total_rounds; ++round) {
    RoundMetrics rm = rlgaf_round(gen, disc, task, loop, round, train_rng);

    if (rm.disc_loss_real || rm.disc_loss_fake) {
      MetricsRecord rec;
      rec.step = round;
      rec.phase = "disc";
      rec.loss_d_real = rm.disc_loss_real;
      rec.loss_d_fake = rm.disc_loss_fake;
      writer.append(rec);
    }
    for (const GenStepInfo& info : rm.gen_steps) {
      MetricsRecord rec;
      rec.step = gen_step_counter++;
      rec.phase = "gen";
      rec.loss_g = info.loss_g;
      rec.reward_mean = info.reward_mean;
      rec.kl_mean = info.kl_mean;
      writer.append(rec);
    }
    MetricsRecord eval_rec;
    eval_rec.step = round;
    eval_rec.phase = "eval";
    eval_rec.disc_acc = rm.disc_eval_accuracy;
    eval_rec.reward_mean = rm.reward_mean;
    eval_rec.collapse_flag = rm.collapse.flagged;
    writer.append(eval_rec);
    writer.flush();

    result.final_reward_mean = rm.reward_mean;
    result.rounds.push_back(std::move(rm));
    if (on_round) on_round(round);
  }

  save_gen_checkpoint(gen, cfg.seed, gen_checkpoint_path(cfg));
  save_disc_checkpoint(disc, cfg.seed, disc_checkpoint_path(cfg));
  return result;
}

std::string sample_responses(const RunConfig& cfg,
                             const std::string& checkpoint_path, int count,
                             std::uint64_t sample_seed) {
  if (count < 1) throw InvalidInputError("sample count must be positive");
  const GenModel gen = load_gen_checkpoint(checkpoint_path);
  const TaskSpec task = task_from_config(cfg);
  if (task.vocab != gen.dims.vocab)
    throw InvalidInputError("checkpoint vocabulary does not match the task");
  RngFactory factory(sample_seed);
  RngStream rng = factory.stream("sampling");
  std::ostringstream out;
  for (int i = 0; i < count; ++i) {
    const std::vector<int> prompt = task.sample_prompt(rng);
    const Sequence seq = sample_response(gen, prompt, rng);
    format_tokens(out, seq.prompt);
    out << ' ';
    format_tokens(out, seq.response);
    out << '\n';
  }
  return out.str();
}

OracleEvalResult evaluate_against_oracle(const RunConfig& cfg,
                                         const std::string& checkpoint_path,
                                         int count, std::uint64_t sample_seed) {
  if (count < 1) throw InvalidInputError("sample count must be positive");
  const GenModel gen = load_gen_checkpoint(checkpoint_path);
  const TaskSpec task = task_from_config(cfg);
  if (task.vocab != gen.dims.vocab)
    throw InvalidInputError("checkpoint vocabulary does not match the task");
  RngFactory factory(sample_seed);
  RngStream rng = factory.stream("sampling");
  OracleEvalResult result;
  result.total = count;
  for (int i = 0; i < count; ++i) {
    const std::vector<int> prompt = task.sample_prompt(rng);
    const Sequence seq = sample_response(gen, prompt, rng);
    if (task.oracle(seq) == task.target) ++result.matches;
  }
  result.rate = static_cast<double>(result.matches) / count;
  return result;
}

}  // namespace rlgaf
