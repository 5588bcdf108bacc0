#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlgaf/checkpoint.hpp"
#include "rlgaf/errors.hpp"
#include "rlgaf/eval.hpp"
#include "rlgaf/judge.hpp"
#include "rlgaf/metrics.hpp"
#include "rlgaf/runner.hpp"

namespace {

using namespace rlgaf;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw TransportError("cannot open file for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw TransportError("write failed: " + path);
}

std::string signed_int(int value) {
  return (value > 0 ? "+" : "") + std::to_string(value);
}

int cmd_init(const std::string& output) {
  save_run_config(RunConfig{}, output);
  std::cout << "wrote default config to " << output << "\n";
  return 0;
}

int cmd_pretrain(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec)
    throw TransportError("cannot create output directory '" + cfg.output_dir +
                         "': " + ec.message());
  save_run_config(cfg, resolved_config_path(cfg));
  const TaskSpec task = task_from_config(cfg);
  GenModel gen = init_generator(cfg);
  MetricsWriter writer(metrics_path(cfg));
  RngFactory factory(cfg.seed);
  RngStream rng = factory.stream("pretrain");
  const double nll = pretrain_generator(
      gen, task, cfg.pretrain.steps, cfg.pretrain.lr, rng,
      cfg.pretrain.batch_size, [&](int step, double batch_nll) {
        MetricsRecord rec;
        rec.step = step;
        rec.phase = "pretrain";
        rec.loss_g = batch_nll;
        writer.append(rec);
      });
  writer.flush();
  save_gen_checkpoint(gen, cfg.seed, gen_checkpoint_path(cfg));
  std::cout << "pretrained " << cfg.pretrain.steps << " steps, final batch nll "
            << nll << "\n";
  std::cout << "checkpoint: " << gen_checkpoint_path(cfg) << "\n";
  return 0;
}

int cmd_train(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const RunResult result = run_training(cfg);
  std::cout << "completed " << result.rounds.size() << " rounds, final reward mean "
            << result.final_reward_mean << "\n";
  std::cout << "metrics: " << metrics_path(cfg) << "\n";
  std::cout << "checkpoints: " << gen_checkpoint_path(cfg) << ", "
            << disc_checkpoint_path(cfg) << "\n";
  return 0;
}

int cmd_sample(const std::string& config_path, const std::string& checkpoint,
               int count, std::uint64_t seed, const std::string& output) {
  const RunConfig cfg = load_run_config(config_path);
  const std::string text = sample_responses(cfg, checkpoint, count, seed);
  if (output.empty()) {
    std::cout << text;
  } else {
    write_text_file(output, text);
    std::cout << "wrote " << count << " samples to " << output << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint,
                 int count, std::uint64_t seed) {
  const RunConfig cfg = load_run_config(config_path);
  const OracleEvalResult result =
      evaluate_against_oracle(cfg, checkpoint, count, seed);
  std::cout << result.matches << "/" << result.total << " " << result.rate
            << "\n";
  return 0;
}

int cmd_score(const std::string& ratings_path, const std::string& system_id,
              const std::string& base_id) {
  const std::vector<RatingRecord> records = read_ratings(ratings_path);
  std::cout << signed_int(aggregate(records, system_id, base_id)) << "\n";
  return 0;
}

std::vector<JudgeExemplar> load_exemplars(const std::string& path) {
  std::vector<JudgeExemplar> exemplars;
  if (path.empty()) return exemplars;
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open examples file: " + path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
      JudgeExemplar ex;
      ex.text = obj.at("text").get<std::string>();
      ex.tier = tier_from_name(obj.at("tier").get<std::string>());
      exemplars.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad exemplar: ") + e.what(), line_no);
    }
  }
  return exemplars;
}

std::vector<JudgeCase> load_cases(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open cases file: " + path);
  std::vector<JudgeCase> cases;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
      JudgeCase c;
      c.prompt_id = obj.at("prompt_id").get<std::string>();
      c.system_id = obj.at("system_id").get<std::string>();
      c.text = obj.at("text").get<std::string>();
      cases.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad judge case: ") + e.what(), line_no);
    }
  }
  return cases;
}

int cmd_judge(const std::string& config_path, const std::string& cases_path,
              const std::string& rubric_path, const std::string& examples_path,
              const std::string& output, int retries) {
  const RunConfig cfg = load_run_config(config_path);
  if (!cfg.judge)
    throw InvalidInputError("config has no judge endpoint settings");
  const std::string rubric = read_text_file(rubric_path);
  const std::vector<JudgeExemplar> exemplars = load_exemplars(examples_path);
  const std::vector<JudgeCase> cases = load_cases(cases_path);
  std::vector<RatingRecord> records;
  for (const JudgeCase& c : cases)
    records.push_back(judge_rate(*cfg.judge, rubric, exemplars, c, retries));
  if (output.empty()) {
    for (const RatingRecord& r : records) std::cout << rating_to_json(r) << "\n";
  } else {
    write_ratings(records, output);
    std::cout << "wrote " << records.size() << " ratings to " << output << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial reward-model fine-tuning on synthetic token tasks"};
  app.require_subcommand(1);

  auto* init = app.add_subcommand("init", "Write a default run config");
  std::string init_output = "config.json";
  init->add_option("-o,--output", init_output, "Config file to write");

  auto* pretrain =
      app.add_subcommand("pretrain", "Likelihood-train the generator only");
  std::string pretrain_config;
  pretrain->add_option("-c,--config", pretrain_config, "Run config file")
      ->required();

  auto* train = app.add_subcommand("train", "Run the full training pipeline");
  std::string train_config;
  train->add_option("-c,--config", train_config, "Run config file")->required();

  auto* sample = app.add_subcommand("sample", "Decode sequences from a checkpoint");
  std::string sample_config, sample_ckpt, sample_output;
  int sample_count = 10;
  std::uint64_t sample_seed = 1;
  sample->add_option("-c,--config", sample_config, "Run config file")->required();
  sample->add_option("-k,--checkpoint", sample_ckpt, "Generator checkpoint")
      ->required();
  sample->add_option("-n,--count", sample_count, "Number of samples");
  sample->add_option("-s,--seed", sample_seed, "Sampling seed");
  sample->add_option("-o,--output", sample_output,
                     "Output file (stdout if omitted)");

  auto* evaluate =
      app.add_subcommand("evaluate", "Score sampled responses with the task oracle");
  std::string eval_config, eval_ckpt;
  int eval_count = 100;
  std::uint64_t eval_seed = 1;
  evaluate->add_option("-c,--config", eval_config, "Run config file")->required();
  evaluate->add_option("-k,--checkpoint", eval_ckpt, "Generator checkpoint")
      ->required();
  evaluate->add_option("-n,--count", eval_count, "Number of samples");
  evaluate->add_option("-s,--seed", eval_seed, "Sampling seed");

  auto* score = app.add_subcommand("score", "Aggregate paired rating records");
  std::string score_ratings, score_system = "tuned", score_base = "base";
  score->add_option("-r,--ratings", score_ratings, "Ratings JSONL file")
      ->required();
  score->add_option("--system", score_system, "Tuned system id");
  score->add_option("--base", score_base, "Base system id");

  auto* judge = app.add_subcommand("judge", "Rate cases through the judge endpoint");
  std::string judge_config, judge_cases, judge_rubric, judge_examples,
      judge_output;
  int judge_retries = 2;
  judge->add_option("-c,--config", judge_config, "Run config file")->required();
  judge->add_option("--cases", judge_cases, "Judge cases JSONL file")->required();
  judge->add_option("--rubric", judge_rubric, "Rubric text file")->required();
  judge->add_option("--examples", judge_examples, "Exemplar JSONL file");
  judge->add_option("-o,--output", judge_output,
                    "Ratings output file (stdout if omitted)");
  judge->add_option("--retries", judge_retries, "Retry limit per case");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (init->parsed()) return cmd_init(init_output);
    if (pretrain->parsed()) return cmd_pretrain(pretrain_config);
    if (train->parsed()) return cmd_train(train_config);
    if (sample->parsed())
      return cmd_sample(sample_config, sample_ckpt, sample_count, sample_seed,
                        sample_output);
    if (evaluate->parsed())
      return cmd_evaluate(eval_config, eval_ckpt, eval_count, eval_seed);
    if (score->parsed()) return cmd_score(score_ratings, score_system, score_base);
    if (judge->parsed())
      return cmd_judge(judge_config, judge_cases, judge_rubric, judge_examples,
                       judge_output, judge_retries);
  } catch (const Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
