#include "rlgaf/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "rlgaf/errors.hpp"

namespace rlgaf {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
  throw ParseError("config field '" + path + "': " + why);
}

// Strict object walker: every key must be consumed exactly once.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) bad_field(path_, "expected a JSON object");
  }

  ~Fields() = default;

  bool has(const char* key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& get(const char* key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string subpath(const char* key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key))
        throw ParseError("unknown config key '" + subpath(key.c_str()) + "'");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
T number(const json& v, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) bad_field(path, "expected a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) bad_field(path, "expected a number");
    return v.get<T>();
  } else {
    if (!v.is_number_integer() && !v.is_number_unsigned())
      bad_field(path, "expected an integer");
    return v.get<T>();
  }
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) bad_field(path, "expected a string");
  return v.get<std::string>();
}

void parse_task(const json& obj, TaskConfig& out, const std::string& path) {
  Fields f(obj, path);
  if (f.has("name")) out.name = text(f.get("name"), f.subpath("name"));
  if (out.name != "sentiment" && out.name != "form")
    bad_field(f.subpath("name"), "must be 'sentiment' or 'form'");
  if (f.has("vocab")) out.vocab = number<int>(f.get("vocab"), f.subpath("vocab"));
  if (f.has("p_set_size"))
    out.p_set_size = number<int>(f.get("p_set_size"), f.subpath("p_set_size"));
  if (f.has("n_set_size"))
    out.n_set_size = number<int>(f.get("n_set_size"), f.subpath("n_set_size"));
  if (f.has("k")) out.k = number<int>(f.get("k"), f.subpath("k"));
  f.finish();
}

void parse_model(const json& obj, ModelDims& dims, Arch& arch,
                 const std::string& path) {
  Fields f(obj, path);
  if (f.has("vocab")) dims.vocab = number<int>(f.get("vocab"), f.subpath("vocab"));
  if (f.has("embed")) dims.embed = number<int>(f.get("embed"), f.subpath("embed"));
  if (f.has("hidden"))
    dims.hidden = number<int>(f.get("hidden"), f.subpath("hidden"));
  if (f.has("max_response"))
    dims.max_response =
        number<int>(f.get("max_response"), f.subpath("max_response"));
  if (f.has("max_prompt"))
    dims.max_prompt = number<int>(f.get("max_prompt"), f.subpath("max_prompt"));
  if (f.has("arch")) {
    try {
      arch = arch_from_name(text(f.get("arch"), f.subpath("arch")));
    } catch (const InvalidInputError& e) {
      bad_field(f.subpath("arch"), e.what());
    }
  }
  f.finish();
}

void parse_pretrain(const json& obj, PretrainConfig& out,
                    const std::string& path) {
  Fields f(obj, path);
  if (f.has("steps")) out.steps = number<int>(f.get("steps"), f.subpath("steps"));
  if (f.has("lr")) out.lr = number<double>(f.get("lr"), f.subpath("lr"));
  if (f.has("batch_size"))
    out.batch_size = number<int>(f.get("batch_size"), f.subpath("batch_size"));
  f.finish();
}

void parse_reinforce(const json& obj, ReinforceConfig& out,
                     const std::string& path) {
  Fields f(obj, path);
  if (f.has("batch_size"))
    out.batch_size = number<int>(f.get("batch_size"), f.subpath("batch_size"));
  if (f.has("rollout_count"))
    out.rollout_count =
        number<int>(f.get("rollout_count"), f.subpath("rollout_count"));
  if (f.has("reward_mode")) {
    try {
      out.reward_mode = reward_mode_from_name(
          text(f.get("reward_mode"), f.subpath("reward_mode")));
    } catch (const InvalidInputError& e) {
      bad_field(f.subpath("reward_mode"), e.what());
    }
  }
  if (f.has("lr")) out.lr = number<double>(f.get("lr"), f.subpath("lr"));
  f.finish();
}

void parse_ppo(const json& obj, PPOConfig& out, const std::string& path) {
  Fields f(obj, path);
  if (f.has("beta")) out.beta = number<double>(f.get("beta"), f.subpath("beta"));
  if (f.has("gamma"))
    out.gamma = number<double>(f.get("gamma"), f.subpath("gamma"));
  if (f.has("clip_eps"))
    out.clip_eps = number<double>(f.get("clip_eps"), f.subpath("clip_eps"));
  if (f.has("ppo_epochs"))
    out.ppo_epochs = number<int>(f.get("ppo_epochs"), f.subpath("ppo_epochs"));
  if (f.has("batch_size"))
    out.batch_size = number<int>(f.get("batch_size"), f.subpath("batch_size"));
  if (f.has("lr")) out.lr = number<double>(f.get("lr"), f.subpath("lr"));
  if (f.has("baseline_decay"))
    out.baseline.decay =
        number<double>(f.get("baseline_decay"), f.subpath("baseline_decay"));
  if (f.has("reward_mode")) {
    try {
      out.reward_mode = reward_mode_from_name(
          text(f.get("reward_mode"), f.subpath("reward_mode")));
    } catch (const InvalidInputError& e) {
      bad_field(f.subpath("reward_mode"), e.what());
    }
  }
  f.finish();
}

void parse_gumbel(const json& obj, GumbelConfig& out, const std::string& path) {
  Fields f(obj, path);
  if (f.has("temperature"))
    out.temperature =
        number<double>(f.get("temperature"), f.subpath("temperature"));
  if (f.has("straight_through"))
    out.straight_through =
        number<bool>(f.get("straight_through"), f.subpath("straight_through"));
  if (f.has("anneal"))
    out.anneal = number<bool>(f.get("anneal"), f.subpath("anneal"));
  if (f.has("lr")) out.lr = number<double>(f.get("lr"), f.subpath("lr"));
  if (f.has("steps")) out.steps = number<int>(f.get("steps"), f.subpath("steps"));
  f.finish();
}

void parse_loop(const json& obj, LoopConfig& out, const std::string& path) {
  Fields f(obj, path);
  if (f.has("gen_steps_per_round"))
    out.gen_steps_per_round = number<int>(f.get("gen_steps_per_round"),
                                          f.subpath("gen_steps_per_round"));
  if (f.has("disc_steps_per_round"))
    out.disc_steps_per_round = number<int>(f.get("disc_steps_per_round"),
                                           f.subpath("disc_steps_per_round"));
  if (f.has("disc_samples_per_round"))
    out.disc_samples_per_round = number<int>(
        f.get("disc_samples_per_round"), f.subpath("disc_samples_per_round"));
  if (f.has("total_rounds"))
    out.total_rounds =
        number<int>(f.get("total_rounds"), f.subpath("total_rounds"));
  if (f.has("eval_samples_per_round"))
    out.eval_samples_per_round = number<int>(
        f.get("eval_samples_per_round"), f.subpath("eval_samples_per_round"));
  if (f.has("disc_lr"))
    out.disc_lr = number<double>(f.get("disc_lr"), f.subpath("disc_lr"));
  if (f.has("distinct_ratio_min"))
    out.distinct_ratio_min = number<double>(f.get("distinct_ratio_min"),
                                            f.subpath("distinct_ratio_min"));
  if (f.has("bigram_entropy_min"))
    out.bigram_entropy_min = number<double>(f.get("bigram_entropy_min"),
                                            f.subpath("bigram_entropy_min"));
  if (f.has("smoothing_window"))
    out.smoothing_window =
        number<int>(f.get("smoothing_window"), f.subpath("smoothing_window"));
  if (f.has("halt_on_collapse"))
    out.halt_on_collapse =
        number<bool>(f.get("halt_on_collapse"), f.subpath("halt_on_collapse"));
  if (f.has("gumbel_batch_size"))
    out.gumbel_batch_size = number<int>(f.get("gumbel_batch_size"),
                                        f.subpath("gumbel_batch_size"));
  f.finish();
}

void parse_judge(const json& obj, JudgeEndpoint& out, const std::string& path) {
  Fields f(obj, path);
  if (f.has("host")) out.host = text(f.get("host"), f.subpath("host"));
  if (f.has("port")) out.port = number<int>(f.get("port"), f.subpath("port"));
  if (f.has("path")) out.path = text(f.get("path"), f.subpath("path"));
  if (f.has("auth_header"))
    out.auth_header = text(f.get("auth_header"), f.subpath("auth_header"));
  if (f.has("auth_value"))
    out.auth_value = text(f.get("auth_value"), f.subpath("auth_value"));
  if (f.has("timeout_seconds"))
    out.timeout_seconds =
        number<int>(f.get("timeout_seconds"), f.subpath("timeout_seconds"));
  if (f.has("backoff_base_seconds"))
    out.backoff_base_seconds = number<double>(
        f.get("backoff_base_seconds"), f.subpath("backoff_base_seconds"));
  f.finish();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Fields f(obj, "");
  if (f.has("seed"))
    cfg.seed = number<std::uint64_t>(f.get("seed"), f.subpath("seed"));
  if (f.has("task")) parse_task(f.get("task"), cfg.task, "task");
  if (f.has("model")) parse_model(f.get("model"), cfg.dims, cfg.arch, "model");
  if (f.has("pretrain"))
    parse_pretrain(f.get("pretrain"), cfg.pretrain, "pretrain");
  if (f.has("strategy")) {
    try {
      cfg.loop.strategy =
          strategy_from_name(text(f.get("strategy"), "strategy"));
    } catch (const InvalidInputError& e) {
      bad_field("strategy", e.what());
    }
  }
  if (f.has("reinforce"))
    parse_reinforce(f.get("reinforce"), cfg.loop.reinforce, "reinforce");
  if (f.has("ppo")) parse_ppo(f.get("ppo"), cfg.loop.ppo, "ppo");
  if (f.has("gumbel")) parse_gumbel(f.get("gumbel"), cfg.loop.gumbel, "gumbel");
  if (f.has("loop")) parse_loop(f.get("loop"), cfg.loop, "loop");
  if (f.has("output_dir"))
    cfg.output_dir = text(f.get("output_dir"), "output_dir");
  if (f.has("judge")) {
    JudgeEndpoint judge;
    parse_judge(f.get("judge"), judge, "judge");
    cfg.judge = judge;
  }
  f.finish();
  return cfg;
}

std::string run_config_text(const RunConfig& cfg) {
  json obj;
  obj["seed"] = cfg.seed;
  obj["task"] = {{"name", cfg.task.name},
                 {"vocab", cfg.task.vocab},
                 {"p_set_size", cfg.task.p_set_size},
                 {"n_set_size", cfg.task.n_set_size},
                 {"k", cfg.task.k}};
  obj["model"] = {{"vocab", cfg.dims.vocab},
                  {"embed", cfg.dims.embed},
                  {"hidden", cfg.dims.hidden},
                  {"max_response", cfg.dims.max_response},
                  {"max_prompt", cfg.dims.max_prompt},
                  {"arch", arch_name(cfg.arch)}};
  obj["pretrain"] = {{"steps", cfg.pretrain.steps},
                     {"lr", cfg.pretrain.lr},
                     {"batch_size", cfg.pretrain.batch_size}};
  obj["strategy"] = strategy_name(cfg.loop.strategy);
  obj["reinforce"] = {{"batch_size", cfg.loop.reinforce.batch_size},
                      {"rollout_count", cfg.loop.reinforce.rollout_count},
                      {"reward_mode",
                       reward_mode_name(cfg.loop.reinforce.reward_mode)},
                      {"lr", cfg.loop.reinforce.lr}};
  obj["ppo"] = {{"beta", cfg.loop.ppo.beta},
                {"gamma", cfg.loop.ppo.gamma},
                {"clip_eps", cfg.loop.ppo.clip_eps},
                {"ppo_epochs", cfg.loop.ppo.ppo_epochs},
                {"batch_size", cfg.loop.ppo.batch_size},
                {"lr", cfg.loop.ppo.lr},
                {"baseline_decay", cfg.loop.ppo.baseline.decay},
                {"reward_mode", reward_mode_name(cfg.loop.ppo.reward_mode)}};
  obj["gumbel"] = {{"temperature", cfg.loop.gumbel.temperature},
                   {"straight_through", cfg.loop.gumbel.straight_through},
                   {"anneal", cfg.loop.gumbel.anneal},
                   {"lr", cfg.loop.gumbel.lr},
                   {"steps", cfg.loop.gumbel.steps}};
  obj["loop"] = {{"gen_steps_per_round", cfg.loop.gen_steps_per_round},
                 {"disc_steps_per_round", cfg.loop.disc_steps_per_round},
                 {"disc_samples_per_round", cfg.loop.disc_samples_per_round},
                 {"total_rounds", cfg.loop.total_rounds},
                 {"eval_samples_per_round", cfg.loop.eval_samples_per_round},
                 {"disc_lr", cfg.loop.disc_lr},
                 {"distinct_ratio_min", cfg.loop.distinct_ratio_min},
                 {"bigram_entropy_min", cfg.loop.bigram_entropy_min},
                 {"smoothing_window", cfg.loop.smoothing_window},
                 {"halt_on_collapse", cfg.loop.halt_on_collapse},
                 {"gumbel_batch_size", cfg.loop.gumbel_batch_size}};
  obj["output_dir"] = cfg.output_dir;
  if (cfg.judge) {
    obj["judge"] = {{"host", cfg.judge->host},
                    {"port", cfg.judge->port},
                    {"path", cfg.judge->path},
                    {"auth_header", cfg.judge->auth_header},
                    {"auth_value", cfg.judge->auth_value},
                    {"timeout_seconds", cfg.judge->timeout_seconds},
                    {"backoff_base_seconds", cfg.judge->backoff_base_seconds}};
  }
  return obj.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw TransportError("cannot open config for writing: " + path);
  out << run_config_text(cfg);
  out.flush();
  if (!out) throw TransportError("config write failed: " + path);
}

}  // namespace rlgaf
