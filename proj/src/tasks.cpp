#include "rlgaf/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "rlgaf/backbone.hpp"
#include "rlgaf/errors.hpp"

namespace rlgaf {

namespace {

constexpr std::size_t kCorpusItems = 256;
constexpr int kMinReviewTokens = 6;
constexpr int kMaxReviewTokens = 12;

std::vector<int> random_prompt(RngStream& rng, int vocab) {
  const int len = 4 + static_cast<int>(rng.next_int(5));  // 4..8
  std::vector<int> prompt(static_cast<std::size_t>(len));
  for (int& t : prompt) t = static_cast<int>(rng.next_int(vocab - 1));
  return prompt;
}

int count_in(const std::vector<int>& tokens, const std::vector<int>& set) {
  int count = 0;
  for (int t : tokens)
    if (std::find(set.begin(), set.end(), t) != set.end()) ++count;
  return count;
}

}  // namespace

std::string oracle_label_name(OracleLabel label) {
  switch (label) {
    case OracleLabel::Positive: return "positive";
    case OracleLabel::Negative: return "negative";
    case OracleLabel::Unclear: return "unclear";
    case OracleLabel::WellFormed: return "well-formed";
    case OracleLabel::IllFormed: return "ill-formed";
  }
  throw StructuralError("unknown oracle label");
}

TaskSpec form_task(uint64_t seed, int vocab, int k) {
  if (vocab < 3) throw InvalidInputError("form task needs vocabulary >= 3");
  if (k < 2) throw InvalidInputError("form task needs k >= 2");
  TaskSpec task;
  task.name = "form";
  task.vocab = vocab;
  task.terminator = vocab - 1;
  task.target = OracleLabel::WellFormed;
  const int terminator = task.terminator;
  task.sample_prompt = [vocab](RngStream& rng) {
    return random_prompt(rng, vocab);
  };
  task.expert_demonstration = [vocab, terminator](
                                  const std::vector<int>& prompt,
                                  RngStream& rng) {
    Sequence seq;
    seq.prompt = prompt;
    seq.response = {static_cast<int>(rng.next_int(vocab - 1)), terminator};
    return seq;
  };
  task.oracle = [k, terminator](const Sequence& seq) {
    const bool formed = !seq.response.empty() &&
                        static_cast<int>(seq.response.size()) <= k &&
                        seq.response.back() == terminator;
    return formed ? OracleLabel::WellFormed : OracleLabel::IllFormed;
  };
  RngFactory factory(seed);
  RngStream corpus_rng = factory.stream("task");
  for (std::size_t i = 0; i < kCorpusItems; ++i) {
    CorpusItem item;
    item.seq = task.expert_demonstration(task.sample_prompt(corpus_rng),
                                         corpus_rng);
    item.label = task.oracle(item.seq);
    task.pretrain_corpus.push_back(std::move(item));
  }
  return task;
}

TaskSpec sentiment_task(uint64_t seed, int vocab, int p_set_size,
                        int n_set_size) {
  if (p_set_size < 1 || n_set_size < 1)
    throw InvalidInputError("sentiment token sets must be non-empty");
  if (p_set_size + n_set_size >= vocab - 1)
    throw InvalidInputError(
        "sentiment token sets must fit the vocabulary with room for neutral "
        "tokens and the terminator");
  TaskSpec task;
  task.name = "sentiment";
  task.vocab = vocab;
  task.terminator = vocab - 1;
  task.target = OracleLabel::Positive;

  RngFactory factory(seed);
  RngStream setup = factory.stream("task");
  std::vector<int> content(static_cast<std::size_t>(vocab - 1));
  std::iota(content.begin(), content.end(), 0);
  for (std::size_t i = content.size(); i > 1; --i)
    std::swap(content[i - 1],
              content[static_cast<std::size_t>(
                  setup.next_int(static_cast<int>(i)))]);
  task.positive_tokens.assign(content.begin(), content.begin() + p_set_size);
  task.negative_tokens.assign(content.begin() + p_set_size,
                              content.begin() + p_set_size + n_set_size);

  const std::vector<int> pos = task.positive_tokens;
  const std::vector<int> neg = task.negative_tokens;
  task.oracle = [pos, neg](const Sequence& seq) {
    const int p = count_in(seq.response, pos);
    const int n = count_in(seq.response, neg);
    if (p > n) return OracleLabel::Positive;
    if (n > p) return OracleLabel::Negative;
    return OracleLabel::Unclear;
  };
  task.sample_prompt = [vocab](RngStream& rng) {
    return random_prompt(rng, vocab);
  };

  const int terminator = task.terminator;
  auto biased_review = [vocab, terminator, pos, neg](
                           RngStream& rng, bool positive) {
    const std::vector<int>& major = positive ? pos : neg;
    const std::vector<int>& minor = positive ? neg : pos;
    const int len =
        kMinReviewTokens +
        static_cast<int>(rng.next_int(kMaxReviewTokens - kMinReviewTokens + 1));
    std::vector<int> tokens(static_cast<std::size_t>(len));
    for (int& t : tokens) {
      const double u = rng.next_unit();
      if (u < 0.6) {
        t = major[static_cast<std::size_t>(
            rng.next_int(static_cast<int>(major.size())))];
      } else if (u < 0.7) {
        t = minor[static_cast<std::size_t>(
            rng.next_int(static_cast<int>(minor.size())))];
      } else {
        t = static_cast<int>(rng.next_int(vocab - 1));
      }
    }
    tokens.push_back(terminator);
    return tokens;
  };
  auto oracle = task.oracle;
  auto make_review = [biased_review, oracle](const std::vector<int>& prompt,
                                             RngStream& rng, bool positive) {
    const OracleLabel want =
        positive ? OracleLabel::Positive : OracleLabel::Negative;
    Sequence seq;
    seq.prompt = prompt;
    for (;;) {
      seq.response = biased_review(rng, positive);
      if (oracle(seq) == want) return seq;
    }
  };
  task.expert_demonstration = [make_review](const std::vector<int>& prompt,
                                            RngStream& rng) {
    return make_review(prompt, rng, true);
  };

  RngStream corpus_rng = factory.stream("task", 1);
  for (std::size_t i = 0; i < kCorpusItems; ++i) {
    const bool positive = i % 2 == 0;
    CorpusItem item;
    item.seq = make_review(task.sample_prompt(corpus_rng), corpus_rng,
                           positive);
    item.label =
        positive ? OracleLabel::Positive : OracleLabel::Negative;
    task.pretrain_corpus.push_back(std::move(item));
  }
  return task;
}

CorpusLoad load_corpus(const std::string& path, int max_prompt_tokens) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open corpus file: " + path);
  CorpusLoad out;
  std::string line;
  int line_no = 0;
  auto parse_ids = [&](const std::string& field) {
    std::vector<int> ids;
    if (field.empty())
      throw ParseError("empty token-id list", line_no);
    std::size_t at = 0;
    while (at <= field.size()) {
      const std::size_t comma = std::min(field.find(',', at), field.size());
      const std::string piece = field.substr(at, comma - at);
      if (piece.empty()) throw ParseError("empty token id", line_no);
      std::size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(piece, &used);
      } catch (const std::exception&) {
        throw ParseError("bad token id '" + piece + "'", line_no);
      }
      if (used != piece.size() || value < 0)
        throw ParseError("bad token id '" + piece + "'", line_no);
      ids.push_back(value);
      at = comma + 1;
    }
    return ids;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError("empty record", line_no);
    std::istringstream fields(line);
    std::string prompt_field, response_field, extra;
    if (!(fields >> prompt_field >> response_field))
      throw ParseError("expected two whitespace-separated fields", line_no);
    if (fields >> extra)
      throw ParseError("more than two fields", line_no);
    Sequence seq;
    seq.prompt = parse_ids(prompt_field);
    seq.response = parse_ids(response_field);
    if (static_cast<int>(seq.prompt.size()) >= max_prompt_tokens) {
      ++out.dropped;
      continue;
    }
    out.records.push_back(std::move(seq));
  }
  return out;
}

double corpus_nll(const GenModel& gen, const TaskSpec& task) {
  if (task.pretrain_corpus.empty())
    throw InvalidInputError("task has no pretraining corpus");
  double total = 0.0;
  for (const CorpusItem& item : task.pretrain_corpus)
    total += -log_prob(gen, item.seq);
  return total / static_cast<double>(task.pretrain_corpus.size());
}

double pretrain_generator(GenModel& gen, const TaskSpec& task, int steps,
                          double lr, RngStream& rng, int batch_size,
                          const std::function<void(int, double)>& on_step) {
  if (steps < 0) throw InvalidInputError("steps must be non-negative");
  if (batch_size < 1) throw InvalidInputError("batch size must be positive");
  if (task.pretrain_corpus.empty())
    throw InvalidInputError("task has no pretraining corpus");
  double last_nll = 0.0;
  for (int step = 0; step < steps; ++step) {
    Tape tape;
    BoundParams bound = bind_params(tape, gen.params);
    std::vector<Var> terms;
    for (int b = 0; b < batch_size; ++b) {
      const CorpusItem& item = task.pretrain_corpus[static_cast<std::size_t>(
          rng.next_int(static_cast<int>(task.pretrain_corpus.size())))];
      terms.push_back(log_prob_on_tape(tape, bound, gen, item.seq));
    }
    Var mean_lp = tape.mean(tape.concat_rows(terms));
    tape.backward(mean_lp);
    GradStore grads = tape.grads_for(gen.params);
    if (!grads.all_finite())
      throw TrainingDivergenceError("non-finite pretraining gradient");
    gen.params.axpy(lr, grads);
    if (gen.params.max_abs_value() > kParamMagnitudeGuard)
      throw TrainingDivergenceError("parameter magnitude exceeded guard");
    last_nll = -tape.scalar_value(mean_lp);
    if (on_step) on_step(step, last_nll);
  }
  return last_nll;
}

}  // namespace rlgaf
