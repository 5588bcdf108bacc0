#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rlgaf/gen_model.hpp"
#include "rlgaf/rng.hpp"
#include "rlgaf/sequence.hpp"

namespace rlgaf {

enum class OracleLabel { Positive, Negative, Unclear, WellFormed, IllFormed };

std::string oracle_label_name(OracleLabel label);

struct CorpusItem {
  Sequence seq;
  OracleLabel label = OracleLabel::Unclear;
};

// A synthetic alignment environment: prompt distribution, expert demonstrator
// (the label-1 data source), a programmatic oracle, and a pretraining corpus.
struct TaskSpec {
  std::string name;
  int vocab = 32;
  int terminator = 31;
  OracleLabel target = OracleLabel::Positive;  // what counts as aligned output
  std::function<std::vector<int>(RngStream&)> sample_prompt;
  std::function<Sequence(const std::vector<int>&, RngStream&)>
      expert_demonstration;
  std::function<OracleLabel(const Sequence&)> oracle;
  std::vector<CorpusItem> pretrain_corpus;
  // sentiment only; exposed so tests can construct class-pure responses
  std::vector<int> positive_tokens;
  std::vector<int> negative_tokens;
};

// Short-answer environment: prompts are 4-8 random content tokens, experts
// answer with one content token plus the terminator, and a response is
// well-formed iff it has at most k tokens and ends with the terminator.
TaskSpec form_task(uint64_t seed, int vocab, int k);

// Review-sentiment environment: disjoint positive/negative token sets; the
// oracle compares their counts. Experts emit positive reviews; the pretraining
// corpus is half positive-biased, half negative-biased, labels recorded.
TaskSpec sentiment_task(uint64_t seed, int vocab, int p_set_size,
                        int n_set_size);

struct CorpusLoad {
  std::vector<Sequence> records;
  int dropped = 0;  // records whose prompt hit the length limit
};

// One record per line: two whitespace-separated fields, each a
// comma-separated token-id list (prompt, then response).
CorpusLoad load_corpus(const std::string& path, int max_prompt_tokens);

// Cross-entropy (next-token) training over the task's pretraining corpus;
// returns the mean corpus negative log-likelihood after the last step.
double pretrain_generator(GenModel& gen, const TaskSpec& task, int steps,
                          double lr, RngStream& rng, int batch_size = 8,
                          const std::function<void(int, double)>& on_step = {});

// Mean negative log-likelihood of the corpus under the model.
double corpus_nll(const GenModel& gen, const TaskSpec& task);

}  // namespace rlgaf
