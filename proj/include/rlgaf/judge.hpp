#pragma once

#include <string>
#include <vector>

#include "rlgaf/eval.hpp"

namespace rlgaf {

struct JudgeEndpoint {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string path = "/rate";
  std::string auth_header;  // optional, e.g. "Authorization"
  std::string auth_value;
  int timeout_seconds = 10;
  // backoff between retries starts here and doubles per attempt; zero keeps
  // tests fast
  double backoff_base_seconds = 1.0;
};

struct JudgeExemplar {
  std::string text;
  Tier tier = Tier::Average;
};

struct JudgeCase {
  std::string prompt_id;
  std::string system_id;
  std::string text;  // rendered prompt + response
};

// POSTs {system, examples, case} as JSON, expects {"text": "..."} back, and
// reads the tier as the first (case-insensitive) occurrence of good/average/
// bad in the reply. Network failures are retried up to retry_limit times with
// exponential backoff; an answer without a tier keyword is not retried.
RatingRecord judge_rate(const JudgeEndpoint& endpoint,
                        const std::string& rubric_text,
                        const std::vector<JudgeExemplar>& exemplars,
                        const JudgeCase& judge_case, int retry_limit);

// First tier keyword in free-form text; throws UnparseableReplyError if none.
Tier parse_tier_reply(const std::string& raw_text);

}  // namespace rlgaf
