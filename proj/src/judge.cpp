#include "rlgaf/judge.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rlgaf/errors.hpp"

namespace rlgaf {

Tier parse_tier_reply(const std::string& raw_text) {
  std::string lower(raw_text.size(), '\0');
  std::transform(raw_text.begin(), raw_text.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const std::pair<std::string, Tier> keywords[] = {
      {"good", Tier::Good}, {"average", Tier::Average}, {"bad", Tier::Bad}};
  std::size_t best_at = std::string::npos;
  Tier best = Tier::Average;
  for (const auto& [word, tier] : keywords) {
    const std::size_t at = lower.find(word);
    if (at != std::string::npos && at < best_at) {
      best_at = at;
      best = tier;
    }
  }
  if (best_at == std::string::npos)
    throw UnparseableReplyError("no tier keyword in judge reply", raw_text);
  return best;
}

RatingRecord judge_rate(const JudgeEndpoint& endpoint,
                        const std::string& rubric_text,
                        const std::vector<JudgeExemplar>& exemplars,
                        const JudgeCase& judge_case, int retry_limit) {
  if (retry_limit < 0) throw InvalidInputError("retry limit must be >= 0");

  nlohmann::json body;
  body["system"] = rubric_text;
  body["examples"] = nlohmann::json::array();
  for (const JudgeExemplar& ex : exemplars)
    body["examples"].push_back(
        {{"text", ex.text}, {"tier", tier_name(ex.tier)}});
  body["case"] = {{"prompt_id", judge_case.prompt_id},
                  {"system_id", judge_case.system_id},
                  {"text", judge_case.text}};
  const std::string payload = body.dump();

  httplib::Client client(endpoint.host, endpoint.port);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  if (!endpoint.auth_header.empty())
    client.set_default_headers(
        {{endpoint.auth_header, endpoint.auth_value}});

  std::string last_error;
  for (int attempt = 0; attempt <= retry_limit; ++attempt) {
    if (attempt > 0 && endpoint.backoff_base_seconds > 0.0) {
      const double seconds =
          endpoint.backoff_base_seconds * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
    httplib::Result result =
        client.Post(endpoint.path, payload, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status != 200) {
      last_error = "status " + std::to_string(result->status);
      continue;
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception&) {
      throw UnparseableReplyError("judge reply is not JSON", result->body);
    }
    if (!reply.contains("text") || !reply["text"].is_string())
      throw UnparseableReplyError("judge reply has no text field",
                                  result->body);
    const std::string text = reply["text"].get<std::string>();
    RatingRecord record;
    record.prompt_id = judge_case.prompt_id;
    record.system_id = judge_case.system_id;
    record.tier = parse_tier_reply(text);
    record.rater = "judge";
    return record;
  }
  throw TransportError("judge endpoint unreachable after " +
                       std::to_string(retry_limit + 1) + " attempts: " +
                       last_error);
}

}  // namespace rlgaf
