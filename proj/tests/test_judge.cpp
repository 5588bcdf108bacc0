#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "rlgaf/errors.hpp"
#include "rlgaf/judge.hpp"

// httplib must come after the model headers: it drags in system networking
// macros that mangle Eigen's internal declarations.
#include "httplib.h"
#include "json.hpp"

using namespace rlgaf;

namespace {

// Local rating endpoint driven by a handler; shuts down on destruction.
class StubJudge {
 public:
  using Handler = std::function<void(const httplib::Request&,
                                     httplib::Response&)>;

  explicit StubJudge(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/rate", [this](const httplib::Request& req,
                                 httplib::Response& res) {
      ++calls_;
      std::lock_guard<std::mutex> lock(mutex_);
      last_body_ = req.body;
      last_auth_ = req.get_header_value("X-Auth");
      handler_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubJudge() {
    server_.stop();
    thread_.join();
  }

  JudgeEndpoint endpoint() const {
    JudgeEndpoint ep;
    ep.host = "127.0.0.1";
    ep.port = port_;
    ep.path = "/rate";
    ep.backoff_base_seconds = 0.0;
    return ep;
  }

  int calls() const { return calls_.load(); }
  std::string last_body() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return last_body_;
  }
  std::string last_auth() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return last_auth_;
  }

 private:
  httplib::Server server_;
  Handler handler_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  mutable std::mutex mutex_;
  std::string last_body_;
  std::string last_auth_;
};

void reply_text(httplib::Response& res, const std::string& text) {
  nlohmann::json body;
  body["text"] = text;
  res.set_content(body.dump(), "application/json");
}

JudgeCase sample_case() {
  JudgeCase c;
  c.prompt_id = "p7";
  c.system_id = "tuned";
  c.text = "prompt: 1 2 3 response: 4 5";
  return c;
}

}  // namespace

TEST_CASE("tier keywords are read case-insensitively at first occurrence") {
  CHECK(parse_tier_reply("Bad") == Tier::Bad);
  CHECK(parse_tier_reply("I'd say: average quality") == Tier::Average);
  CHECK(parse_tier_reply("GOOD") == Tier::Good);
  CHECK(parse_tier_reply("a bad example of a good answer") == Tier::Bad);
  CHECK(parse_tier_reply("overall Good, though average in places") ==
        Tier::Good);
  CHECK(parse_tier_reply("...Average!") == Tier::Average);
}

TEST_CASE("replies without a tier keyword raise the raw text") {
  try {
    (void)parse_tier_reply("excellent!");
    FAIL("expected an unparseable-reply error");
  } catch (const UnparseableReplyError& e) {
    CHECK(e.raw_text() == "excellent!");
  }
  CHECK_THROWS_AS((void)parse_tier_reply(""), UnparseableReplyError);
}

TEST_CASE("a stub that always answers Bad yields a Bad judge rating") {
  StubJudge stub([](const httplib::Request&, httplib::Response& res) {
    reply_text(res, "Bad");
  });
  const RatingRecord record =
      judge_rate(stub.endpoint(), "rate the response", {}, sample_case(), 0);
  CHECK(record.prompt_id == "p7");
  CHECK(record.system_id == "tuned");
  CHECK(record.tier == Tier::Bad);
  CHECK(record.rater == "judge");
  CHECK(stub.calls() == 1);
}

TEST_CASE("the request carries rubric, exemplars, and the case") {
  StubJudge stub([](const httplib::Request&, httplib::Response& res) {
    reply_text(res, "average");
  });
  const std::vector<JudgeExemplar> exemplars = {
      {"a fine reply", Tier::Good}, {"nonsense", Tier::Bad}};
  (void)judge_rate(stub.endpoint(), "the rubric text", exemplars,
                   sample_case(), 0);
  const nlohmann::json body = nlohmann::json::parse(stub.last_body());
  CHECK(body.at("system") == "the rubric text");
  REQUIRE(body.at("examples").size() == 2);
  CHECK(body["examples"][0].at("text") == "a fine reply");
  CHECK(body["examples"][0].at("tier") == "good");
  CHECK(body["examples"][1].at("tier") == "bad");
  CHECK(body.at("case").at("prompt_id") == "p7");
  CHECK(body.at("case").at("system_id") == "tuned");
  CHECK(body.at("case").at("text") == "prompt: 1 2 3 response: 4 5");
}

TEST_CASE("the auth header is forwarded when configured") {
  StubJudge stub([](const httplib::Request&, httplib::Response& res) {
    reply_text(res, "good");
  });
  JudgeEndpoint ep = stub.endpoint();
  ep.auth_header = "X-Auth";
  ep.auth_value = "secret-token";
  (void)judge_rate(ep, "rubric", {}, sample_case(), 0);
  CHECK(stub.last_auth() == "secret-token");
}

TEST_CASE("keywordless answers are not retried") {
  StubJudge stub([](const httplib::Request&, httplib::Response& res) {
    reply_text(res, "splendid work");
  });
  CHECK_THROWS_AS(
      (void)judge_rate(stub.endpoint(), "rubric", {}, sample_case(), 3),
      UnparseableReplyError);
  CHECK(stub.calls() == 1);
}

TEST_CASE("malformed reply bodies are unparseable, not transport failures") {
  StubJudge not_json([](const httplib::Request&, httplib::Response& res) {
    res.set_content("plain text", "text/plain");
  });
  CHECK_THROWS_AS(
      (void)judge_rate(not_json.endpoint(), "rubric", {}, sample_case(), 1),
      UnparseableReplyError);
  CHECK(not_json.calls() == 1);

  StubJudge no_text([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"verdict\":\"good\"}", "application/json");
  });
  CHECK_THROWS_AS(
      (void)judge_rate(no_text.endpoint(), "rubric", {}, sample_case(), 1),
      UnparseableReplyError);
}

TEST_CASE("server errors are retried until a good answer arrives") {
  std::atomic<int> attempt{0};
  StubJudge stub([&attempt](const httplib::Request&, httplib::Response& res) {
    if (attempt++ == 0) {
      res.status = 500;
      res.set_content("overloaded", "text/plain");
      return;
    }
    reply_text(res, "good");
  });
  const RatingRecord record =
      judge_rate(stub.endpoint(), "rubric", {}, sample_case(), 2);
  CHECK(record.tier == Tier::Good);
  CHECK(stub.calls() == 2);
}

TEST_CASE("an unreachable endpoint fails with a transport error after retries") {
  JudgeEndpoint ep;
  ep.host = "127.0.0.1";
  ep.port = 1;  // nothing listens on the reserved port
  ep.backoff_base_seconds = 0.0;
  ep.timeout_seconds = 1;
  try {
    (void)judge_rate(ep, "rubric", {}, sample_case(), 1);
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(std::string(e.what()).find("2 attempts") != std::string::npos);
  }
}

TEST_CASE("a negative retry limit is rejected") {
  JudgeEndpoint ep;
  CHECK_THROWS_AS((void)judge_rate(ep, "rubric", {}, sample_case(), -1),
                  InvalidInputError);
}
