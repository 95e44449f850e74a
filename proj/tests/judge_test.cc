#include "omnirl/judge.h"

#include <gtest/gtest.h>

#include <atomic>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "omnirl/errors.h"

namespace omnirl::judge {
namespace {

// Keyword-only rubric with n keywords k0..k{n-1}: a text naming m of them
// scores exactly m/n.
Rubric keyword_rubric(int n) {
  Rubric r;
  r.id = "kw";
  for (int i = 0; i < n; ++i) r.keywords.push_back("k" + std::to_string(i));
  r.weight_distinct = 0.0;
  r.weight_length = 0.0;
  r.weight_keywords = 1.0;
  return r;
}

std::string naming(int m) {
  std::string s;
  for (int i = 0; i < m; ++i) s += "k" + std::to_string(i) + " ";
  return s;
}

TEST(Rubric, EmptyTextScoresZero) {
  for (const auto& r : builtin_rubrics()) {
    EXPECT_EQ(rubric_score("", r), 0.0);
    EXPECT_EQ(rubric_score("  ,;. ", r), 0.0);
  }
}

TEST(Rubric, Deterministic) {
  const auto& r = find_rubric("nature");
  EXPECT_EQ(rubric_score("sun over the sea", r), rubric_score("sun over the sea", r));
}

TEST(Rubric, KeywordsRaiseTheScore) {
  const auto& r = find_rubric("nature");
  // Same length, both fully distinct words.
  EXPECT_GT(rubric_score("sun sea sky", r), rubric_score("red big old", r));
}

TEST(Rubric, FeatureArithmetic) {
  const auto& r = find_rubric("nature");
  // 4 words, 3 distinct, 1 of 3 keywords, length within [min, max].
  const double want = (0.2 * 0.75 + 0.6 * (1.0 / 3.0) + 0.2 * 1.0) / 1.0;
  EXPECT_NEAR(rubric_score("Sun sun warm day", r), want, 1e-15);
  EXPECT_EQ(words_of("Hi, there!  A1b"), (std::vector<std::string>{"hi", "there", "a1b"}));
}

TEST(Rubric, UnknownIdThrows) { EXPECT_THROW(find_rubric("nope"), InputError); }

TEST(OracleCompare, IdenticalTextsTie) {
  for (const auto& r : builtin_rubrics()) {
    EXPECT_EQ(oracle_compare("sun and sea", "sun and sea", r).outcome, Outcome::kTie);
  }
}

TEST(OracleCompare, ScoreGapBeyondBandPrefersCandidate) {
  const Rubric r = keyword_rubric(10);
  ASSERT_DOUBLE_EQ(rubric_score(naming(9), r), 0.9);
  ASSERT_DOUBLE_EQ(rubric_score(naming(4), r), 0.4);
  EXPECT_EQ(oracle_compare(naming(9), naming(4), r).outcome, Outcome::kCandidatePreferred);
  EXPECT_EQ(oracle_compare(naming(4), naming(9), r).outcome, Outcome::kReferencePreferred);
}

TEST(OracleCompare, GapInsideBandIsTie) {
  const Rubric r = keyword_rubric(50);
  ASSERT_DOUBLE_EQ(rubric_score(naming(25), r), 0.50);
  ASSERT_DOUBLE_EQ(rubric_score(naming(26), r), 0.52);
  EXPECT_EQ(oracle_compare(naming(25), naming(26), r).outcome, Outcome::kTie);
  EXPECT_EQ(oracle_compare(naming(26), naming(25), r).outcome, Outcome::kTie);
}

TEST(OracleCompare, Antisymmetric) {
  const auto& r = find_rubric("city");
  const std::vector<std::string> texts = {"", "car", "car bus", "car bus road", "a b c d e f g h i j", "road road road"};
  for (const auto& a : texts) {
    for (const auto& b : texts) {
      const auto ab = oracle_compare(a, b, r).outcome;
      const auto ba = oracle_compare(b, a, r).outcome;
      if (ab == Outcome::kCandidatePreferred) EXPECT_EQ(ba, Outcome::kReferencePreferred);
      if (ab == Outcome::kReferencePreferred) EXPECT_EQ(ba, Outcome::kCandidatePreferred);
      if (ab == Outcome::kTie) EXPECT_EQ(ba, Outcome::kTie);
    }
  }
}

TEST(JudgePrompt, ByteIdenticalAndSlotted) {
  const auto& r = find_rubric("food");
  const auto a = render_judge_prompt("Write: tea", "CAND", "REF", r);
  EXPECT_EQ(a, render_judge_prompt("Write: tea", "CAND", "REF", r));
  EXPECT_LT(a.find("CAND"), a.find("REF"));
  EXPECT_NE(a.find("[Response A]\nCAND"), std::string::npos);
  const auto s = render_judge_prompt("Write: tea", "CAND", "REF", r, true);
  EXPECT_NE(s.find("[Response A]\nREF"), std::string::npos);
  EXPECT_NE(s.find("[Response B]\nCAND"), std::string::npos);
}

TEST(ParseVerdict, Cases) {
  EXPECT_EQ(parse_verdict("reasons...\nVERDICT: A").outcome, Outcome::kCandidatePreferred);
  EXPECT_EQ(parse_verdict("VERDICT: B").outcome, Outcome::kReferencePreferred);
  EXPECT_EQ(parse_verdict("x\nVERDICT: TIE\n").outcome, Outcome::kTie);
  // Candidate in slot B flips the labels.
  EXPECT_EQ(parse_verdict("VERDICT: A", false).outcome, Outcome::kReferencePreferred);
  EXPECT_EQ(parse_verdict("VERDICT: B", false).outcome, Outcome::kCandidatePreferred);
  // The last line wins.
  EXPECT_EQ(parse_verdict("VERDICT: A\nVERDICT: B").outcome, Outcome::kReferencePreferred);
  EXPECT_THROW(parse_verdict("no verdict"), JudgeError);
  EXPECT_THROW(parse_verdict("VERDICT: A or B"), JudgeError);
  EXPECT_THROW(parse_verdict("VERDICT:"), JudgeError);
}

// In-process stand-in for the remote judge service.
class FakeJudgeServer {
 public:
  explicit FakeJudgeServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/judge", [this, handler](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard<std::mutex> lock(mu_);
        bodies_.push_back(nlohmann::json::parse(req.body));
        auth_.push_back(req.get_header_value("Authorization"));
      }
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeJudgeServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::vector<nlohmann::json> bodies() {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth() {
    std::lock_guard<std::mutex> lock(mu_);
    return auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<nlohmann::json> bodies_;
  std::vector<std::string> auth_;
};

void reply(httplib::Response& res, const nlohmann::json& req, const std::string& verdict) {
  res.set_content(nlohmann::json{{"id", req["id"]}, {"verdict", verdict}, {"rationale", "ok"}}.dump(),
                  "application/json");
}

JudgeRequest sample_request() { return {"Write: sun", "sun sea sky", "sun", "nature"}; }

TEST(RemoteJudge, SendsProtocolFieldsAndMapsVerdict) {
  FakeJudgeServer server([](const httplib::Request& req, httplib::Response& res) {
    reply(res, nlohmann::json::parse(req.body), "A");
  });
  RemoteJudgeConfig c;
  c.endpoint = server.endpoint();
  c.token = "secret";
  RemoteJudge judge(c);
  const auto v = judge.compare(sample_request());
  EXPECT_EQ(v.outcome, Outcome::kCandidatePreferred);
  EXPECT_EQ(v.source, Source::kRemote);
  const auto bodies = server.bodies();
  ASSERT_EQ(bodies.size(), 1u);
  const auto& b = bodies[0];
  for (const char* key : {"id", "prompt", "slot_a", "slot_b", "rubric", "temperature"}) EXPECT_TRUE(b.contains(key)) << key;
  EXPECT_EQ(b["slot_a"], "sun sea sky");
  EXPECT_EQ(b["slot_b"], "sun");
  EXPECT_EQ(b["rubric"], "nature");
  EXPECT_DOUBLE_EQ(b["temperature"].get<double>(), 0.4);
  EXPECT_EQ(server.auth()[0], "Bearer secret");
}

TEST(RemoteJudge, BothOrdersDisagreementBecomesTie) {
  // Always answers "A": position bias.
  FakeJudgeServer server([](const httplib::Request& req, httplib::Response& res) {
    reply(res, nlohmann::json::parse(req.body), "A");
  });
  RemoteJudgeConfig c;
  c.endpoint = server.endpoint();
  c.both_orders = true;
  RemoteJudge judge(c);
  EXPECT_EQ(judge.compare(sample_request()).outcome, Outcome::kTie);
  const auto bodies = server.bodies();
  ASSERT_EQ(bodies.size(), 2u);
  EXPECT_EQ(bodies[1]["slot_a"], "sun");
  EXPECT_EQ(bodies[1]["slot_b"], "sun sea sky");
}

TEST(RemoteJudge, BothOrdersAgreementIsKept) {
  // Prefers whichever slot holds the longer text.
  FakeJudgeServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto b = nlohmann::json::parse(req.body);
    const bool a_longer = b["slot_a"].get<std::string>().size() > b["slot_b"].get<std::string>().size();
    reply(res, b, a_longer ? "A" : "B");
  });
  RemoteJudgeConfig c;
  c.endpoint = server.endpoint();
  c.both_orders = true;
  RemoteJudge judge(c);
  EXPECT_EQ(judge.compare(sample_request()).outcome, Outcome::kCandidatePreferred);
}

TEST(RemoteJudge, ProtocolFailuresThrow) {
  std::atomic<int> mode{0};
  FakeJudgeServer server([&](const httplib::Request& req, httplib::Response& res) {
    const auto b = nlohmann::json::parse(req.body);
    switch (mode.load()) {
      case 0: res.status = 500; break;
      case 1: res.set_content("not json", "text/plain"); break;
      case 2: res.set_content(nlohmann::json{{"id", "other"}, {"verdict", "A"}}.dump(), "application/json"); break;
      default: reply(res, b, "MAYBE");
    }
  });
  RemoteJudgeConfig c;
  c.endpoint = server.endpoint();
  RemoteJudge judge(c);
  for (int m = 0; m < 4; ++m) {
    mode = m;
    EXPECT_THROW(judge.compare(sample_request()), JudgeError) << m;
  }
}

TEST(RemoteJudge, UnreachableEndpointThrowsAndBatchYieldsNullopt) {
  RemoteJudgeConfig c;
  c.endpoint = "http://127.0.0.1:1";
  c.timeout_seconds = 2;
  RemoteJudge judge(c);
  EXPECT_THROW(judge.compare(sample_request()), JudgeError);
  const std::vector<JudgeRequest> reqs = {sample_request(), sample_request()};
  const auto out = judge.compare_batch(reqs);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_FALSE(out[0].has_value());
  EXPECT_FALSE(out[1].has_value());
}

TEST(RemoteJudge, BatchResultsLineUpWithRequests) {
  FakeJudgeServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto b = nlohmann::json::parse(req.body);
    reply(res, b, b["slot_a"] == "win" ? "A" : "B");
  });
  RemoteJudgeConfig c;
  c.endpoint = server.endpoint();
  c.max_in_flight = 3;
  RemoteJudge judge(c);
  std::vector<JudgeRequest> reqs;
  for (int i = 0; i < 12; ++i) reqs.push_back({"p", i % 3 == 0 ? "win" : "lose", "ref", "nature"});
  const auto out = judge.compare_batch(reqs);
  for (size_t i = 0; i < reqs.size(); ++i) {
    ASSERT_TRUE(out[i].has_value());
    EXPECT_EQ(out[i]->outcome, i % 3 == 0 ? Outcome::kCandidatePreferred : Outcome::kReferencePreferred) << i;
  }
}

TEST(RemoteJudge, BadEndpointIsConfigError) {
  RemoteJudgeConfig c;
  c.endpoint = "https://x";
  EXPECT_THROW(RemoteJudge{c}, ConfigError);
  c.endpoint = "http://";
  EXPECT_THROW(RemoteJudge{c}, ConfigError);
  c.endpoint = "http://h:port";
  EXPECT_THROW(RemoteJudge{c}, ConfigError);
}

}  // namespace
}  // namespace omnirl::judge
