#include "omnirl/judge.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "omnirl/errors.h"

namespace omnirl::judge {
namespace {

using nlohmann::json;

const std::vector<Rubric>& registry() {
  static const std::vector<Rubric> kRubrics = [] {
    auto make = [](std::string id, std::string desc, std::vector<std::string> kw) {
      Rubric r;
      r.id = std::move(id);
      r.description = std::move(desc);
      r.keywords = std::move(kw);
      r.min_words = 3;
      r.max_words = 6;
      return r;
    };
    return std::vector<Rubric>{
        make("nature", "mentions sun, sea and sky in 3-6 varied words", {"sun", "sea", "sky"}),
        make("city", "mentions car, bus and road in 3-6 varied words", {"car", "bus", "road"}),
        make("food", "mentions tea, jam and pie in 3-6 varied words", {"tea", "jam", "pie"}),
        make("mood", "mentions joy, calm and hope in 3-6 varied words", {"joy", "calm", "hope"}),
        make("night", "mentions moon, star and owl in 3-6 varied words", {"moon", "star", "owl"}),
        make("farm", "mentions cow, hen and hay in 3-6 varied words", {"cow", "hen", "hay"}),
    };
  }();
  return kRubrics;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kCandidatePreferred: return "candidate_preferred";
    case Outcome::kTie: return "tie";
    case Outcome::kReferencePreferred: return "reference_preferred";
  }
  return "unknown";
}

std::span<const Rubric> builtin_rubrics() { return registry(); }

const Rubric& find_rubric(std::string_view id) {
  for (const Rubric& r : registry()) {
    if (r.id == id) return r;
  }
  throw InputError("unknown rubric id: " + std::string(id));
}

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double rubric_score(std::string_view text, const Rubric& rubric) {
  const auto words = words_of(text);
  const double total_weight = rubric.weight_distinct + rubric.weight_keywords + rubric.weight_length;
  if (words.empty() || total_weight <= 0.0) return 0.0;

  const std::set<std::string> distinct(words.begin(), words.end());
  const double distinct_ratio = static_cast<double>(distinct.size()) / static_cast<double>(words.size());

  double keyword_fraction = 0.0;
  if (!rubric.keywords.empty()) {
    int hits = 0;
    for (const auto& kw : rubric.keywords) hits += distinct.count(kw) ? 1 : 0;
    keyword_fraction = static_cast<double>(hits) / static_cast<double>(rubric.keywords.size());
  }

  const double n = static_cast<double>(words.size());
  double length_fit = 1.0;
  if (n < rubric.min_words) {
    length_fit = n / rubric.min_words;
  } else if (n > rubric.max_words) {
    length_fit = rubric.max_words / n;
  }

  return (rubric.weight_distinct * distinct_ratio + rubric.weight_keywords * keyword_fraction +
          rubric.weight_length * length_fit) /
         total_weight;
}

JudgeVerdict oracle_compare(std::string_view candidate, std::string_view reference,
                            const Rubric& rubric) {
  const double sc = rubric_score(candidate, rubric);
  const double sr = rubric_score(reference, rubric);
  JudgeVerdict v;
  v.source = Source::kRubricOracle;
  if (sc > sr + rubric.tie_band) {
    v.outcome = Outcome::kCandidatePreferred;
  } else if (sr > sc + rubric.tie_band) {
    v.outcome = Outcome::kReferencePreferred;
  } else {
    v.outcome = Outcome::kTie;
  }
  std::ostringstream why;
  why.precision(6);
  why << "candidate " << sc << " vs reference " << sr << " (band " << rubric.tie_band << ")";
  v.rationale = why.str();
  return v;
}

std::string render_judge_prompt(std::string_view prompt, std::string_view candidate,
                                std::string_view reference, const Rubric& rubric, bool swapped) {
  const std::string_view a = swapped ? reference : candidate;
  const std::string_view b = swapped ? candidate : reference;
  std::string out;
  out += "You are comparing two responses to the same prompt.\n";
  out += "Rubric (" + rubric.id + "): " + rubric.description + "\n";
  out += "[Prompt]\n";
  out += prompt;
  out += "\n[Response A]\n";
  out += a;
  out += "\n[Response B]\n";
  out += b;
  out += "\n[Instructions]\n";
  out += "Reason step by step about which response better satisfies the rubric. ";
  out += "Finish with one final line: VERDICT: A, VERDICT: B, or VERDICT: TIE.\n";
  return out;
}

Outcome outcome_from_label(std::string_view label, bool candidate_in_a) {
  const std::string v = trim(label);
  if (v == "TIE") return Outcome::kTie;
  if (v == "A") return candidate_in_a ? Outcome::kCandidatePreferred : Outcome::kReferencePreferred;
  if (v == "B") return candidate_in_a ? Outcome::kReferencePreferred : Outcome::kCandidatePreferred;
  throw JudgeError("ambiguous verdict '" + v + "'");
}

JudgeVerdict parse_verdict(std::string_view response, bool candidate_in_a) {
  constexpr std::string_view kPrefix = "VERDICT:";
  std::optional<std::string> last;
  size_t start = 0;
  while (start <= response.size()) {
    size_t end = response.find('\n', start);
    if (end == std::string_view::npos) end = response.size();
    const std::string line = trim(response.substr(start, end - start));
    if (line.starts_with(kPrefix)) last = line.substr(kPrefix.size());
    if (end == response.size()) break;
    start = end + 1;
  }
  if (!last) throw JudgeError("no VERDICT line in judge response");
  JudgeVerdict v;
  v.outcome = outcome_from_label(*last, candidate_in_a);
  v.rationale = std::string(response);
  v.source = Source::kRemote;
  return v;
}

std::vector<std::optional<JudgeVerdict>> Judge::compare_batch(std::span<const JudgeRequest> requests) {
  std::vector<std::optional<JudgeVerdict>> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    try {
      out.emplace_back(compare(r));
    } catch (const JudgeError& e) {
      std::cerr << "judge: " << e.what() << "\n";
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

JudgeVerdict OracleJudge::compare(const JudgeRequest& request) {
  return oracle_compare(request.candidate, request.reference, find_rubric(request.rubric_id));
}

RemoteJudge::RemoteJudge(RemoteJudgeConfig config) : config_(std::move(config)) {
  std::string_view ep = config_.endpoint;
  if (!ep.starts_with("http://")) throw ConfigError("remote judge endpoint must start with http://");
  ep.remove_prefix(7);
  const size_t slash = ep.find('/');
  std::string_view hostport = ep.substr(0, slash);
  base_path_ = slash == std::string_view::npos ? "" : std::string(ep.substr(slash));
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  const size_t colon = hostport.rfind(':');
  if (colon == std::string_view::npos) {
    host_ = std::string(hostport);
  } else {
    host_ = std::string(hostport.substr(0, colon));
    try {
      port_ = std::stoi(std::string(hostport.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("bad port in remote judge endpoint");
    }
  }
  if (host_.empty()) throw ConfigError("remote judge endpoint has no host");
  if (config_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

JudgeVerdict RemoteJudge::query(const JudgeRequest& request, bool swapped, const std::string& id) {
  const Rubric& rubric = find_rubric(request.rubric_id);
  const json body = {
      {"id", id},
      {"prompt", render_judge_prompt(request.prompt, request.candidate, request.reference, rubric, swapped)},
      {"slot_a", swapped ? request.reference : request.candidate},
      {"slot_b", swapped ? request.candidate : request.reference},
      {"rubric", rubric.id},
      {"temperature", config_.temperature},
  };
  httplib::Client client(host_, port_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
  auto res = client.Post(base_path_ + "/v1/judge", headers, body.dump(), "application/json");
  if (!res) throw JudgeError("judge transport failure: " + httplib::to_string(res.error()));
  if (res->status != 200) throw JudgeError("judge returned HTTP " + std::to_string(res->status));
  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::exception&) {
    throw JudgeError("judge response is not JSON");
  }
  if (!reply.is_object() || !reply.contains("id") || !reply.contains("verdict") ||
      !reply["id"].is_string() || !reply["verdict"].is_string()) {
    throw JudgeError("judge response missing id/verdict");
  }
  if (reply["id"].get<std::string>() != id) throw JudgeError("judge response id mismatch");
  JudgeVerdict v;
  v.outcome = outcome_from_label(reply["verdict"].get<std::string>(), !swapped);
  if (reply.contains("rationale") && reply["rationale"].is_string()) v.rationale = reply["rationale"];
  v.source = Source::kRemote;
  return v;
}

JudgeVerdict RemoteJudge::compare(const JudgeRequest& request) {
  static std::atomic<uint64_t> counter{0};
  const std::string id = "req-" + std::to_string(counter.fetch_add(1));
  JudgeVerdict first = query(request, false, id + "-ab");
  if (!config_.both_orders) return first;
  JudgeVerdict second = query(request, true, id + "-ba");
  if (first.outcome != second.outcome) {
    first.outcome = Outcome::kTie;
    first.rationale = "order disagreement: " + first.rationale + " | " + second.rationale;
  }
  return first;
}

std::vector<std::optional<JudgeVerdict>> RemoteJudge::compare_batch(std::span<const JudgeRequest> requests) {
  std::vector<std::optional<JudgeVerdict>> out(requests.size());
  std::vector<std::string> errors(requests.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      try {
        out[i] = compare(requests[i]);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  const size_t n = std::min(requests.size(), static_cast<size_t>(config_.max_in_flight));
  std::vector<std::thread> pool;
  for (size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) std::cerr << "judge: request " << i << ": " << errors[i] << "\n";
  }
  return out;
}

}  // namespace omnirl::judge
