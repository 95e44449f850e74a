#ifndef OMNIRL_JUDGE_H_
#define OMNIRL_JUDGE_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace omnirl::judge {

enum class Outcome { kCandidatePreferred, kTie, kReferencePreferred };
enum class Source { kRubricOracle, kRemote };

struct JudgeVerdict {
  Outcome outcome = Outcome::kTie;
  std::string rationale;
  Source source = Source::kRubricOracle;
};

const char* outcome_name(Outcome o);

// Deterministic stand-in for a rubric-following judge. Scores are a weighted
// mean of three features in [0, 1]: distinct-word ratio, fraction of target
// keywords present, and fit of the word count to [min_words, max_words].
struct Rubric {
  std::string id;
  std::string description;
  std::vector<std::string> keywords;
  int min_words = 1;
  int max_words = 8;
  double weight_distinct = 0.2;
  double weight_keywords = 0.6;
  double weight_length = 0.2;
  double tie_band = 0.05;  // delta
};

// Built-in rubric registry used by the writing task generator.
std::span<const Rubric> builtin_rubrics();
// Throws InputError for unknown ids.
const Rubric& find_rubric(std::string_view id);

// Lowercased alphanumeric words of `text`.
std::vector<std::string> words_of(std::string_view text);

// Deterministic; empty text (no words) scores 0.
double rubric_score(std::string_view text, const Rubric& rubric);

// candidate_preferred iff score(c) > score(r) + delta, reference_preferred iff
// score(r) > score(c) + delta, tie otherwise.
JudgeVerdict oracle_compare(std::string_view candidate, std::string_view reference,
                            const Rubric& rubric);

// Judge request text with the candidate in slot A (or B when swapped). The
// response is expected to end with "VERDICT: A", "VERDICT: B" or
// "VERDICT: TIE".
std::string render_judge_prompt(std::string_view prompt, std::string_view candidate,
                                std::string_view reference, const Rubric& rubric,
                                bool swapped = false);

// Reads the last "VERDICT:" line and maps A/B/TIE through the slot
// assignment. Throws JudgeError when the line is missing or its value is not
// exactly one of A, B, TIE.
JudgeVerdict parse_verdict(std::string_view response, bool candidate_in_a = true);

// Maps a bare "A" | "B" | "TIE" label. Throws JudgeError otherwise.
Outcome outcome_from_label(std::string_view label, bool candidate_in_a);

struct JudgeRequest {
  std::string prompt;
  std::string candidate;
  std::string reference;
  std::string rubric_id;
};

class Judge {
 public:
  virtual ~Judge() = default;
  // Throws JudgeError on transport/protocol failure.
  virtual JudgeVerdict compare(const JudgeRequest& request) = 0;
  // Results line up with `requests`; failed comparisons are nullopt.
  virtual std::vector<std::optional<JudgeVerdict>> compare_batch(std::span<const JudgeRequest> requests);
};

class OracleJudge : public Judge {
 public:
  JudgeVerdict compare(const JudgeRequest& request) override;
};

struct RemoteJudgeConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080"
  std::string token;     // sent as "Authorization: Bearer <token>" when nonempty
  double temperature = 0.4;
  bool both_orders = false;
  int max_in_flight = 4;
  int timeout_seconds = 30;
};

// Client for POST /v1/judge
//   request  {id, prompt, slot_a, slot_b, rubric, temperature}
//   response {id, verdict: "A" | "B" | "TIE", rationale}
// In both-orders mode a second request swaps the slots; disagreement between
// the two verdicts becomes a tie.
class RemoteJudge : public Judge {
 public:
  explicit RemoteJudge(RemoteJudgeConfig config);
  JudgeVerdict compare(const JudgeRequest& request) override;
  std::vector<std::optional<JudgeVerdict>> compare_batch(std::span<const JudgeRequest> requests) override;

 private:
  JudgeVerdict query(const JudgeRequest& request, bool swapped, const std::string& id);

  RemoteJudgeConfig config_;
  std::string host_;
  int port_ = 80;
  std::string base_path_;
};

}  // namespace omnirl::judge

#endif  // OMNIRL_JUDGE_H_
