#ifndef OMNIRL_VOCABULARY_H_
#define OMNIRL_VOCABULARY_H_

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace omnirl {

using TokenId = int;

inline constexpr TokenId kPadToken = 0;
inline constexpr TokenId kBosToken = 1;
inline constexpr TokenId kEosToken = 2;

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

// Character-level token alphabet plus single-token specials and tag markers.
//
// Ids are dense. The first seven ids are always PAD, BOS, EOS and the four
// tag tokens; the remaining ids are single characters. Encoding matches the
// tag strings before falling back to characters, so "<answer>" in text is
// always one token.
class Vocabulary {
 public:
  // The 96-token default: specials, tags, '\n', ' ', digits, letters and
  // 25 punctuation characters ('<', '>', '\\', '^', '`', '{', '}' excluded).
  static Vocabulary standard();
  // Specials and tags followed by the given characters.
  static Vocabulary from_chars(std::string_view chars);
  // Rebuilds a vocabulary from its full token list (checkpoint loading).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const;

  TokenId pad() const { return kPadToken; }
  TokenId bos() const { return kBosToken; }
  TokenId eos() const { return kEosToken; }
  TokenId think_open() const { return 3; }
  TokenId think_close() const { return 4; }
  TokenId answer_open() const { return 5; }
  TokenId answer_close() const { return 6; }
  bool is_special(TokenId id) const { return id >= kPadToken && id <= kEosToken; }

  // Throws InputError on characters outside the vocabulary.
  std::vector<TokenId> encode(std::string_view text) const;
  // Specials are dropped; tag tokens render as their tag strings.
  std::string decode(std::span<const TokenId> ids) const;
  bool can_encode(std::string_view text) const;

 private:
  explicit Vocabulary(std::vector<std::string> tokens);

  std::vector<std::string> tokens_;
  TokenId char_to_id_[256];
};

}  // namespace omnirl

#endif  // OMNIRL_VOCABULARY_H_
