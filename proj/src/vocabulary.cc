#include "omnirl/vocabulary.h"

#include <array>

#include "omnirl/errors.h"

namespace omnirl {
namespace {

constexpr std::array<std::string_view, 7> kSpecialTokens = {
    "<pad>", "<bos>", "<eos>", kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose};

constexpr int kMaxVocab = 512;

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() > kMaxVocab) throw InputError("vocabulary exceeds 512 tokens");
  if (tokens_.size() < kSpecialTokens.size()) throw InputError("vocabulary missing special tokens");
  for (size_t i = 0; i < kSpecialTokens.size(); ++i) {
    if (tokens_[i] != kSpecialTokens[i]) throw InputError("vocabulary special tokens out of order");
  }
  for (auto& id : char_to_id_) id = -1;
  for (size_t i = kSpecialTokens.size(); i < tokens_.size(); ++i) {
    if (tokens_[i].size() != 1) throw InputError("non-special tokens must be single characters");
    const auto c = static_cast<unsigned char>(tokens_[i][0]);
    if (c == '<' || c == '>') throw InputError("'<' and '>' are reserved for tag tokens");
    if (char_to_id_[c] != -1) throw InputError("duplicate vocabulary character");
    char_to_id_[c] = static_cast<TokenId>(i);
  }
}

Vocabulary Vocabulary::standard() {
  std::string chars = "\n ";
  for (char c = '0'; c <= '9'; ++c) chars += c;
  for (char c = 'a'; c <= 'z'; ++c) chars += c;
  for (char c = 'A'; c <= 'Z'; ++c) chars += c;
  chars += "!\"#$%&'()*+,-./:;=?@[]_|~";
  return from_chars(chars);
}

Vocabulary Vocabulary::from_chars(std::string_view chars) {
  std::vector<std::string> tokens(kSpecialTokens.begin(), kSpecialTokens.end());
  for (char c : chars) tokens.emplace_back(1, c);
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  return Vocabulary(std::move(tokens));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) throw InputError("token id out of range: " + std::to_string(id));
  return tokens_[static_cast<size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    if (text[i] == '<') {
      for (TokenId t = think_open(); t <= answer_close(); ++t) {
        const std::string& tag = tokens_[static_cast<size_t>(t)];
        if (text.substr(i, tag.size()) == tag) {
          out.push_back(t);
          i += tag.size();
          matched = true;
          break;
        }
      }
    }
    if (matched) continue;
    const TokenId id = char_to_id_[static_cast<unsigned char>(text[i])];
    if (id < 0) {
      throw InputError("character not in vocabulary: code " +
                       std::to_string(static_cast<unsigned char>(text[i])));
    }
    out.push_back(id);
    ++i;
  }
  return out;
}

bool Vocabulary::can_encode(std::string_view text) const {
  try {
    encode(text);
    return true;
  } catch (const InputError&) {
    return false;
  }
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    const std::string& tok = token(id);
    if (is_special(id)) continue;
    out += tok;
  }
  return out;
}

}  // namespace omnirl
