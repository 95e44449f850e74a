#include "omnirl/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "omnirl/errors.h"

namespace omnirl {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

}  // namespace

void write_checkpoint(std::ostream& out, const Vocabulary& vocab, const PolicyParams& params) {
  const PolicyConfig& c = params.config();
  if (c.vocab_size != vocab.size()) throw InputError("vocabulary size does not match policy config");
  json header = {
      {"format", std::string(kCheckpointMagic)},
      {"config",
       {{"vocab_size", c.vocab_size},
        {"embed_dim", c.embed_dim},
        {"context", c.context},
        {"hidden", c.hidden}}},
      {"vocabulary", vocab.tokens()},
      {"parameter_count", params.size()},
      {"encoding", "f64le"},
  };
  out << kCheckpointMagic << '\n' << header.dump() << '\n';
  const auto v = params.values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!out) throw IoError("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic)) throw FormatError("empty checkpoint");
  if (magic != kCheckpointMagic) {
    throw FormatError("unsupported checkpoint format '" + magic.substr(0, 32) + "', expected " +
                      std::string(kCheckpointMagic));
  }
  std::string header_line;
  if (!std::getline(in, header_line)) throw FormatError("checkpoint header missing");
  json header;
  try {
    header = json::parse(header_line);
    PolicyConfig c;
    c.vocab_size = header.at("config").at("vocab_size").get<int>();
    c.embed_dim = header.at("config").at("embed_dim").get<int>();
    c.context = header.at("config").at("context").get<int>();
    c.hidden = header.at("config").at("hidden").get<int>();
    if (header.at("encoding").get<std::string>() != "f64le") throw FormatError("unknown encoding");
    auto vocab = Vocabulary::from_tokens(header.at("vocabulary").get<std::vector<std::string>>());
    if (vocab.size() != c.vocab_size) throw FormatError("vocabulary size mismatch in checkpoint");
    PolicyParams params(c);
    if (header.at("parameter_count").get<size_t>() != params.size()) {
      throw FormatError("parameter count does not match config");
    }
    auto v = params.values();
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double))) {
      throw FormatError("checkpoint truncated");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in checkpoint");
    return Checkpoint{std::move(vocab), std::move(params)};
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab,
                     const PolicyParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, vocab, params);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace omnirl
