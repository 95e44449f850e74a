#ifndef OMNIRL_CHECKPOINT_H_
#define OMNIRL_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "omnirl/policy.h"
#include "omnirl/vocabulary.h"

namespace omnirl {

inline constexpr std::string_view kCheckpointMagic = "OMNIRL-CKPT-v1";

struct Checkpoint {
  Vocabulary vocab;
  PolicyParams params;
};

// Layout: the magic line, one line of JSON header (config, vocabulary,
// parameter count), then the parameters as little-endian IEEE-754 doubles.
void write_checkpoint(std::ostream& out, const Vocabulary& vocab, const PolicyParams& params);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab,
                     const PolicyParams& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace omnirl

#endif  // OMNIRL_CHECKPOINT_H_
