#include "omnirl/checkpoint.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "omnirl/errors.h"

namespace omnirl {
namespace {

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto vocab = Vocabulary::standard();
  auto params = PolicyParams::random(PolicyConfig{}, 21, 0.7);
  params[3] = -0.0;
  params[4] = 1e-310;  // subnormal
  std::stringstream s;
  write_checkpoint(s, vocab, params);
  const auto back = read_checkpoint(s);
  EXPECT_EQ(back.params, params);
  EXPECT_EQ(back.vocab.tokens(), vocab.tokens());
}

TEST(Checkpoint, StartsWithMagic) {
  std::stringstream s;
  write_checkpoint(s, Vocabulary::standard(), PolicyParams(PolicyConfig{}));
  EXPECT_EQ(s.str().rfind(std::string(kCheckpointMagic), 0), 0u);
}

TEST(Checkpoint, RejectsWrongMagicAndTruncation) {
  std::stringstream good;
  write_checkpoint(good, Vocabulary::standard(), PolicyParams::random(PolicyConfig{}, 1));
  std::string text = good.str();

  std::string wrong = text;
  wrong.replace(0, kCheckpointMagic.size(), "OMNIRL-CKPT-v9");
  std::stringstream w(wrong);
  EXPECT_THROW(read_checkpoint(w), FormatError);

  std::stringstream t(text.substr(0, text.size() - 5));
  EXPECT_THROW(read_checkpoint(t), FormatError);

  std::stringstream extra(text + "x");
  EXPECT_THROW(read_checkpoint(extra), FormatError);

  std::stringstream empty;
  EXPECT_THROW(read_checkpoint(empty), FormatError);
}

TEST(Checkpoint, FileRoundTripAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "omnirl_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.bin";
  const auto params = PolicyParams::random(PolicyConfig{}, 5);
  save_checkpoint(path, Vocabulary::standard(), params);
  EXPECT_EQ(load_checkpoint(path).params, params);
  EXPECT_THROW(load_checkpoint(dir / "missing.bin"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace omnirl
