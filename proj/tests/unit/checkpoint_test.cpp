#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "dqfd/checkpoint.hpp"
#include "gradient_check.hpp"

namespace dqfd {
namespace {

TEST(Checkpoint, StreamRoundTripIsBitExact) {
  Rng rng(1);
  const auto net = test::random_net(QNetShape{80, 100, 32}, rng);
  CheckpointMeta meta{25'000, {{"gamma", "0.9"}, {"mode", "dqfd"}}};
  std::stringstream buf;
  write_checkpoint(buf, net, meta);
  const auto ck = read_checkpoint(buf);
  EXPECT_EQ(ck.net.shape(), net.shape());
  EXPECT_EQ(ck.net.params(), net.params());
  EXPECT_EQ(ck.meta.frame, 25'000);
  EXPECT_EQ(ck.meta.info, meta.info);
}

TEST(Checkpoint, HeaderIsReadableText) {
  QNetwork net(QNetShape{3, 2, 2});
  std::stringstream buf;
  write_checkpoint(buf, net, CheckpointMeta{7, {{"tau", "0.8"}}});
  const auto text = buf.str();
  EXPECT_EQ(text.rfind("dqfd-checkpoint 1\n", 0), 0u);
  EXPECT_NE(text.find("input 3\n"), std::string::npos);
  EXPECT_NE(text.find("frame 7\n"), std::string::npos);
  EXPECT_NE(text.find("meta tau 0.8\n"), std::string::npos);
  EXPECT_NE(text.find("end\n"), std::string::npos);
}

TEST(Checkpoint, FileShapeMismatchRejected) {
  const auto dir = std::filesystem::temp_directory_path() / "dqfd_checkpoint_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "net.ckpt";
  Rng rng(2);
  const auto net = test::random_net(QNetShape{5, 4, 3}, rng);
  save_checkpoint(path, net, {});
  EXPECT_EQ(load_checkpoint(path, QNetShape{5, 4, 3}).net.params(), net.params());
  try {
    load_checkpoint(path, QNetShape{5, 4, 2});
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kShapeMismatch);
  }
  std::filesystem::remove_all(dir);
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kIo);
  }
}

TEST(Checkpoint, CorruptInputsAreFormatErrors) {
  QNetwork net(QNetShape{3, 2, 2});
  std::stringstream buf;
  write_checkpoint(buf, net, {});
  const std::string good = buf.str();
  auto kind_of = [](const std::string& bytes) {
    std::istringstream in(bytes);
    try {
      read_checkpoint(in);
    } catch (const CheckpointError& e) {
      return e.kind();
    }
    return CheckpointError::Kind::kIo;
  };
  EXPECT_EQ(kind_of(""), CheckpointError::Kind::kFormat);
  EXPECT_EQ(kind_of("not-a-checkpoint 1\n"), CheckpointError::Kind::kFormat);
  EXPECT_EQ(kind_of(good.substr(0, good.size() - 4)), CheckpointError::Kind::kFormat);
  std::string wrong_version = good;
  wrong_version[16] = '9';
  EXPECT_EQ(kind_of(wrong_version), CheckpointError::Kind::kFormat);
}

TEST(Checkpoint, MetadataKeysMustBeTokens) {
  QNetwork net(QNetShape{3, 2, 2});
  std::stringstream buf;
  EXPECT_THROW(write_checkpoint(buf, net, CheckpointMeta{0, {{"two words", "x"}}}),
               CheckpointError);
}

}  // namespace
}  // namespace dqfd
