#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "autohedge/checkpoint.hpp"
#include "autohedge/error.hpp"

using namespace autohedge;

namespace {

SacAgent sample_agent() {
  SacHyper h;
  h.hidden = {7, 5};
  h.gamma = 0.97;
  h.tau = 0.01;
  h.auto_alpha = true;
  h.target_entropy = -1.5;
  h.batch_size = 64;
  h.reward_scale = 0.01;
  auto a = make_agent(3, 2, {-10.0, -1.0}, {10.0, 1.0}, h, 0xDEADBEEFull);
  a.log_alpha = -1.2345678901234567;
  // make the targets differ from the online nets
  a.q1_target.layers()[0].bias(0) = 0.1 / 3.0;
  a.q2_target.layers()[1].weight(1, 2) = -7.0 / 9.0;
  return a;
}

void expect_same(const SacAgent& a, const SacAgent& b) {
  EXPECT_EQ(a.obs_dim, b.obs_dim);
  EXPECT_EQ(a.act_dim, b.act_dim);
  EXPECT_EQ(a.action_low, b.action_low);
  EXPECT_EQ(a.action_high, b.action_high);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(std::memcmp(&a.log_alpha, &b.log_alpha, sizeof(double)), 0);
  EXPECT_EQ(a.hyper.hidden, b.hyper.hidden);
  EXPECT_EQ(a.hyper.gamma, b.hyper.gamma);
  EXPECT_EQ(a.hyper.tau, b.hyper.tau);
  EXPECT_EQ(a.hyper.auto_alpha, b.hyper.auto_alpha);
  EXPECT_EQ(a.hyper.target_entropy, b.hyper.target_entropy);
  EXPECT_EQ(a.hyper.batch_size, b.hyper.batch_size);
  EXPECT_EQ(a.hyper.reward_scale, b.hyper.reward_scale);
  EXPECT_EQ(a.policy.flat_parameters(), b.policy.flat_parameters());
  EXPECT_EQ(a.q1.flat_parameters(), b.q1.flat_parameters());
  EXPECT_EQ(a.q2.flat_parameters(), b.q2.flat_parameters());
  EXPECT_EQ(a.q1_target.flat_parameters(), b.q1_target.flat_parameters());
  EXPECT_EQ(a.q2_target.flat_parameters(), b.q2_target.flat_parameters());
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto a = sample_agent();
  const auto bytes = serialize_checkpoint(a, "skew");
  const auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.env_tag, "skew");
  expect_same(a, back.agent);
  EXPECT_EQ(serialize_checkpoint(back.agent, back.env_tag), bytes);
}

TEST(Checkpoint, HeaderLayout) {
  const auto bytes = serialize_checkpoint(sample_agent(), "single");
  ASSERT_GT(bytes.size(), 24u);
  EXPECT_EQ(std::memcmp(bytes.data(), "AHSACCK\0", 8), 0);
  // little-endian u32 version
  EXPECT_EQ(bytes[8], kCheckpointVersion & 0xFF);
  EXPECT_EQ(bytes[9], 0);
  EXPECT_EQ(bytes[12], 6);  // tag length
  EXPECT_EQ(std::string(bytes.begin() + 16, bytes.begin() + 22), "single");
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "autohedge_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "agent.ckpt";
  const auto a = sample_agent();
  save_checkpoint(a, path, "portfolio");
  const auto back = load_checkpoint(path);
  EXPECT_EQ(back.env_tag, "portfolio");
  expect_same(a, back.agent);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RejectsBadMagic) {
  auto bytes = serialize_checkpoint(sample_agent(), "single");
  bytes[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bytes), IoError);
}

TEST(Checkpoint, RejectsUnknownVersion) {
  auto bytes = serialize_checkpoint(sample_agent(), "single");
  bytes[8] = static_cast<std::uint8_t>(kCheckpointVersion + 1);
  EXPECT_THROW(deserialize_checkpoint(bytes), IoError);
}

TEST(Checkpoint, RejectsTruncationAndTrailingBytes) {
  const auto bytes = serialize_checkpoint(sample_agent(), "single");
  for (std::size_t cut : {std::size_t{4}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    std::vector<std::uint8_t> shorter(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(deserialize_checkpoint(shorter), IoError) << cut;
  }
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(deserialize_checkpoint(longer), IoError);
}

TEST(Checkpoint, MissingFileIsIoError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/model.ckpt"), IoError);
}
