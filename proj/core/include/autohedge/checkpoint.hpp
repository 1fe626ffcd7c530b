#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "autohedge/sac.hpp"

namespace autohedge {

// Binary checkpoint layout, every field little-endian:
//
//   char[8]   magic "AHSACCK\0"
//   u32       format version (kCheckpointVersion)
//   u32       env tag length, followed by that many bytes (mode name)
//   u32       obs_dim
//   u32       act_dim
//   f64[act]  action_low
//   f64[act]  action_high
//   u32       hidden layer count, followed by u32 widths
//   f64       gamma, tau, alpha
//   u8        auto_alpha, has_target_entropy
//   f64       target_entropy (0 when absent)
//   f64       lr_policy, lr_q, lr_alpha
//   u32       batch_size, replay_capacity, warmup_steps, updates_per_step,
//             epochs, steps_per_epoch
//   f64       reward_scale
//   u64       seed
//   f64       log_alpha
//   5 x { u64 count, f64[count] }  policy, q1, q2, q1_target, q2_target
//                                  parameters in Mlp::flat_parameters order
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  SacAgent agent;
  std::string env_tag;
};

std::vector<std::uint8_t> serialize_checkpoint(const SacAgent& agent, const std::string& env_tag);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const SacAgent& agent, const std::filesystem::path& path,
                     const std::string& env_tag = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace autohedge
