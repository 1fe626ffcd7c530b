#include "autohedge/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

constexpr char kMagic[8] = {'A', 'H', 'S', 'A', 'C', 'C', 'K', '\0'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
  }
  void u32(std::size_t v) { put(static_cast<std::uint32_t>(v)); }
  void f64(double v) { put(v); }
  void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
  void doubles(const std::vector<double>& values) {
    put(static_cast<std::uint64_t>(values.size()));
    for (double v : values) f64(v);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  double f64() { return get<double>(); }
  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    const auto n = get<std::uint64_t>();
    if (n > (bytes_.size() - pos_) / sizeof(double)) throw IoError("checkpoint: truncated array");
    std::vector<double> out(n);
    for (auto& v : out) v = f64();
    return out;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw IoError("checkpoint: unexpected end of data");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const SacAgent& agent, const std::string& env_tag) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u32(env_tag.size());
  w.raw(env_tag.data(), env_tag.size());
  w.u32(static_cast<std::size_t>(agent.obs_dim));
  w.u32(static_cast<std::size_t>(agent.act_dim));
  for (double v : agent.action_low) w.f64(v);
  for (double v : agent.action_high) w.f64(v);
  const auto& h = agent.hyper;
  w.u32(h.hidden.size());
  for (int width : h.hidden) w.u32(static_cast<std::size_t>(width));
  w.f64(h.gamma);
  w.f64(h.tau);
  w.f64(h.alpha);
  w.put<std::uint8_t>(h.auto_alpha ? 1 : 0);
  w.put<std::uint8_t>(h.target_entropy ? 1 : 0);
  w.f64(h.target_entropy.value_or(0.0));
  w.f64(h.lr_policy);
  w.f64(h.lr_q);
  w.f64(h.lr_alpha);
  for (int v : {h.batch_size, h.replay_capacity, h.warmup_steps, h.updates_per_step, h.epochs,
                h.steps_per_epoch}) {
    w.u32(static_cast<std::size_t>(v));
  }
  w.f64(h.reward_scale);
  w.put<std::uint64_t>(agent.seed);
  w.f64(agent.log_alpha);
  for (const Mlp* net : {&agent.policy, &agent.q1, &agent.q2, &agent.q1_target, &agent.q2_target}) {
    w.doubles(net->flat_parameters());
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.string(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw IoError("checkpoint: bad magic");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  }
  Checkpoint out;
  out.env_tag = r.string(r.u32());
  const int obs_dim = static_cast<int>(r.u32());
  const int act_dim = static_cast<int>(r.u32());
  if (obs_dim < 1 || act_dim < 1 || obs_dim > 1 << 16 || act_dim > 1 << 16) {
    throw IoError("checkpoint: implausible dimensions");
  }
  std::vector<double> low(act_dim), high(act_dim);
  for (auto& v : low) v = r.f64();
  for (auto& v : high) v = r.f64();
  SacHyper h;
  const auto n_hidden = r.u32();
  if (n_hidden > 64) throw IoError("checkpoint: implausible layer count");
  h.hidden.resize(n_hidden);
  for (auto& width : h.hidden) width = static_cast<int>(r.u32());
  h.gamma = r.f64();
  h.tau = r.f64();
  h.alpha = r.f64();
  h.auto_alpha = r.get<std::uint8_t>() != 0;
  const bool has_target = r.get<std::uint8_t>() != 0;
  const double target = r.f64();
  if (has_target) h.target_entropy = target;
  h.lr_policy = r.f64();
  h.lr_q = r.f64();
  h.lr_alpha = r.f64();
  for (int* v : {&h.batch_size, &h.replay_capacity, &h.warmup_steps, &h.updates_per_step, &h.epochs,
                 &h.steps_per_epoch}) {
    *v = static_cast<int>(r.u32());
  }
  h.reward_scale = r.f64();
  const auto seed = r.get<std::uint64_t>();

  SacAgent agent;
  try {
    agent = make_agent(obs_dim, act_dim, low, high, h, seed);
  } catch (const Error& e) {
    throw IoError(std::string("checkpoint: invalid header: ") + e.what());
  }
  agent.log_alpha = r.f64();
  for (Mlp* net : {&agent.policy, &agent.q1, &agent.q2, &agent.q1_target, &agent.q2_target}) {
    const auto values = r.doubles();
    try {
      net->set_flat_parameters(values);
    } catch (const Error& e) {
      throw IoError(std::string("checkpoint: ") + e.what());
    }
  }
  if (!r.at_end()) throw IoError("checkpoint: trailing bytes");
  out.agent = std::move(agent);
  return out;
}

void save_checkpoint(const SacAgent& agent, const std::filesystem::path& path,
                     const std::string& env_tag) {
  const auto bytes = serialize_checkpoint(agent, env_tag);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace autohedge
