#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace dgof::rng {

/// Identifier of the pseudorandom algorithm, embedded in every report so
/// published P-values can be reproduced.
inline constexpr std::string_view kRngId = "philox4x32-10";

/// One Philox4x32-10 block: 128 counter bits + 64 key bits -> 128 output bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Seed-derivation domains. Streams with different domains never collide,
/// so e.g. adding ordering trials does not perturb simulated experiments.
enum class Domain : std::uint32_t {
  simulation = 1,
  ordering = 2,
  theory = 3,
  data = 4,
};

// A counter-based stream: the (seed, domain, stream) triple selects a
// substream with 2^64 blocks, so every simulation index can own an
// independent stream and results do not depend on scheduling.
class Stream {
 public:
  Stream(std::uint64_t seed, Domain domain, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in (0, 1], 53-bit resolution.
  double next_unit();

  /// Uniform integer in [0, bound); unbiased (Lemire rejection). bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> high_;  // stream index + domain tag
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  unsigned pos_ = 4;
};

}  // namespace dgof::rng
