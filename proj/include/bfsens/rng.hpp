#pragma once

// Philox4x32-10 counter-based generator. A stream is fully determined by the
// 64-bit key (the run seed) and the upper half of the counter (the stream id),
// so chains can run on any thread in any order.

#include <array>
#include <cstdint>
#include <limits>

namespace bfsens {

class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == 2) {
      block_ = generate(counter(index_++), key_);
      used_ = 0;
    }
    const result_type hi = block_[2 * used_ + 1];
    const result_type lo = block_[2 * used_];
    ++used_;
    return (hi << 32) | lo;
  }

  // Ten rounds of the Philox bijection on one counter block.
  static Block generate(Block ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  Block counter(std::uint64_t i) const {
    return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  }

  Key key_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  Block block_{};
  int used_ = 2;
};

}  // namespace bfsens
