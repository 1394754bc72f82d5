#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace rmtldp {

/// Philox4x32-10 counter-based generator: a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

/// Random stream addressed by (seed, replica, entry): each entry owns one Philox block.
class EntryStream {
 public:
  EntryStream(std::uint64_t seed, std::uint64_t replica)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replica_(replica) {}

  /// Two uniforms in (0, 1) with 53-bit resolution.
  [[nodiscard]] std::pair<double, double> uniforms(std::uint64_t entry) const {
    const auto out = Philox4x32::block(
        {static_cast<std::uint32_t>(entry), static_cast<std::uint32_t>(entry >> 32),
         static_cast<std::uint32_t>(replica_), static_cast<std::uint32_t>(replica_ >> 32)},
        key_);
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
  }

  /// Two independent standard normals by Box-Muller.
  [[nodiscard]] std::pair<double, double> normals(std::uint64_t entry) const {
    const auto [u1, u2] = uniforms(entry);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  static double to_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t replica_;
};

}  // namespace rmtldp
