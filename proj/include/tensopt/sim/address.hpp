#pragma once

#include <cstdint>

namespace tensopt::sim {

enum class Space { Scratchpad, Accumulator };
enum class Access { Read, Write };

struct LocalAddress {
  std::uint32_t raw = 0;
  Space space = Space::Scratchpad;
  bool accumulate = false;       // accumulator writes with bit 30
  bool full_width_read = false;  // accumulator reads with bit 29
  std::uint32_t row = 0;         // bits 0..28

  bool operator==(const LocalAddress&) const = default;
};

constexpr std::uint32_t kNoAddress = 0xffffffffu;
constexpr std::uint32_t kAccBit = 1u << 31;
constexpr std::uint32_t kAccumulateBit = 1u << 30;
constexpr std::uint32_t kFullWidthBit = 1u << 29;
constexpr std::uint32_t kRowMask = 0x1fffffffu;

LocalAddress decode_local_address(std::uint32_t raw, Access access);

/// Inverse of decode for valid inputs. Flags that do not apply to the
/// (space, access) pair are dropped.
std::uint32_t encode_local_address(Space space, std::uint32_t row, bool accumulate = false,
                                   bool full_width_read = false);

}  // namespace tensopt::sim
