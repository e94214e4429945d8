#include "tensopt/sim/address.hpp"

namespace tensopt::sim {

LocalAddress decode_local_address(std::uint32_t raw, Access access) {
  LocalAddress a;
  a.raw = raw;
  a.row = raw & kRowMask;
  if (raw & kAccBit) {
    a.space = Space::Accumulator;
    a.accumulate = access == Access::Write && (raw & kAccumulateBit);
    a.full_width_read = access == Access::Read && (raw & kFullWidthBit);
  }
  return a;
}

std::uint32_t encode_local_address(Space space, std::uint32_t row, bool accumulate,
                                   bool full_width_read) {
  std::uint32_t raw = row & kRowMask;
  if (space == Space::Accumulator) {
    raw |= kAccBit;
    if (accumulate) raw |= kAccumulateBit;
    if (full_width_read) raw |= kFullWidthBit;
  }
  return raw;
}

}  // namespace tensopt::sim
