#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace layoutc {

// Little-endian bit packing: bit 0 is the LSB of byte 0. Width 1..64.
// Unchecked primitives; callers validate ranges.
uint64_t read_bits_raw(const uint8_t* buf, uint64_t bit_off, uint32_t width);
void write_bits_raw(uint8_t* buf, uint64_t bit_off, uint32_t width, uint64_t value);

struct BitRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bounds-checked forms.
uint64_t read_bits(const std::vector<uint8_t>& buf, uint64_t bit_off, uint32_t width);
void write_bits(std::vector<uint8_t>& buf, uint64_t bit_off, uint32_t width, uint64_t value);

inline uint64_t mask_width(uint32_t width) {
  return width >= 64 ? ~uint64_t(0) : ((uint64_t(1) << width) - 1);
}

// Sign-extends the low `width` bits of x.
inline int64_t sign_extend(uint64_t x, uint32_t width) {
  if (width >= 64) return static_cast<int64_t>(x);
  uint64_t m = uint64_t(1) << (width - 1);
  return static_cast<int64_t>((x ^ m) - m);
}

}  // namespace layoutc
