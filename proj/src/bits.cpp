#include "layoutc/bits.hpp"

#include <cstring>

namespace layoutc {

uint64_t read_bits_raw(const uint8_t* buf, uint64_t bit_off, uint32_t width) {
  uint64_t byte = bit_off >> 3;
  uint32_t shift = static_cast<uint32_t>(bit_off & 7);
  // A 64-bit field at shift 0 touches 8 bytes; otherwise up to 9.
  uint64_t lo;
  std::memcpy(&lo, buf + byte, 8);
  uint64_t v = lo >> shift;
  if (shift != 0 && shift + width > 64) {
    uint64_t hi = buf[byte + 8];
    v |= hi << (64 - shift);
  }
  return v & mask_width(width);
}

void write_bits_raw(uint8_t* buf, uint64_t bit_off, uint32_t width, uint64_t value) {
  uint64_t byte = bit_off >> 3;
  uint32_t shift = static_cast<uint32_t>(bit_off & 7);
  uint64_t m = mask_width(width);
  value &= m;
  uint64_t lo;
  std::memcpy(&lo, buf + byte, 8);
  lo = (lo & ~(m << shift)) | (value << shift);
  std::memcpy(buf + byte, &lo, 8);
  if (shift != 0 && shift + width > 64) {
    uint32_t spill = shift + width - 64;
    uint8_t hi = buf[byte + 8];
    uint8_t hm = static_cast<uint8_t>((1u << spill) - 1);
    buf[byte + 8] = static_cast<uint8_t>((hi & ~hm) | ((value >> (64 - shift)) & hm));
  }
}

namespace {
// The raw forms read/write whole 64-bit words; steer near-the-end accesses
// through a bounce buffer so checked calls never touch out-of-range bytes.
constexpr uint64_t kSlack = 9;
}  // namespace

uint64_t read_bits(const std::vector<uint8_t>& buf, uint64_t bit_off, uint32_t width) {
  if (width < 1 || width > 64) throw BitRangeError("bit width out of range");
  if (bit_off + width > uint64_t(buf.size()) * 8) throw BitRangeError("bit read out of bounds");
  if ((bit_off >> 3) + kSlack <= buf.size())
    return read_bits_raw(buf.data(), bit_off, width);
  uint8_t tmp[kSlack * 2] = {0};
  uint64_t byte = bit_off >> 3;
  uint64_t avail = buf.size() - byte;
  std::memcpy(tmp, buf.data() + byte, static_cast<size_t>(avail < kSlack ? avail : kSlack));
  return read_bits_raw(tmp, bit_off & 7, width);
}

void write_bits(std::vector<uint8_t>& buf, uint64_t bit_off, uint32_t width, uint64_t value) {
  if (width < 1 || width > 64) throw BitRangeError("bit width out of range");
  if (bit_off + width > uint64_t(buf.size()) * 8) throw BitRangeError("bit write out of bounds");
  if ((bit_off >> 3) + kSlack <= buf.size()) {
    write_bits_raw(buf.data(), bit_off, width, value);
    return;
  }
  uint8_t tmp[kSlack * 2] = {0};
  uint64_t byte = bit_off >> 3;
  uint64_t avail = buf.size() - byte;
  uint64_t n = avail < kSlack ? avail : kSlack;
  std::memcpy(tmp, buf.data() + byte, static_cast<size_t>(n));
  write_bits_raw(tmp, bit_off & 7, width, value);
  std::memcpy(buf.data() + byte, tmp, static_cast<size_t>(n));
}

}  // namespace layoutc
