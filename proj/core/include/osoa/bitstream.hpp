#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "osoa/errors.hpp"

namespace osoa {

/// Append-only bit sink, most-significant-bit first within each byte.
/// This orientation is normative for AC payloads in the container format.
class BitWriter {
 public:
  void put(bool bit) {
    if (shift_ == 0) {
      bytes_.push_back(0);
      shift_ = 8;
    }
    --shift_;
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << shift_);
    ++count_;
  }

  std::size_t bit_count() const { return count_; }

  /// Trailing partial byte is already zero-padded.
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t count_ = 0;
  unsigned shift_ = 0;
};

/// MSB-first bit source over a byte span. Reads past the end yield zero
/// bits up to `slack` (an AC decoder legitimately looks a code-width past
/// the final written bit); anything beyond throws, which is the
/// exhausted-mid-symbol error path for truncated streams.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes, std::size_t slack = 128)
      : bytes_(bytes), limit_(bytes.size() * 8 + slack) {}

  bool get() {
    if (pos_ >= limit_) throw FormatError("bit stream exhausted mid-symbol");
    const std::size_t byte = pos_ / 8;
    bool bit = false;
    if (byte < bytes_.size())
      bit = (bytes_[byte] >> (7 - pos_ % 8)) & 1u;
    ++pos_;
    return bit;
  }

  std::size_t bits_consumed() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

/// Little-endian byte sink/source for the container and checkpoint formats.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::span<const std::uint8_t> bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }

  std::size_t size() const { return out_.size(); }
  const std::vector<std::uint8_t>& bytes() const { return out_; }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>(b[0] | (std::uint16_t{b[1]} << 8));
  }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::span<const std::uint8_t> raw(std::size_t n) { return take(n); }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (remaining() < n) throw FormatError("truncated input");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace osoa
