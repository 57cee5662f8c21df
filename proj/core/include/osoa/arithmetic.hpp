#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <vector>

#include "osoa/bitstream.hpp"
#include "osoa/prob.hpp"

namespace osoa {

/// FIFO integer range coder, 32 fractional bits, MSB-first bit output.
/// Narrows [low, high) by the symbol's count range and renormalizes with
/// standard pending-bit (E3) handling. There is no termination symbol;
/// callers track the symbol count.
class AcEncoder {
 public:
  void encode(const QuantizedPmf& q, Symbol s);

  /// Flushes the disambiguating bit plus pending bits and zero-pads the
  /// final byte. The encoder is spent afterwards.
  std::vector<std::uint8_t> finish();

  std::size_t bit_count() const { return bits_.bit_count(); }

 private:
  void emit(bool bit);

  std::uint64_t low_ = 0;
  std::uint64_t high_ = 0xffffffffull;
  std::uint64_t pending_ = 0;
  BitWriter bits_;
};

class AcDecoder {
 public:
  explicit AcDecoder(std::span<const std::uint8_t> bytes);

  /// FIFO: symbols come out in encode order. Tables must match the
  /// encoder's step for step.
  Symbol decode(const QuantizedPmf& q);

 private:
  std::uint64_t low_ = 0;
  std::uint64_t high_ = 0xffffffffull;
  std::uint64_t value_ = 0;
  BitReader bits_;
};

using BigRational = boost::multiprecision::cpp_rational;

struct ExactInterval {
  BigRational low;
  BigRational high;
};

/// Exact rational final interval after iterated subdivision of [0, 1) in
/// symbol-index order. Reference oracle for the integer coder.
ExactInterval ac_exact_interval(const QuantizedPmf& q, std::span<const Symbol> syms);

}  // namespace osoa
