#include "osoa/arithmetic.hpp"

namespace osoa {

namespace {
constexpr std::uint64_t kHalf = 1ull << 31;
constexpr std::uint64_t kQuarter = 1ull << 30;
constexpr std::uint64_t kThreeQuarters = 3ull << 30;
constexpr std::uint64_t kMask = 0xffffffffull;
}  // namespace

void AcEncoder::emit(bool bit) {
  bits_.put(bit);
  for (; pending_ > 0; --pending_) bits_.put(!bit);
}

void AcEncoder::encode(const QuantizedPmf& q, Symbol s) {
  if (s >= q.size()) throw FormatError("symbol outside alphabet");
  const std::uint64_t span = high_ - low_ + 1;
  high_ = low_ + span * (q.cum[s] + q.counts[s]) / q.total - 1;
  low_ = low_ + span * q.cum[s] / q.total;
  for (;;) {
    if (high_ < kHalf) {
      emit(false);
    } else if (low_ >= kHalf) {
      emit(true);
      low_ -= kHalf;
      high_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      ++pending_;
      low_ -= kQuarter;
      high_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
  }
}

std::vector<std::uint8_t> AcEncoder::finish() {
  ++pending_;
  emit(low_ >= kQuarter);
  return bits_.take();
}

AcDecoder::AcDecoder(std::span<const std::uint8_t> bytes) : bits_(bytes) {
  for (int i = 0; i < 32; ++i) value_ = (value_ << 1) | (bits_.get() ? 1 : 0);
}

Symbol AcDecoder::decode(const QuantizedPmf& q) {
  const std::uint64_t span = high_ - low_ + 1;
  const std::uint64_t scaled = ((value_ - low_ + 1) * q.total - 1) / span;
  const Symbol s = inverse_cumulative(q, static_cast<std::uint32_t>(scaled));
  high_ = low_ + span * (q.cum[s] + q.counts[s]) / q.total - 1;
  low_ = low_ + span * q.cum[s] / q.total;
  for (;;) {
    if (high_ < kHalf) {
      // nothing
    } else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      value_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < kThreeQuarters) {
      low_ -= kQuarter;
      high_ -= kQuarter;
      value_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
    value_ = (value_ << 1) | (bits_.get() ? 1 : 0);
  }
  return s;
}

ExactInterval ac_exact_interval(const QuantizedPmf& q, std::span<const Symbol> syms) {
  if (syms.empty()) throw FormatError("empty symbol sequence");
  BigRational low(0), high(1);
  for (Symbol s : syms) {
    if (s >= q.size()) throw FormatError("symbol outside alphabet");
    const BigRational width = high - low;
    high = low + width * BigRational(q.cum[s] + q.counts[s], q.total);
    low = low + width * BigRational(q.cum[s], q.total);
  }
  return {low, high};
}

}  // namespace osoa
