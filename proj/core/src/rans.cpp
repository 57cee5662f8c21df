#include "osoa/rans.hpp"

#include <bit>

namespace osoa {

void rans_push_exact(ExactRansState& state, const QuantizedPmf& q, Symbol s) {
  if (s >= q.size()) throw FormatError("symbol outside alphabet");
  const BigInt l = q.counts[s];
  state.x = (state.x / l) * q.total + state.x % l + q.cum[s];
}

Symbol rans_pop_exact(ExactRansState& state, const QuantizedPmf& q) {
  const BigInt y = state.x % q.total;
  const Symbol s = inverse_cumulative(q, y.convert_to<std::uint32_t>());
  state.x = (state.x / q.total) * q.counts[s] + y - q.cum[s];
  return s;
}

StreamRans StreamRans::from_payload(std::span<const std::uint8_t> payload) {
  if (payload.size() < 8 || (payload.size() - 8) % 4 != 0)
    throw FormatError("rans payload is not words plus an 8-byte state");
  StreamRans r;
  const std::size_t nwords = (payload.size() - 8) / 4;
  r.words_.resize(nwords);
  for (std::size_t i = 0; i < nwords; ++i) {
    std::uint32_t w = 0;
    for (int b = 3; b >= 0; --b) w = (w << 8) | payload[4 * i + b];
    r.words_[i] = w;
  }
  std::uint64_t x = 0;
  for (int b = 7; b >= 0; --b) x = (x << 8) | payload[4 * nwords + b];
  r.x_ = x;
  return r;
}

void StreamRans::push(const QuantizedPmf& q, Symbol s) {
  if (s >= q.size()) throw FormatError("symbol outside alphabet");
  const std::uint32_t m = q.total;
  if (!std::has_single_bit(m)) throw FormatError("streaming rans needs power-of-two M");
  const std::uint32_t l = q.counts[s];
  if (l == m) return;  // single-symbol table: the update is the identity
  const unsigned k = static_cast<unsigned>(std::countr_zero(m));
  const std::uint64_t threshold = static_cast<std::uint64_t>(l) << (64 - k);
  while (x_ >= threshold) {
    words_.push_back(static_cast<std::uint32_t>(x_));
    x_ >>= 32;
  }
  x_ = (x_ / l) * m + x_ % l + q.cum[s];
}

Symbol StreamRans::pop(const QuantizedPmf& q) {
  const std::uint32_t m = q.total;
  if (!std::has_single_bit(m)) throw FormatError("streaming rans needs power-of-two M");
  const unsigned k = static_cast<unsigned>(std::countr_zero(m));
  const std::uint32_t y = static_cast<std::uint32_t>(x_ & (m - 1));
  const Symbol s = inverse_cumulative(q, y);
  x_ = (x_ >> k) * q.counts[s] + y - q.cum[s];
  while (x_ < kRansLowerBound && !words_.empty()) {
    x_ = (x_ << 32) | words_.back();
    words_.pop_back();
  }
  return s;
}

std::vector<std::uint8_t> StreamRans::payload() const {
  std::vector<std::uint8_t> out;
  out.reserve(4 * words_.size() + 8);
  for (std::uint32_t w : words_)
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(x_ >> (8 * b)));
  return out;
}

}  // namespace osoa
