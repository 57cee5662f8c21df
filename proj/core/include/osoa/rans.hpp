#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "osoa/prob.hpp"

namespace osoa {

using BigInt = boost::multiprecision::cpp_int;

/// Unbounded-state rANS. push: x' = floor(x/l_s)*M + x mod l_s + b_s.
/// pop:  s = b^-1(x mod M), x' = floor(x/M)*l_s + x mod M - b_s.
/// Works for any M, including the percent-scale worked examples. Serves as
/// the reference the streaming coder is proven against.
struct ExactRansState {
  BigInt x = 0;
};

void rans_push_exact(ExactRansState& state, const QuantizedPmf& q, Symbol s);
Symbol rans_pop_exact(ExactRansState& state, const QuantizedPmf& q);

/// Renormalizing rANS: 64-bit state, 32-bit word stack, power-of-two M only.
/// push = [emit while x >= l_s * 2^(64-k), then state update];
/// pop  = [state update, then absorb while x < 2^32 and words remain].
/// With that pairing, pop(push(x, s)) == (s, x) on every reachable state,
/// for arbitrary interleavings of pushes and pops (the bits-back pattern),
/// as long as the state is >= 2^32 whenever the word stack is nonempty.
/// A pure-push stream may start at x = 0 (matching the exact coder); a
/// mixed stream starts at kRansInit.
class StreamRans {
 public:
  static constexpr std::uint64_t kRansLowerBound = 1ull << 32;
  static constexpr std::uint64_t kRansInit = kRansLowerBound;

  StreamRans() = default;
  explicit StreamRans(std::uint64_t initial_state) : x_(initial_state) {}

  /// Rebuilds the state machine from a chunk payload: LE 32-bit words in
  /// emission order followed by the LE 64-bit final state.
  static StreamRans from_payload(std::span<const std::uint8_t> payload);

  void push(const QuantizedPmf& q, Symbol s);
  Symbol pop(const QuantizedPmf& q);

  /// Words in emission order plus the 8-byte residual state.
  std::vector<std::uint8_t> payload() const;
  std::size_t payload_bits() const { return 32 * words_.size() + 64; }

  std::uint64_t state() const { return x_; }
  std::span<const std::uint32_t> words() const { return words_; }

  /// Seeds the bottom of the word stack (bits-back initial bits).
  void preload_words(std::span<const std::uint32_t> words) {
    words_.insert(words_.end(), words.begin(), words.end());
  }

 private:
  std::uint64_t x_ = 0;
  std::vector<std::uint32_t> words_;
};

}  // namespace osoa
