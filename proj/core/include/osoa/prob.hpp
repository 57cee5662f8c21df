#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "osoa/errors.hpp"

namespace osoa {

using Symbol = std::uint32_t;

/// Dense symbol domain 0..size-1 for coded data. Latent domains of the toy
/// VAE may be smaller (down to one value) and use Pmf directly.
struct Alphabet {
  std::uint32_t size = 0;

  explicit Alphabet(std::uint32_t n) : size(n) {
    if (n < 2) throw FormatError("alphabet needs at least 2 symbols");
  }
};

/// Probability vector. Entries are nonnegative and sum to 1 within 1e-9.
struct Pmf {
  std::vector<double> probs;

  Pmf() = default;
  explicit Pmf(std::vector<double> p);

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

/// Integer approximation l_i/M of a Pmf, the form every entropy coder
/// consumes. Every count is >= 1 so every symbol stays codable; cum is the
/// exclusive prefix sum of counts and is always recomputed, never stored.
struct QuantizedPmf {
  std::vector<std::uint32_t> counts;
  std::vector<std::uint32_t> cum;
  std::uint32_t total = 0;            // M
  std::uint8_t precision_bits = 0;    // 0 when built from verbatim counts

  std::size_t size() const { return counts.size(); }

  /// Replays externally specified counts with arbitrary M (e.g. the
  /// percent-scale worked examples). Production paths use quantize_pmf,
  /// where M is a power of two.
  static QuantizedPmf from_counts(std::vector<std::uint32_t> counts);
};

/// Largest-remainder apportionment of pmf onto M = 2^precision_bits:
/// start from floor(p_i*M) clamped to >= 1, then hand out the remaining
/// units by descending fractional remainder (ties by ascending index).
/// When clamping overshoots M, units are taken back in the mirrored order
/// from symbols still above 1. Deterministic.
QuantizedPmf quantize_pmf(const Pmf& pmf, int precision_bits);

/// The unique symbol s with cum[s] <= y < cum[s] + counts[s]. Binary search.
Symbol inverse_cumulative(const QuantizedPmf& q, std::uint32_t y);

/// Shannon entropy -sum p_i log2 p_i with 0 log 0 := 0.
double entropy_bits(const Pmf& pmf);

/// -sum p_i log2 q_i. Throws on support mismatch (p_i > 0 where q_i = 0).
double cross_entropy_bits(const Pmf& p, const Pmf& q);

/// Wire form: precision_bits byte, then counts as LE u16.
void serialize_quantized(const QuantizedPmf& q, std::vector<std::uint8_t>& out);
QuantizedPmf deserialize_quantized(std::span<const std::uint8_t> bytes,
                                   std::size_t symbol_count);

}  // namespace osoa
