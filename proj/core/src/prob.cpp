#include "osoa/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "osoa/bitstream.hpp"

namespace osoa {

Pmf::Pmf(std::vector<double> p) : probs(std::move(p)) {
  if (probs.empty()) throw FormatError("empty pmf");
  double sum = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw FormatError("pmf entry not a finite nonnegative value");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw FormatError("pmf does not sum to 1");
}

QuantizedPmf QuantizedPmf::from_counts(std::vector<std::uint32_t> counts) {
  if (counts.empty()) throw FormatError("empty count vector");
  QuantizedPmf q;
  q.counts = std::move(counts);
  q.cum.resize(q.counts.size());
  std::uint64_t run = 0;
  for (std::size_t i = 0; i < q.counts.size(); ++i) {
    if (q.counts[i] == 0) throw FormatError("zero count");
    q.cum[i] = static_cast<std::uint32_t>(run);
    run += q.counts[i];
  }
  if (run > 0xffffffffull) throw FormatError("count total overflow");
  q.total = static_cast<std::uint32_t>(run);
  q.precision_bits = 0;
  return q;
}

QuantizedPmf quantize_pmf(const Pmf& pmf, int precision_bits) {
  if (precision_bits < 2 || precision_bits > 16)
    throw FormatError("precision_bits must be in [2, 16]");
  const std::uint32_t m = 1u << precision_bits;
  const std::size_t n = pmf.size();
  if (n > m) throw FormatError("alphabet larger than 2^precision_bits");

  std::vector<std::uint32_t> counts(n);
  std::vector<double> frac(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = pmf[i] * static_cast<double>(m);
    const double fl = std::floor(raw);
    frac[i] = raw - fl;
    counts[i] = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(fl));
    assigned += counts[i];
  }

  std::int64_t remaining = static_cast<std::int64_t>(m) - assigned;
  if (remaining > 0) {
    // One unit each to the largest remainders; a single pass suffices
    // because sum(floor) >= M - n.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t k = 0; remaining > 0; ++k) {
      counts[order[k % n]] += 1;
      --remaining;
    }
  } else if (remaining < 0) {
    // Clamping overshot M: take units back by ascending remainder, never
    // dropping a symbol below 1. May need several passes.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] < frac[b]; });
    while (remaining < 0) {
      bool moved = false;
      for (std::size_t idx : order) {
        if (remaining == 0) break;
        if (counts[idx] > 1) {
          counts[idx] -= 1;
          ++remaining;
          moved = true;
        }
      }
      if (!moved) throw FormatError("alphabet larger than 2^precision_bits");
    }
  }

  QuantizedPmf q = QuantizedPmf::from_counts(std::move(counts));
  q.precision_bits = static_cast<std::uint8_t>(precision_bits);
  return q;
}

Symbol inverse_cumulative(const QuantizedPmf& q, std::uint32_t y) {
  if (y >= q.total) throw FormatError("cumulative lookup out of range");
  auto it = std::upper_bound(q.cum.begin(), q.cum.end(), y);
  return static_cast<Symbol>(std::distance(q.cum.begin(), it) - 1);
}

double entropy_bits(const Pmf& pmf) {
  double h = 0.0;
  for (double p : pmf.probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

double cross_entropy_bits(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw FormatError("pmf size mismatch");
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (q[i] <= 0.0) throw FormatError("support mismatch: q assigns zero mass");
      h -= p[i] * std::log2(q[i]);
    }
  }
  return h;
}

void serialize_quantized(const QuantizedPmf& q, std::vector<std::uint8_t>& out) {
  out.push_back(q.precision_bits);
  for (std::uint32_t c : q.counts) {
    if (c > 0xffff) throw FormatError("count exceeds u16 wire format");
    out.push_back(static_cast<std::uint8_t>(c & 0xff));
    out.push_back(static_cast<std::uint8_t>(c >> 8));
  }
}

QuantizedPmf deserialize_quantized(std::span<const std::uint8_t> bytes,
                                   std::size_t symbol_count) {
  if (bytes.size() != 1 + 2 * symbol_count)
    throw FormatError("quantized pmf blob has wrong size");
  const std::uint8_t precision = bytes[0];
  std::vector<std::uint32_t> counts(symbol_count);
  for (std::size_t i = 0; i < symbol_count; ++i)
    counts[i] = static_cast<std::uint32_t>(bytes[1 + 2 * i]) |
                (static_cast<std::uint32_t>(bytes[2 + 2 * i]) << 8);
  QuantizedPmf q = QuantizedPmf::from_counts(std::move(counts));
  q.precision_bits = precision;
  if (precision != 0 && q.total != (1u << precision))
    throw FormatError("counts do not sum to 2^precision_bits");
  return q;
}

}  // namespace osoa
