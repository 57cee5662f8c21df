#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "osoa/adapt.hpp"
#include "osoa/container.hpp"
#include "osoa/models.hpp"
#include "osoa/rans.hpp"

namespace osoa {

/// Splits data into batches B_1..B_T in order; the last batch may be short.
class BatchStream {
 public:
  BatchStream(std::span<const Symbol> data, std::uint32_t batch_size);

  std::uint32_t count() const { return count_; }
  std::span<const Symbol> batch(std::uint32_t t) const;  // t is 0-based

 private:
  std::span<const Symbol> data_;
  std::uint32_t batch_size_;
  std::uint32_t count_;
};

/// FILO staging area: (parameter snapshot, batch) pairs in arrival order,
/// consumed in reverse by the chunk flush. Tables are reconstructed from
/// the snapshot at flush time, which is byte-equivalent to caching them.
struct FiloCacheEntry {
  ModelParams params;
  std::span<const Symbol> batch;
  std::uint32_t batch_index;  // 0-based
};

class FiloCache {
 public:
  explicit FiloCache(std::uint32_t capacity);

  void append(FiloCacheEntry entry);
  bool full() const { return entries_.size() == capacity_; }
  std::size_t size() const { return entries_.size(); }
  std::uint32_t capacity() const { return capacity_; }
  std::vector<FiloCacheEntry> take() { return std::move(entries_); }

 private:
  std::uint32_t capacity_;
  std::vector<FiloCacheEntry> entries_;
};

struct OsoaConfig {
  CoderKind coder = CoderKind::kRansFilo;
  bool bits_back = false;
  std::uint8_t precision_bits = 14;
  std::uint32_t batch_size = 1024;
  std::uint32_t chunk_size = 8;  // m; FILO only, FIFO always yields one chunk
  OptimizerConfig optimizer;
  AdaptationSchedule schedule;
  std::uint64_t seed = 0;  // drives initial-bits generation only
  /// Encode-side execution detail (not serialized): seal each FILO chunk to
  /// a background worker. Output is byte-identical to synchronous mode.
  bool background_flush = false;

  ContainerHeader to_header(std::uint64_t data_length,
                            std::uint64_t base_checksum) const;
  void validate(const ModelParams& base) const;
};

/// Observability hooks for tests and the bench harness. When a trace is
/// attached, FILO flushes run synchronously so event order is total.
struct OsoaTrace {
  std::function<void(std::uint32_t t)> on_encode_batch;   // FIFO immediate encode
  std::function<void(std::uint32_t t)> on_cache_batch;    // FILO cache append
  std::function<void(std::uint32_t t)> on_adapt;
  std::function<void(std::uint32_t chunk, std::uint32_t t)> on_flush_batch;
  std::function<void(std::uint32_t t)> on_decode_batch;
};

struct BatchBpd {
  std::uint32_t batch_index = 0;    // 1-based in the emitted log
  double theoretical_bpd = 0.0;     // under the quantized coding tables
  double model_bpd = 0.0;           // under the unquantized model
  double cumulative_bpd = 0.0;
};

struct EncodeResult {
  Container container;
  std::vector<BatchBpd> batch_log;
  std::uint64_t final_param_checksum = 0;
};

/// One-shot online adaptation encoding: for each batch, evaluate coding
/// tables under the current parameters, encode or cache, then adapt —
/// skipping the adaptation after the final batch. Deterministic.
EncodeResult osoa_encode(std::span<const Symbol> data, const ModelParams& base,
                         const OsoaConfig& config, const OsoaTrace* trace = nullptr);

/// Replays the identical dynamical system while decoding, verifying the
/// per-chunk parameter checksums recorded by the encoder.
std::vector<Symbol> osoa_decode(const Container& container, const ModelParams& base,
                                const OsoaTrace* trace = nullptr);

/// "batch_index theoretical_bpd cumulative_bpd" per line.
void write_bpd_log(std::ostream& os, std::span<const BatchBpd> log);

// -- bits-back primitives (rANS only) --------------------------------------

/// Encode one element: pop z with the posterior table for x, push x with
/// the likelihood table for z, push z with the prior table.
void bits_back_encode_element(StreamRans& rans, const CodingTables& tables, Symbol x);

/// Exact inverse: pop z with the prior, pop x with the likelihood, push z
/// back with the posterior.
Symbol bits_back_decode_element(StreamRans& rans, const CodingTables& tables);

/// Deterministic initial-bits reservoir for one chunk, from the header seed
/// via splitmix64. Its length is charged to net-bpd accounting.
std::vector<std::uint32_t> initial_bits_reservoir(std::uint64_t seed,
                                                  std::uint32_t chunk_index,
                                                  std::size_t words);
std::size_t reservoir_words_for(std::size_t chunk_elements, int precision_bits);

/// Payload bits minus the reservoir bits borrowed at chunk start (the net
/// cost the bits-back accounting compares against the ELBO).
double net_payload_bits(const Container& container);

/// Theoretical bpd of one batch under quantized tables (codelength of the
/// counts actually used by the coder; for bits-back, the expectation over
/// the quantized posterior).
double theoretical_batch_bpd(const CodingTables& tables, std::span<const Symbol> batch,
                             bool bits_back);

}  // namespace osoa
