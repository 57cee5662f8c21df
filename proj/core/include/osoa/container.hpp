#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "osoa/adapt.hpp"
#include "osoa/models.hpp"

namespace osoa {

enum class CoderKind : std::uint8_t { kAcFifo = 0, kRansFilo = 1 };

/// Everything a decoder needs to reconstruct the codec C and the dynamical
/// system D, all little-endian. The on-disk early-stop field stores S+1 so
/// that 0 means "none" while S=0 (no adaptation at all) stays representable.
struct ContainerHeader {
  CoderKind coder = CoderKind::kRansFilo;
  bool bits_back = false;
  std::uint8_t precision_bits = 14;
  std::uint32_t batch_size = 0;
  std::uint32_t chunk_size = 0;  // m
  std::uint64_t data_length = 0;
  OptimizerConfig optimizer;
  AdaptationSchedule schedule;
  std::uint64_t seed = 0;
  std::uint64_t base_model_checksum = 0;

  std::uint32_t batch_count() const;
  void validate() const;
};

struct ChunkInfo {
  std::uint64_t offset = 0;  // absolute file offset of the payload
  std::uint64_t length = 0;
  std::uint32_t first_batch = 0;  // inclusive
  std::uint32_t end_batch = 0;    // exclusive; ranges partition [0, T)
  std::uint64_t payload_checksum = 0;
  std::uint64_t param_checksum = 0;  // parameters after adapting through the chunk
};

struct Container {
  ContainerHeader header;
  std::vector<ChunkInfo> chunks;
  std::vector<std::vector<std::uint8_t>> payloads;  // one per chunk
};

inline constexpr char kContainerMagic[4] = {'O', 'S', 'C', '1'};
inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'O', 'S', 'M', '1'};

std::vector<std::uint8_t> write_container(const Container& c);

/// Fills offsets, lengths and payload checksums from the payloads so an
/// in-memory container matches its serialized form.
void compute_chunk_layout(Container& c);

/// Validates magic, version, field ranges, chunk-table consistency and the
/// payload checksums; bad magic/version and truncation are FormatError,
/// payload corruption is ChecksumError naming the chunk.
Container read_container(std::span<const std::uint8_t> bytes);

/// Checkpoint: magic, kind byte (0/1 = context order, 2 = vae), dimensions,
/// logits as LE f64 row-major, then a 32-bit checksum of everything after
/// the magic. Byte-exact round trip.
std::vector<std::uint8_t> write_checkpoint(const ModelParams& params);
ModelParams read_checkpoint(std::span<const std::uint8_t> bytes);

/// 64-bit digest of a parameter object (structure and raw logit bytes).
/// This is the value recorded in headers and per-chunk trajectory checks;
/// equality means bit-identical parameters.
std::uint64_t params_checksum(const ModelParams& params);

// Filesystem helpers shared by the CLI and the bench harness.
std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace osoa
