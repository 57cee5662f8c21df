#include "osoa/container.hpp"

#include <cstdio>
#include <cstring>

#include "osoa/bitstream.hpp"
#include "osoa/hash.hpp"

namespace osoa {

std::uint32_t ContainerHeader::batch_count() const {
  if (batch_size == 0) return 0;
  return static_cast<std::uint32_t>((data_length + batch_size - 1) / batch_size);
}

void ContainerHeader::validate() const {
  if (coder != CoderKind::kAcFifo && coder != CoderKind::kRansFilo)
    throw FormatError("unknown coder id");
  if (bits_back && coder != CoderKind::kRansFilo)
    throw FormatError("bits-back requires the rans coder");
  if (precision_bits < 2 || precision_bits > 16)
    throw FormatError("precision_bits must be in [2, 16]");
  if (batch_size == 0) throw FormatError("batch_size must be positive");
  if (chunk_size == 0) throw FormatError("chunk_size must be positive");
  if (data_length == 0) throw FormatError("empty data");
  optimizer.validate();
  schedule.validate();
}

namespace {

void write_header(ByteWriter& w, const ContainerHeader& h) {
  w.raw(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(kContainerMagic), 4));
  w.u8(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(h.coder));
  w.u8(h.bits_back ? 1 : 0);
  w.u8(h.precision_bits);
  w.u32(h.batch_size);
  w.u32(h.chunk_size);
  w.u64(h.data_length);
  w.u8(static_cast<std::uint8_t>(h.optimizer.kind));
  w.f64(h.optimizer.learning_rate);
  w.f64(h.optimizer.beta1);
  w.f64(h.optimizer.beta2);
  w.f64(h.optimizer.epsilon);
  w.u32(h.schedule.updates_per_batch);
  w.u32(h.schedule.early_stop_step ? *h.schedule.early_stop_step + 1 : 0);
  w.u64(h.seed);
  w.u64(h.base_model_checksum);
}

ContainerHeader read_header(ByteReader& r) {
  char magic[4];
  auto m = r.raw(4);
  std::memcpy(magic, m.data(), 4);
  if (std::memcmp(magic, kContainerMagic, 4) != 0)
    throw FormatError("bad container magic");
  const std::uint8_t version = r.u8();
  if (version != kContainerVersion)
    throw FormatError("unsupported container version " + std::to_string(version));
  ContainerHeader h;
  h.coder = static_cast<CoderKind>(r.u8());
  h.bits_back = r.u8() != 0;
  h.precision_bits = r.u8();
  h.batch_size = r.u32();
  h.chunk_size = r.u32();
  h.data_length = r.u64();
  h.optimizer.kind = static_cast<OptimizerKind>(r.u8());
  h.optimizer.learning_rate = r.f64();
  h.optimizer.beta1 = r.f64();
  h.optimizer.beta2 = r.f64();
  h.optimizer.epsilon = r.f64();
  h.schedule.updates_per_batch = r.u32();
  const std::uint32_t early = r.u32();
  h.schedule.early_stop_step =
      early == 0 ? std::nullopt : std::optional<std::uint32_t>(early - 1);
  h.seed = r.u64();
  h.base_model_checksum = r.u64();
  h.validate();
  return h;
}

constexpr std::size_t kChunkRowBytes = 8 + 8 + 4 + 4 + 8 + 8;

}  // namespace

void compute_chunk_layout(Container& c) {
  if (c.chunks.size() != c.payloads.size())
    throw FormatError("chunk table and payload count differ");
  ByteWriter header;
  write_header(header, c.header);
  std::uint64_t offset = header.size() + 4 + c.chunks.size() * kChunkRowBytes;
  for (std::size_t i = 0; i < c.chunks.size(); ++i) {
    c.chunks[i].offset = offset;
    c.chunks[i].length = c.payloads[i].size();
    c.chunks[i].payload_checksum = fnv1a64(c.payloads[i]);
    offset += c.payloads[i].size();
  }
}

std::vector<std::uint8_t> write_container(const Container& c) {
  c.header.validate();
  if (c.chunks.size() != c.payloads.size())
    throw FormatError("chunk table and payload count differ");

  ByteWriter header;
  write_header(header, c.header);
  const std::size_t payload_start =
      header.size() + 4 + c.chunks.size() * kChunkRowBytes;

  ByteWriter w;
  w.raw(header.bytes());
  w.u32(static_cast<std::uint32_t>(c.chunks.size()));
  std::uint64_t offset = payload_start;
  for (std::size_t i = 0; i < c.chunks.size(); ++i) {
    const ChunkInfo& info = c.chunks[i];
    w.u64(offset);
    w.u64(c.payloads[i].size());
    w.u32(info.first_batch);
    w.u32(info.end_batch);
    w.u64(fnv1a64(c.payloads[i]));
    w.u64(info.param_checksum);
    offset += c.payloads[i].size();
  }
  for (const auto& payload : c.payloads) w.raw(payload);
  return w.take();
}

Container read_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Container c;
  c.header = read_header(r);

  const std::uint32_t chunk_count = r.u32();
  const std::uint32_t batches = c.header.batch_count();
  if (chunk_count == 0) throw FormatError("container has no chunks");
  c.chunks.resize(chunk_count);
  std::uint64_t prev_offset = 0;
  std::uint32_t expected_first = 0;
  for (std::uint32_t i = 0; i < chunk_count; ++i) {
    ChunkInfo& info = c.chunks[i];
    info.offset = r.u64();
    info.length = r.u64();
    info.first_batch = r.u32();
    info.end_batch = r.u32();
    info.payload_checksum = r.u64();
    info.param_checksum = r.u64();
    if (i > 0 && info.offset <= prev_offset)
      throw FormatError("chunk offsets not strictly increasing");
    prev_offset = info.offset;
    if (info.first_batch != expected_first || info.end_batch <= info.first_batch)
      throw FormatError("chunk batch ranges do not partition the batch index space");
    expected_first = info.end_batch;
  }
  if (expected_first != batches)
    throw FormatError("chunk batch ranges do not cover all batches");

  c.payloads.resize(chunk_count);
  for (std::uint32_t i = 0; i < chunk_count; ++i) {
    const ChunkInfo& info = c.chunks[i];
    if (info.offset != r.position())
      throw FormatError("chunk offset does not match payload layout");
    if (r.remaining() < info.length) throw FormatError("truncated payload");
    auto payload = r.raw(static_cast<std::size_t>(info.length));
    c.payloads[i].assign(payload.begin(), payload.end());
    if (fnv1a64(c.payloads[i]) != info.payload_checksum)
      throw ChecksumError("payload checksum mismatch in chunk " + std::to_string(i));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after payloads");
  return c;
}

namespace {

std::uint8_t model_kind_byte(const ModelParams& params) {
  if (const auto* cm = std::get_if<ContextModelParams>(&params))
    return static_cast<std::uint8_t>(cm->context_order);  // 0 or 1
  return 2;
}

}  // namespace

std::vector<std::uint8_t> write_checkpoint(const ModelParams& params) {
  ByteWriter w;
  w.raw(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(kCheckpointMagic), 4));
  w.u8(model_kind_byte(params));
  if (const auto* cm = std::get_if<ContextModelParams>(&params)) {
    w.u32(cm->alphabet_size);
  } else {
    const auto& vae = std::get<ToyVaeParams>(params);
    w.u32(vae.latent_size);
    w.u32(vae.alphabet_size);
  }
  for (double v : flat_logits(params)) w.f64(v);
  auto bytes = w.take();
  const std::uint32_t digest =
      fnv1a32(std::span<const std::uint8_t>(bytes).subspan(4));
  for (int b = 0; b < 4; ++b)
    bytes.push_back(static_cast<std::uint8_t>(digest >> (8 * b)));
  return bytes;
}

ModelParams read_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw FormatError("checkpoint too short");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw FormatError("bad checkpoint magic");
  std::uint32_t stored = 0;
  for (int b = 3; b >= 0; --b) stored = (stored << 8) | bytes[bytes.size() - 4 + b];
  const auto payload = bytes.subspan(4, bytes.size() - 8);
  if (fnv1a32(payload) != stored) throw ChecksumError("checkpoint checksum mismatch");

  ByteReader r(payload);
  const std::uint8_t kind = r.u8();
  ModelParams params;
  std::size_t expected = 0;
  if (kind == 0 || kind == 1) {
    const std::uint32_t alphabet = r.u32();
    auto cm = ContextModelParams::zeros(kind, alphabet);
    expected = cm.logits.size();
    params = std::move(cm);
  } else if (kind == 2) {
    const std::uint32_t latent = r.u32();
    const std::uint32_t alphabet = r.u32();
    auto vae = ToyVaeParams::zeros(latent, alphabet);
    expected = vae.logits.size();
    params = std::move(vae);
  } else {
    throw FormatError("unknown checkpoint model kind");
  }
  if (r.remaining() != expected * 8)
    throw FormatError("checkpoint logit payload has wrong size");
  auto& logits = flat_logits(params);
  for (std::size_t i = 0; i < expected; ++i) logits[i] = r.f64();
  return params;
}

std::uint64_t params_checksum(const ModelParams& params) {
  ByteWriter w;
  w.u8(model_kind_byte(params));
  if (const auto* cm = std::get_if<ContextModelParams>(&params)) {
    w.u32(cm->alphabet_size);
  } else {
    const auto& vae = std::get<ToyVaeParams>(params);
    w.u32(vae.latent_size);
    w.u32(vae.alphabet_size);
  }
  for (double v : flat_logits(params)) w.f64(v);
  return fnv1a64(w.bytes());
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open " + path);
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<std::uint8_t> bytes(size > 0 ? static_cast<std::size_t>(size) : 0);
  if (!bytes.empty() && std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
    std::fclose(f);
    throw IoError("short read on " + path);
  }
  std::fclose(f);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path + " for writing");
  if (!bytes.empty() && std::fwrite(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
    std::fclose(f);
    std::remove(path.c_str());
    throw IoError("short write on " + path);
  }
  std::fclose(f);
}

}  // namespace osoa
