#include "osoa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <optional>
#include <ostream>

#include "osoa/arithmetic.hpp"
#include "osoa/hash.hpp"

namespace osoa {

BatchStream::BatchStream(std::span<const Symbol> data, std::uint32_t batch_size)
    : data_(data), batch_size_(batch_size) {
  if (batch_size == 0) throw FormatError("batch_size must be positive");
  if (data.empty()) throw FormatError("empty data");
  count_ = static_cast<std::uint32_t>((data.size() + batch_size - 1) / batch_size);
}

std::span<const Symbol> BatchStream::batch(std::uint32_t t) const {
  if (t >= count_) throw FormatError("batch index out of range");
  const std::size_t start = std::size_t{t} * batch_size_;
  const std::size_t len = std::min<std::size_t>(batch_size_, data_.size() - start);
  return data_.subspan(start, len);
}

FiloCache::FiloCache(std::uint32_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw FormatError("chunk_size must be positive");
  entries_.reserve(capacity);
}

void FiloCache::append(FiloCacheEntry entry) {
  if (entries_.size() >= capacity_) throw FormatError("filo cache overflow");
  entries_.push_back(std::move(entry));
}

ContainerHeader OsoaConfig::to_header(std::uint64_t data_length,
                                      std::uint64_t base_checksum) const {
  ContainerHeader h;
  h.coder = coder;
  h.bits_back = bits_back;
  h.precision_bits = precision_bits;
  h.batch_size = batch_size;
  h.chunk_size = chunk_size;
  h.data_length = data_length;
  h.optimizer = optimizer;
  h.schedule = schedule;
  h.seed = seed;
  h.base_model_checksum = base_checksum;
  return h;
}

void OsoaConfig::validate(const ModelParams& base) const {
  if (precision_bits < 2 || precision_bits > 16)
    throw FormatError("precision_bits must be in [2, 16]");
  if (batch_size == 0) throw FormatError("batch_size must be positive");
  if (chunk_size == 0) throw FormatError("chunk_size must be positive");
  optimizer.validate();
  schedule.validate();
  if (bits_back && coder != CoderKind::kRansFilo)
    throw FormatError("bits-back requires the rans coder");
  const bool vae = std::holds_alternative<ToyVaeParams>(base);
  if (vae && !bits_back)
    throw FormatError("the latent-variable model is coded with bits-back only");
  if (!vae && bits_back)
    throw FormatError("bits-back needs a latent-variable model");
  if (model_alphabet_size(base) > (1u << precision_bits))
    throw FormatError("alphabet larger than 2^precision_bits");
}

std::vector<std::uint32_t> initial_bits_reservoir(std::uint64_t seed,
                                                  std::uint32_t chunk_index,
                                                  std::size_t words) {
  Splitmix64 gen(seed + (std::uint64_t{chunk_index} + 1) * 0x9e3779b97f4a7c15ull);
  std::vector<std::uint32_t> out(words);
  for (auto& w : out) w = gen.next_u32();
  return out;
}

std::size_t reservoir_words_for(std::size_t chunk_elements, int precision_bits) {
  return 16 + (chunk_elements * static_cast<std::size_t>(precision_bits) + 255) / 256;
}

void bits_back_encode_element(StreamRans& rans, const CodingTables& tables, Symbol x) {
  if (!tables.is_vae) throw FormatError("bits-back needs latent-variable tables");
  if (x >= tables.posterior.size()) throw FormatError("symbol outside alphabet");
  const Symbol z = rans.pop(tables.posterior[x]);
  if (rans.state() < StreamRans::kRansLowerBound && rans.words().empty())
    throw FormatError("initial bits reservoir exhausted; the reservoir was sized too small");
  rans.push(tables.likelihood[z], x);
  rans.push(tables.prior, z);
}

Symbol bits_back_decode_element(StreamRans& rans, const CodingTables& tables) {
  if (!tables.is_vae) throw FormatError("bits-back needs latent-variable tables");
  const Symbol z = rans.pop(tables.prior);
  const Symbol x = rans.pop(tables.likelihood[z]);
  rans.push(tables.posterior[x], z);
  return x;
}

namespace {

std::uint32_t batch_context(const CodingTables& tables, std::span<const Symbol> batch,
                            std::size_t i) {
  if (tables.context_rows.size() == 1) return 0;  // order-0
  return i == 0 ? 0 : batch[i - 1];
}

void ac_encode_batch(AcEncoder& ac, const CodingTables& tables,
                     std::span<const Symbol> batch) {
  for (std::size_t i = 0; i < batch.size(); ++i)
    ac.encode(tables.context_rows[batch_context(tables, batch, i)], batch[i]);
}

// FILO symbol order: push last-to-first so decode pops first-to-last.
void rans_push_batch(StreamRans& rans, const CodingTables& tables,
                     std::span<const Symbol> batch, bool bits_back) {
  for (std::size_t i = batch.size(); i-- > 0;) {
    if (bits_back) {
      bits_back_encode_element(rans, tables, batch[i]);
    } else {
      rans.push(tables.context_rows[batch_context(tables, batch, i)], batch[i]);
    }
  }
}

struct SealedChunk {
  std::vector<std::uint8_t> payload;
  std::uint32_t first_batch = 0;
  std::uint32_t end_batch = 0;
};

SealedChunk flush_chunk(const std::vector<FiloCacheEntry>& entries,
                        const OsoaConfig& cfg, std::uint32_t chunk_index,
                        const OsoaTrace* trace) {
  std::size_t elements = 0;
  for (const auto& e : entries) elements += e.batch.size();

  StreamRans rans = cfg.bits_back ? StreamRans(StreamRans::kRansInit) : StreamRans();
  if (cfg.bits_back) {
    const auto reservoir = initial_bits_reservoir(
        cfg.seed, chunk_index, reservoir_words_for(elements, cfg.precision_bits));
    rans.preload_words(reservoir);
  }
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (trace && trace->on_flush_batch) trace->on_flush_batch(chunk_index, it->batch_index);
    const CodingTables tables = coding_tables(it->params, cfg.precision_bits);
    rans_push_batch(rans, tables, it->batch, cfg.bits_back);
  }
  return {rans.payload(), entries.front().batch_index, entries.back().batch_index + 1};
}

}  // namespace

double theoretical_batch_bpd(const CodingTables& tables, std::span<const Symbol> batch,
                             bool bits_back) {
  if (batch.empty()) throw FormatError("empty batch");
  double bits = 0.0;
  if (!bits_back) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const QuantizedPmf& q = tables.context_rows[batch_context(tables, batch, i)];
      bits += std::log2(static_cast<double>(q.total) / q.counts[batch[i]]);
    }
  } else {
    // Expected net cost over the quantized posterior, which is exactly the
    // distribution the coder draws z from.
    const double m_prior = tables.prior.total;
    for (Symbol x : batch) {
      const QuantizedPmf& post = tables.posterior[x];
      for (std::size_t z = 0; z < post.size(); ++z) {
        const double qz = static_cast<double>(post.counts[z]) / post.total;
        const QuantizedPmf& lik = tables.likelihood[z];
        bits += qz * (std::log2(static_cast<double>(lik.total) / lik.counts[x]) +
                      std::log2(m_prior / tables.prior.counts[z]) -
                      std::log2(static_cast<double>(post.total) / post.counts[z]));
      }
    }
  }
  return bits / static_cast<double>(batch.size());
}

EncodeResult osoa_encode(std::span<const Symbol> data, const ModelParams& base,
                         const OsoaConfig& config, const OsoaTrace* trace) {
  config.validate(base);
  if (data.empty()) throw FormatError("empty data");
  const std::uint32_t alphabet = model_alphabet_size(base);
  for (Symbol s : data)
    if (s >= alphabet) throw FormatError("data symbol outside the model alphabet");

  const BatchStream batches(data, config.batch_size);
  const std::uint32_t total = batches.count();
  const bool fifo = config.coder == CoderKind::kAcFifo;

  ModelParams params = base;
  OptimizerState opt = OptimizerState::zeros(flat_logits(params).size());

  EncodeResult result;
  result.container.header = config.to_header(data.size(), params_checksum(base));

  AcEncoder ac;
  FiloCache cache(config.chunk_size);
  std::vector<std::future<SealedChunk>> pending;
  std::vector<SealedChunk> sealed;
  std::vector<std::uint64_t> chunk_params;

  double cum_bits = 0.0;
  std::size_t cum_syms = 0;
  for (std::uint32_t t = 0; t < total; ++t) {
    const auto batch = batches.batch(t);
    const CodingTables tables = coding_tables(params, config.precision_bits);

    const double theo = theoretical_batch_bpd(tables, batch, config.bits_back);
    cum_bits += theo * static_cast<double>(batch.size());
    cum_syms += batch.size();
    result.batch_log.push_back(BatchBpd{t + 1, theo,
                                        model_objective_bits(params, batch),
                                        cum_bits / static_cast<double>(cum_syms)});

    bool sealed_now = false;
    if (fifo) {
      if (trace && trace->on_encode_batch) trace->on_encode_batch(t);
      ac_encode_batch(ac, tables, batch);
    } else {
      if (trace && trace->on_cache_batch) trace->on_cache_batch(t);
      cache.append(FiloCacheEntry{params, batch, t});
      if (cache.full() || t == total - 1) {
        auto entries = cache.take();
        const auto chunk_index =
            static_cast<std::uint32_t>(pending.size() + sealed.size());
        if (config.background_flush && trace == nullptr) {
          pending.push_back(std::async(
              std::launch::async,
              [entries = std::move(entries), &config, chunk_index]() {
                return flush_chunk(entries, config, chunk_index, nullptr);
              }));
        } else {
          sealed.push_back(flush_chunk(entries, config, chunk_index, trace));
        }
        sealed_now = true;
      }
    }

    if (t + 1 < total) {
      if (trace && trace->on_adapt) trace->on_adapt(t);
      apply_dynamics(params, opt, batch, config.optimizer, config.schedule, t + 1);
    }
    if (!fifo && sealed_now) chunk_params.push_back(params_checksum(params));
  }

  if (fifo) {
    result.container.payloads.push_back(ac.finish());
    ChunkInfo info;
    info.first_batch = 0;
    info.end_batch = total;
    info.param_checksum = params_checksum(params);
    result.container.chunks.push_back(info);
  } else {
    for (auto& f : pending) sealed.push_back(f.get());
    for (std::size_t i = 0; i < sealed.size(); ++i) {
      ChunkInfo info;
      info.first_batch = sealed[i].first_batch;
      info.end_batch = sealed[i].end_batch;
      info.param_checksum = chunk_params[i];
      result.container.chunks.push_back(info);
      result.container.payloads.push_back(std::move(sealed[i].payload));
    }
  }
  compute_chunk_layout(result.container);
  result.final_param_checksum = params_checksum(params);
  return result;
}

std::vector<Symbol> osoa_decode(const Container& container, const ModelParams& base,
                                const OsoaTrace* trace) {
  const ContainerHeader& header = container.header;
  header.validate();
  if (params_checksum(base) != header.base_model_checksum)
    throw ChecksumError("base model does not match the container header");
  const bool vae = std::holds_alternative<ToyVaeParams>(base);
  if (vae != header.bits_back)
    throw FormatError("model kind does not match the bits-back flag");

  const std::uint32_t total = header.batch_count();
  const std::size_t n = static_cast<std::size_t>(header.data_length);
  const bool fifo = header.coder == CoderKind::kAcFifo;
  if (container.chunks.empty() || container.chunks.front().first_batch != 0 ||
      container.chunks.back().end_batch != total)
    throw FormatError("chunk table does not cover the batch range");
  if (fifo && container.chunks.size() != 1)
    throw FormatError("a fifo container must hold exactly one chunk");

  ModelParams params = base;
  OptimizerState opt = OptimizerState::zeros(flat_logits(params).size());

  std::vector<Symbol> out;
  out.reserve(n);
  auto batch_len = [&](std::uint32_t t) {
    return std::min<std::size_t>(header.batch_size,
                                 n - std::size_t{t} * header.batch_size);
  };

  for (std::size_t ci = 0; ci < container.chunks.size(); ++ci) {
    const ChunkInfo& chunk = container.chunks[ci];
    const auto& payload = container.payloads[ci];

    std::optional<AcDecoder> ac;
    StreamRans rans;
    std::size_t chunk_elements = 0;
    if (fifo) {
      ac.emplace(payload);
    } else {
      rans = StreamRans::from_payload(payload);
      for (std::uint32_t t = chunk.first_batch; t < chunk.end_batch; ++t)
        chunk_elements += batch_len(t);
    }

    for (std::uint32_t t = chunk.first_batch; t < chunk.end_batch; ++t) {
      const CodingTables tables = coding_tables(params, header.precision_bits);
      const std::size_t len = batch_len(t);
      const std::size_t start = out.size();
      if (trace && trace->on_decode_batch) trace->on_decode_batch(t);
      for (std::size_t i = 0; i < len; ++i) {
        Symbol s;
        if (header.bits_back) {
          s = bits_back_decode_element(rans, tables);
        } else {
          std::uint32_t ctx = 0;
          if (tables.context_rows.size() > 1 && i > 0) ctx = out[start + i - 1];
          const QuantizedPmf& q = tables.context_rows[ctx];
          s = fifo ? ac->decode(q) : rans.pop(q);
        }
        out.push_back(s);
      }
      if (t + 1 < total) {
        if (trace && trace->on_adapt) trace->on_adapt(t);
        apply_dynamics(params, opt,
                       std::span<const Symbol>(out.data() + start, len),
                       header.optimizer, header.schedule, t + 1);
      }
    }

    if (params_checksum(params) != chunk.param_checksum)
      throw ChecksumError("parameter trajectory diverged in chunk " + std::to_string(ci) +
                          " (platform nondeterminism or corruption)");
    if (!fifo) {
      // Fully unwinding a chunk must land exactly on the initial state.
      if (header.bits_back) {
        const auto reservoir = initial_bits_reservoir(
            header.seed, static_cast<std::uint32_t>(ci),
            reservoir_words_for(chunk_elements, header.precision_bits));
        const auto words = rans.words();
        const bool same =
            rans.state() == StreamRans::kRansInit &&
            words.size() == reservoir.size() &&
            std::equal(words.begin(), words.end(), reservoir.begin());
        if (!same)
          throw ChecksumError("bits-back stream residue mismatch in chunk " +
                              std::to_string(ci));
      } else if (rans.state() != 0 || !rans.words().empty()) {
        throw ChecksumError("rans stream residue in chunk " + std::to_string(ci));
      }
    }
  }
  if (out.size() != n) throw FormatError("decoded length mismatch");
  return out;
}

double net_payload_bits(const Container& container) {
  const ContainerHeader& h = container.header;
  const std::size_t n = static_cast<std::size_t>(h.data_length);
  auto batch_len = [&](std::uint32_t t) {
    return std::min<std::size_t>(h.batch_size, n - std::size_t{t} * h.batch_size);
  };
  double bits = 0.0;
  for (std::size_t ci = 0; ci < container.chunks.size(); ++ci) {
    bits += 8.0 * static_cast<double>(container.payloads[ci].size());
    if (h.bits_back) {
      std::size_t elements = 0;
      for (std::uint32_t t = container.chunks[ci].first_batch;
           t < container.chunks[ci].end_batch; ++t)
        elements += batch_len(t);
      bits -= 32.0 * static_cast<double>(
                         reservoir_words_for(elements, h.precision_bits));
    }
  }
  return bits;
}

void write_bpd_log(std::ostream& os, std::span<const BatchBpd> log) {
  char line[96];
  for (const BatchBpd& row : log) {
    std::snprintf(line, sizeof line, "%u %.6f %.6f\n", row.batch_index,
                  row.theoretical_bpd, row.cumulative_bpd);
    os << line;
  }
}

}  // namespace osoa
