// Command-line surface: pretrain, compress, decompress, inspect, bench.
// Exit codes: 0 success, 2 format/config error, 3 checksum or determinism
// mismatch, 4 I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "osoa/bench.hpp"
#include "osoa/container.hpp"
#include "osoa/pipeline.hpp"

namespace {

using namespace osoa;

std::vector<Symbol> bytes_to_symbols(std::span<const std::uint8_t> bytes,
                                     const Alphabet& alphabet) {
  std::vector<Symbol> out(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] >= alphabet.size)
      throw FormatError("input byte " + std::to_string(bytes[i]) +
                        " outside the declared alphabet of " +
                        std::to_string(alphabet.size));
    out[i] = bytes[i];
  }
  return out;
}

std::vector<std::uint8_t> symbols_to_bytes(std::span<const Symbol> syms) {
  std::vector<std::uint8_t> out(syms.size());
  for (std::size_t i = 0; i < syms.size(); ++i) {
    if (syms[i] > 0xff) throw FormatError("symbol does not fit a byte");
    out[i] = static_cast<std::uint8_t>(syms[i]);
  }
  return out;
}

struct OptimizerFlags {
  std::string optimizer = "adamax";
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  OptimizerConfig config() const {
    OptimizerConfig cfg;
    cfg.kind = optimizer == "sgd" ? OptimizerKind::kSgd : OptimizerKind::kAdamax;
    cfg.learning_rate = lr;
    cfg.beta1 = beta1;
    cfg.beta2 = beta2;
    cfg.epsilon = epsilon;
    return cfg;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--optimizer", optimizer, "sgd or adamax")
        ->check(CLI::IsMember({"sgd", "adamax"}));
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--beta1", beta1, "adamax beta1");
    cmd->add_option("--beta2", beta2, "adamax beta2");
    cmd->add_option("--epsilon", epsilon, "adamax epsilon");
  }
};

int run(int argc, char** argv) {
  CLI::App app{"lossless compression with one-shot online model adaptation"};
  app.require_subcommand(1);

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "train a base model on a corpus");
  std::string pre_corpus, pre_out;
  std::string model_kind = "order1";
  std::uint32_t alphabet = 256, latent = 4, epochs = 10, pre_batch = 1024;
  OptimizerFlags pre_opt;
  pre->add_option("corpus", pre_corpus, "raw byte corpus")->required();
  pre->add_option("-o,--output", pre_out, "checkpoint path")->required();
  pre->add_option("--model", model_kind, "order0, order1 or vae")
      ->check(CLI::IsMember({"order0", "order1", "vae"}));
  pre->add_option("--alphabet", alphabet, "alphabet size (default 256 byte values)");
  pre->add_option("--latent", latent, "latent values for the vae model");
  pre->add_option("--epochs", epochs, "full passes over the corpus");
  pre->add_option("--batch-size", pre_batch, "training batch size");
  pre_opt.attach(pre);

  // shared compress flags
  auto* cmp = app.add_subcommand("compress", "encode a file with online adaptation");
  std::string cmp_in, cmp_out, cmp_ckpt, bpd_log_path;
  std::string coder = "rans";
  bool bits_back = false, explode = false, async_flush = false;
  std::uint32_t precision = 14, batch_size = 1024, chunk_size = 8, updates = 1;
  std::int64_t early_stop = -1;
  std::uint64_t seed = 0;
  OptimizerFlags cmp_opt;
  cmp->add_option("input", cmp_in)->required();
  cmp->add_option("-o,--output", cmp_out)->required();
  cmp->add_option("-c,--checkpoint", cmp_ckpt, "base model checkpoint")->required();
  cmp->add_option("--coder", coder, "ac (fifo) or rans (filo)")
      ->check(CLI::IsMember({"ac", "rans"}));
  cmp->add_flag("--bits-back", bits_back, "bits-back coding (vae checkpoints)");
  cmp->add_option("--precision-bits", precision)->check(CLI::Range(2, 16));
  cmp->add_option("--batch-size", batch_size);
  cmp->add_option("--chunk-size", chunk_size, "batches per filo chunk");
  cmp->add_option("--updates-per-batch", updates);
  cmp->add_option("--early-stop", early_stop,
                  "stop adapting after this batch (0 = never adapt)");
  cmp->add_option("--seed", seed, "initial-bits seed");
  cmp->add_flag("--explode", explode, "also write one payload file per chunk");
  cmp->add_flag("--async-flush", async_flush, "flush filo chunks on a background worker");
  cmp->add_option("--bpd-log", bpd_log_path, "write the per-batch bpd log here");
  cmp_opt.attach(cmp);

  // decompress
  auto* dec = app.add_subcommand("decompress", "decode a container");
  std::string dec_in, dec_out, dec_ckpt;
  dec->add_option("input", dec_in)->required();
  dec->add_option("-o,--output", dec_out)->required();
  dec->add_option("-c,--checkpoint", dec_ckpt, "base model checkpoint")->required();

  // inspect
  auto* ins = app.add_subcommand("inspect", "dump header and chunk table");
  std::string ins_in;
  ins->add_option("input", ins_in)->required();

  // bench
  auto* ben = app.add_subcommand("bench", "shifted-source comparison harness");
  BenchScenario scenario;
  std::string report_path, series_path, sweep;
  std::int64_t bench_early_stop = -1;
  ben->add_option("--alphabet", scenario.alphabet);
  ben->add_option("--pretrain-len", scenario.pretrain_len);
  ben->add_option("--target-len", scenario.target_len);
  ben->add_option("--source-seed", scenario.source_seed);
  ben->add_option("--shift", scenario.shift, "distribution shift in [0,1]");
  ben->add_option("--gain", scenario.logit_gain);
  ben->add_option("--pretrain-epochs", scenario.pretrain_epochs);
  ben->add_flag("--retrain", scenario.include_retrain, "include the ReTrain row");
  ben->add_option("--coder", coder)->check(CLI::IsMember({"ac", "rans"}));
  ben->add_option("--precision-bits", precision)->check(CLI::Range(2, 16));
  ben->add_option("--batch-size", batch_size);
  ben->add_option("--chunk-size", chunk_size);
  ben->add_option("--updates-per-batch", updates);
  ben->add_option("--early-stop", bench_early_stop);
  ben->add_option("--seed", seed);
  ben->add_option("--lr-sweep", sweep, "comma-separated learning rates");
  ben->add_option("--report", report_path, "also write the report here");
  ben->add_option("--series", series_path, "write the per-batch difference series");
  OptimizerFlags ben_opt;
  ben_opt.lr = 0.02;
  ben_opt.attach(ben);

  CLI11_PARSE(app, argc, argv);

  if (pre->parsed()) {
    const auto corpus = read_file(pre_corpus);
    const auto data = bytes_to_symbols(corpus, Alphabet(alphabet));
    ModelParams init =
        model_kind == "vae"
            ? ModelParams(ToyVaeParams::zeros(latent, alphabet))
            : ModelParams(ContextModelParams::zeros(model_kind == "order1" ? 1 : 0,
                                                    alphabet));
    const ModelParams params =
        pretrain_model(std::move(init), data, epochs, pre_opt.config(), pre_batch);
    write_file(pre_out, write_checkpoint(params));
    std::printf("final training bpd: %.6f\n", model_objective_bits(params, data));
    return 0;
  }

  if (cmp->parsed()) {
    const auto ckpt = read_checkpoint(read_file(cmp_ckpt));
    const auto input = read_file(cmp_in);
    const auto data = bytes_to_symbols(input, Alphabet(model_alphabet_size(ckpt)));

    OsoaConfig cfg;
    cfg.coder = coder == "ac" ? CoderKind::kAcFifo : CoderKind::kRansFilo;
    cfg.bits_back = bits_back;
    cfg.precision_bits = static_cast<std::uint8_t>(precision);
    cfg.batch_size = batch_size;
    cfg.chunk_size = chunk_size;
    cfg.optimizer = cmp_opt.config();
    cfg.schedule.updates_per_batch = updates;
    if (early_stop >= 0)
      cfg.schedule.early_stop_step = static_cast<std::uint32_t>(early_stop);
    cfg.seed = seed;
    cfg.background_flush = async_flush;

    const EncodeResult result = osoa_encode(data, ckpt, cfg);
    write_file(cmp_out, write_container(result.container));
    if (explode) {
      for (std::size_t i = 0; i < result.container.payloads.size(); ++i)
        write_file(cmp_out + ".chunk" + std::to_string(i),
                   result.container.payloads[i]);
    }
    if (!bpd_log_path.empty()) {
      std::ofstream log(bpd_log_path);
      if (!log) throw IoError("cannot open " + bpd_log_path + " for writing");
      write_bpd_log(log, result.batch_log);
    }
    std::printf("%zu symbols -> %zu chunks, final parameter checksum %016llx\n",
                data.size(), result.container.payloads.size(),
                static_cast<unsigned long long>(result.final_param_checksum));
    return 0;
  }

  if (dec->parsed()) {
    const auto ckpt = read_checkpoint(read_file(dec_ckpt));
    const Container container = read_container(read_file(dec_in));
    const auto data = osoa_decode(container, ckpt);
    write_file(dec_out, symbols_to_bytes(data));
    std::printf("decoded %zu symbols\n", data.size());
    return 0;
  }

  if (ins->parsed()) {
    const Container c = read_container(read_file(ins_in));
    const ContainerHeader& h = c.header;
    std::printf("magic OSC1 version 1\n");
    std::printf("coder: %s%s\n", h.coder == CoderKind::kAcFifo ? "ac-fifo" : "rans-filo",
                h.bits_back ? " + bits-back" : "");
    std::printf("precision_bits: %u\n", h.precision_bits);
    std::printf("batch_size: %u  chunk_size: %u  batches: %u\n", h.batch_size,
                h.chunk_size, h.batch_count());
    std::printf("data_length: %llu\n", static_cast<unsigned long long>(h.data_length));
    std::printf("optimizer: %s lr=%g beta1=%g beta2=%g eps=%g\n",
                h.optimizer.kind == OptimizerKind::kSgd ? "sgd" : "adamax",
                h.optimizer.learning_rate, h.optimizer.beta1, h.optimizer.beta2,
                h.optimizer.epsilon);
    if (h.schedule.early_stop_step)
      std::printf("schedule: %u updates/batch, early stop after batch %u\n",
                  h.schedule.updates_per_batch, *h.schedule.early_stop_step);
    else
      std::printf("schedule: %u updates/batch, no early stop\n",
                  h.schedule.updates_per_batch);
    std::printf("seed: %llu\n", static_cast<unsigned long long>(h.seed));
    std::printf("base model checksum: %016llx\n",
                static_cast<unsigned long long>(h.base_model_checksum));
    std::printf("chunks: %zu\n", c.chunks.size());
    for (std::size_t i = 0; i < c.chunks.size(); ++i) {
      const ChunkInfo& k = c.chunks[i];
      std::printf(
          "  chunk %zu: batches [%u,%u) offset %llu length %llu payload %016llx "
          "params %016llx\n",
          i, k.first_batch, k.end_batch, static_cast<unsigned long long>(k.offset),
          static_cast<unsigned long long>(k.length),
          static_cast<unsigned long long>(k.payload_checksum),
          static_cast<unsigned long long>(k.param_checksum));
    }
    return 0;
  }

  if (ben->parsed()) {
    scenario.osoa.coder = coder == "ac" ? CoderKind::kAcFifo : CoderKind::kRansFilo;
    scenario.osoa.precision_bits = static_cast<std::uint8_t>(precision);
    scenario.osoa.batch_size = batch_size;
    scenario.osoa.chunk_size = chunk_size;
    scenario.osoa.optimizer = ben_opt.config();
    scenario.osoa.schedule.updates_per_batch = updates;
    if (bench_early_stop >= 0)
      scenario.osoa.schedule.early_stop_step =
          static_cast<std::uint32_t>(bench_early_stop);
    scenario.osoa.seed = seed;
    if (!sweep.empty()) {
      std::stringstream ss(sweep);
      std::string item;
      while (std::getline(ss, item, ',')) scenario.lr_sweep.push_back(std::stod(item));
    }

    const BenchReport report = run_bench(scenario);
    std::ostringstream text;
    write_report(text, report);
    std::fputs(text.str().c_str(), stdout);
    if (!report_path.empty()) {
      std::ofstream f(report_path);
      if (!f) throw IoError("cannot open " + report_path + " for writing");
      write_report(f, report);
    }
    if (!series_path.empty()) {
      std::ofstream f(series_path);
      if (!f) throw IoError("cannot open " + series_path + " for writing");
      write_series(f, report);
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ChecksumError& e) {
    std::fprintf(stderr, "checksum error: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
