#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "osoa/pipeline.hpp"

namespace osoa {

/// Synthetic order-1 Markov sources with a parameter shift between the
/// pretraining corpus and the target corpus, all driven by fixed seeds.
struct BenchScenario {
  std::uint32_t alphabet = 32;
  std::size_t pretrain_len = std::size_t{1} << 15;
  std::size_t target_len = std::size_t{1} << 16;
  std::uint64_t source_seed = 7;
  double shift = 0.6;       // blend weight toward a fresh transition table
  double logit_gain = 3.0;  // peakedness of the transition rows

  std::uint32_t pretrain_epochs = 30;
  std::uint32_t finetune_v1_epochs = 2;  // same optimisation budget as OSOA
  std::uint32_t finetune_v2_epochs = 4;  // time-comparable budget
  bool include_retrain = false;
  std::uint32_t retrain_epochs = 8;

  OsoaConfig osoa;  // coder, precision, batch size, chunk size, optimizer, schedule

  std::vector<double> lr_sweep;  // optional: one OSOA run per learning rate
};

struct BenchRow {
  std::string name;
  double code_bpd_theoretical = 0.0;  // under quantized coding tables
  double code_bpd_model = 0.0;        // under the unquantized model
  double code_bpd_real = 0.0;         // emitted payload bits per symbol
  double model_bpd = 0.0;             // stored-model charge, 64 bits/parameter
  double total_bpd = 0.0;
  double gap_bits = 0.0;              // real minus theoretical, absolute bits
  std::size_t streams = 0;            // independent coder streams (chunks)
  double wall_seconds = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<double> osoa_minus_pretrain;  // per-batch bpd difference
  double diff_slope = 0.0;                  // least-squares slope over t
  double quant_kl_bpd = 0.0;  // quantized minus model bpd on the OSOA path
  std::uint64_t model_param_count = 0;
  std::size_t target_len = 0;
  /// Corpus size below which the FineTune model charge alone outweighs its
  /// code advantage over OSOA (from the v1 row).
  std::size_t model_dominance_threshold = 0;
  std::vector<std::pair<double, double>> lr_sweep;  // (lr, osoa bpd)

  const BenchRow& row(const std::string& name) const;
};

std::vector<double> markov_transition_logits(std::uint32_t alphabet, double gain,
                                             std::uint64_t seed);

/// Blend: (1-shift)*base + shift*fresh, rowwise over logits.
std::vector<double> shifted_transition_logits(const std::vector<double>& base,
                                              std::uint32_t alphabet, double gain,
                                              double shift, std::uint64_t seed);

std::vector<Symbol> sample_markov(const std::vector<double>& transition_logits,
                                  std::uint32_t alphabet, std::size_t len,
                                  std::uint64_t seed);

/// Full passes of the configured optimizer over the corpus; one update per
/// batch, fixed batch order. Deterministic.
ModelParams pretrain_model(ModelParams init, std::span<const Symbol> data,
                           std::uint32_t epochs, const OptimizerConfig& opt,
                           std::uint32_t batch_size);

BenchReport run_bench(const BenchScenario& scenario);

void write_report(std::ostream& os, const BenchReport& report);
void write_series(std::ostream& os, const BenchReport& report);

}  // namespace osoa
