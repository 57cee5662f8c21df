#include <benchmark/benchmark.h>

#include "osoa/bench.hpp"
#include "osoa/pipeline.hpp"

namespace {

using namespace osoa;

struct Fixture {
  std::vector<Symbol> data;
  ModelParams base;

  Fixture() : base(ContextModelParams::zeros(1, 32)) {
    const auto logits = markov_transition_logits(32, 3.0, 11);
    data = sample_markov(logits, 32, 1 << 15, 12);
    OptimizerConfig opt;
    opt.learning_rate = 0.02;
    base = pretrain_model(std::move(base), data, 4, opt, 1024);
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_OsoaEncode(benchmark::State& state) {
  const auto& f = fixture();
  OsoaConfig cfg;
  cfg.coder = state.range(0) == 0 ? CoderKind::kAcFifo : CoderKind::kRansFilo;
  cfg.batch_size = 1024;
  cfg.chunk_size = 4;
  cfg.optimizer.learning_rate = 0.02;
  for (auto _ : state) {
    auto result = osoa_encode(f.data, f.base, cfg);
    benchmark::DoNotOptimize(result);
  }
  state.SetItemsProcessed(state.iterations() * f.data.size());
}
BENCHMARK(BM_OsoaEncode)->Arg(0)->Arg(1);

void BM_OsoaDecode(benchmark::State& state) {
  const auto& f = fixture();
  OsoaConfig cfg;
  cfg.batch_size = 1024;
  cfg.chunk_size = 4;
  cfg.optimizer.learning_rate = 0.02;
  const EncodeResult enc = osoa_encode(f.data, f.base, cfg);
  for (auto _ : state) {
    auto out = osoa_decode(enc.container, f.base);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * f.data.size());
}
BENCHMARK(BM_OsoaDecode);

}  // namespace
