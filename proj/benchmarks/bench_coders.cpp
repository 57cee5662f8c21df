#include <benchmark/benchmark.h>

#include <random>

#include "osoa/arithmetic.hpp"
#include "osoa/huffman.hpp"
#include "osoa/rans.hpp"

namespace {

using namespace osoa;

Pmf random_pmf(std::mt19937_64& rng, std::size_t size) {
  std::vector<double> p(size);
  double sum = 0.0;
  for (auto& v : p) {
    v = 1e-3 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return Pmf(std::move(p));
}

std::vector<Symbol> random_syms(std::mt19937_64& rng, std::size_t size,
                                std::size_t n) {
  std::vector<Symbol> out(n);
  for (auto& s : out) s = static_cast<Symbol>(rng() % size);
  return out;
}

void BM_QuantizePmf(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Pmf pmf = random_pmf(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto q = quantize_pmf(pmf, 14);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_QuantizePmf)->Arg(16)->Arg(256);

void BM_RansStreamPush(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const std::size_t size = 256;
  const QuantizedPmf q = quantize_pmf(random_pmf(rng, size), 14);
  const auto syms = random_syms(rng, size, 1 << 14);
  for (auto _ : state) {
    StreamRans rans;
    for (std::size_t i = syms.size(); i-- > 0;) rans.push(q, syms[i]);
    benchmark::DoNotOptimize(rans);
  }
  state.SetItemsProcessed(state.iterations() * syms.size());
}
BENCHMARK(BM_RansStreamPush);

void BM_RansRoundTrip(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const std::size_t size = 256;
  const QuantizedPmf q = quantize_pmf(random_pmf(rng, size), 14);
  const auto syms = random_syms(rng, size, 1 << 14);
  for (auto _ : state) {
    StreamRans rans;
    for (std::size_t i = syms.size(); i-- > 0;) rans.push(q, syms[i]);
    Symbol sink = 0;
    for (std::size_t i = 0; i < syms.size(); ++i) sink ^= rans.pop(q);
    benchmark::DoNotOptimize(sink);
  }
  state.SetItemsProcessed(state.iterations() * syms.size());
}
BENCHMARK(BM_RansRoundTrip);

void BM_AcRoundTrip(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const std::size_t size = 256;
  const QuantizedPmf q = quantize_pmf(random_pmf(rng, size), 14);
  const auto syms = random_syms(rng, size, 1 << 14);
  for (auto _ : state) {
    AcEncoder enc;
    for (Symbol s : syms) enc.encode(q, s);
    const auto payload = enc.finish();
    AcDecoder dec(payload);
    Symbol sink = 0;
    for (std::size_t i = 0; i < syms.size(); ++i) sink ^= dec.decode(q);
    benchmark::DoNotOptimize(sink);
  }
  state.SetItemsProcessed(state.iterations() * syms.size());
}
BENCHMARK(BM_AcRoundTrip);

void BM_HuffmanBuild(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const Pmf pmf = random_pmf(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto cb = HuffmanCodebook::build(pmf);
    benchmark::DoNotOptimize(cb);
  }
}
BENCHMARK(BM_HuffmanBuild)->Arg(16)->Arg(256);

}  // namespace
