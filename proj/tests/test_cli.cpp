#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "osoa/container.hpp"

using namespace osoa;

namespace {

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/osoa_cli_XXXXXX";
    path = mkdtemp(tmpl);
  }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(OSOA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string run_cli_capture(const std::string& args) {
  const std::string out = "/tmp/osoa_cli_capture.txt";
  const std::string cmd =
      std::string(OSOA_CLI_PATH) + " " + args + " >" + out + " 2>&1";
  if (std::system(cmd.c_str()) == -1) return {};
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> corpus_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(n);
  std::uint8_t prev = 0;
  for (auto& b : out) {
    // order-1 structure over a 64-symbol alphabet
    b = static_cast<std::uint8_t>((prev * 31 + rng() % 9) % 64);
    prev = b;
  }
  return out;
}

}  // namespace

TEST_CASE("pretrain, compress, decompress round trip through the binary") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(20000, 1));
  write_file(dir.file("input"), corpus_bytes(8000, 2));

  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model order1 --alphabet 64 --epochs 4 --batch-size 512") == 0);

  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("osc") +
                  " -c " + dir.file("ckpt") +
                  " --batch-size 500 --chunk-size 3 --bpd-log " +
                  dir.file("bpd.log")) == 0);

  REQUIRE(run_cli("decompress " + dir.file("osc") + " -o " + dir.file("out") +
                  " -c " + dir.file("ckpt")) == 0);

  CHECK(read_file(dir.file("out")) == read_file(dir.file("input")));

  // bpd log: 16 lines of "index theo cum"
  std::ifstream log(dir.file("bpd.log"));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) ++lines;
  CHECK(lines == 16);
}

TEST_CASE("a mebibyte survives the round trip") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(60000, 21));
  write_file(dir.file("input"), corpus_bytes(1 << 20, 22));
  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model order1 --alphabet 64 --epochs 3") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("osc") +
                  " -c " + dir.file("ckpt") +
                  " --batch-size 2048 --chunk-size 8") == 0);
  REQUIRE(run_cli("decompress " + dir.file("osc") + " -o " + dir.file("out") +
                  " -c " + dir.file("ckpt")) == 0);
  CHECK(read_file(dir.file("out")) == read_file(dir.file("input")));
  // and adaptation actually compresses below the static 6-bit content
  CHECK(read_file(dir.file("osc")).size() < (1 << 20));
}

TEST_CASE("two compress runs are byte-identical") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(10000, 3));
  write_file(dir.file("input"), corpus_bytes(6000, 4));
  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model order1 --alphabet 64 --epochs 2") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("a") + " -c " +
                  dir.file("ckpt") + " --seed 77 --coder rans --chunk-size 4") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("b") + " -c " +
                  dir.file("ckpt") + " --seed 77 --coder rans --chunk-size 4") == 0);
  CHECK(read_file(dir.file("a")) == read_file(dir.file("b")));
}

TEST_CASE("ac coder path works end to end") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(8000, 5));
  write_file(dir.file("input"), corpus_bytes(4000, 6));
  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model order0 --alphabet 64 --epochs 2") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("osc") +
                  " -c " + dir.file("ckpt") + " --coder ac") == 0);
  REQUIRE(run_cli("decompress " + dir.file("osc") + " -o " + dir.file("out") +
                  " -c " + dir.file("ckpt")) == 0);
  CHECK(read_file(dir.file("out")) == read_file(dir.file("input")));
}

TEST_CASE("bits-back vae path works end to end") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(6000, 7));
  write_file(dir.file("input"), corpus_bytes(3000, 8));
  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model vae --alphabet 64 --latent 3 --epochs 2") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("osc") +
                  " -c " + dir.file("ckpt") +
                  " --bits-back --seed 9 --chunk-size 2") == 0);
  REQUIRE(run_cli("decompress " + dir.file("osc") + " -o " + dir.file("out") +
                  " -c " + dir.file("ckpt")) == 0);
  CHECK(read_file(dir.file("out")) == read_file(dir.file("input")));
}

TEST_CASE("early stop zero matches a static second run byte for byte") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(8000, 9));
  write_file(dir.file("input"), corpus_bytes(5000, 10));
  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model order1 --alphabet 64 --epochs 2") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("a") + " -c " +
                  dir.file("ckpt") + " --early-stop 0") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("b") + " -c " +
                  dir.file("ckpt") + " --early-stop 0 --lr 0.5") == 0);
  // adaptation is off, so the learning rate cannot change the payload bits
  const Container a = read_container(read_file(dir.file("a")));
  const Container b = read_container(read_file(dir.file("b")));
  CHECK(a.payloads == b.payloads);
}

TEST_CASE("explode writes one payload file per chunk") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(6000, 11));
  write_file(dir.file("input"), corpus_bytes(4000, 12));
  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model order0 --alphabet 64 --epochs 1") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("osc") +
                  " -c " + dir.file("ckpt") +
                  " --batch-size 1000 --chunk-size 2 --explode") == 0);
  const Container c = read_container(read_file(dir.file("osc")));
  REQUIRE(c.chunks.size() == 2);
  for (std::size_t i = 0; i < c.chunks.size(); ++i)
    CHECK(read_file(dir.file("osc.chunk" + std::to_string(i))) == c.payloads[i]);
}

TEST_CASE("inspect prints the header fields") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(4000, 13));
  write_file(dir.file("input"), corpus_bytes(2000, 14));
  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model order0 --alphabet 64 --epochs 1") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("osc") +
                  " -c " + dir.file("ckpt") + " --seed 31337") == 0);
  const std::string out = run_cli_capture("inspect " + dir.file("osc"));
  CHECK(out.find("rans-filo") != std::string::npos);
  CHECK(out.find("data_length: 2000") != std::string::npos);
  CHECK(out.find("seed: 31337") != std::string::npos);
  CHECK(out.find("chunk 0") != std::string::npos);
}

TEST_CASE("exit codes distinguish failure classes") {
  TempDir dir;
  write_file(dir.file("corpus"), corpus_bytes(4000, 15));
  write_file(dir.file("input"), corpus_bytes(2000, 16));
  REQUIRE(run_cli("pretrain " + dir.file("corpus") + " -o " + dir.file("ckpt") +
                  " --model order0 --alphabet 64 --epochs 1") == 0);
  REQUIRE(run_cli("compress " + dir.file("input") + " -o " + dir.file("osc") +
                  " -c " + dir.file("ckpt")) == 0);

  // 4: missing input file
  CHECK(run_cli("decompress " + dir.file("nope") + " -o " + dir.file("o") + " -c " +
                dir.file("ckpt")) == 4);

  // 2: not a container
  CHECK(run_cli("decompress " + dir.file("input") + " -o " + dir.file("o") + " -c " +
                dir.file("ckpt")) == 2);

  // 3: flipped payload byte
  auto bytes = read_file(dir.file("osc"));
  bytes[bytes.size() - 3] ^= 0x20;
  write_file(dir.file("bad"), bytes);
  CHECK(run_cli("decompress " + dir.file("bad") + " -o " + dir.file("o") + " -c " +
                dir.file("ckpt")) == 3);

  // 3: wrong checkpoint for the container
  write_file(dir.file("corpus2"), corpus_bytes(4000, 17));
  REQUIRE(run_cli("pretrain " + dir.file("corpus2") + " -o " + dir.file("ckpt2") +
                  " --model order0 --alphabet 64 --epochs 2") == 0);
  CHECK(run_cli("decompress " + dir.file("osc") + " -o " + dir.file("o") + " -c " +
                dir.file("ckpt2")) == 3);

  // 2: byte outside the declared alphabet
  std::vector<std::uint8_t> overflow{1, 2, 200};
  write_file(dir.file("over"), overflow);
  CHECK(run_cli("compress " + dir.file("over") + " -o " + dir.file("o") + " -c " +
                dir.file("ckpt")) == 2);
}

TEST_CASE("pretraining is byte-deterministic and converges to the source entropy") {
  TempDir dir;
  // i.i.d. uniform bytes: the zero-initialized model is already uniform,
  // so training holds the bpd at 8.
  std::mt19937_64 rng(404);
  std::vector<std::uint8_t> uniform(16384);
  for (auto& b : uniform) b = static_cast<std::uint8_t>(rng());
  write_file(dir.file("uniform"), uniform);
  const std::string out = run_cli_capture(
      "pretrain " + dir.file("uniform") + " -o " + dir.file("u.ckpt") +
      " --model order0 --epochs 3 --lr 0.02");
  const double bpd = std::stod(out.substr(out.find(':') + 1));
  CHECK(std::abs(bpd - 8.0) < 0.05);

  // biased source: P = (1/2, 1/4, 1/8, 1/8), entropy 1.75 bits
  std::vector<std::uint8_t> biased(32768);
  for (auto& b : biased) {
    const std::uint64_t u = rng() % 8;
    b = u < 4 ? 0 : (u < 6 ? 1 : (u < 7 ? 2 : 3));
  }
  write_file(dir.file("biased"), biased);
  const std::string out2 = run_cli_capture(
      "pretrain " + dir.file("biased") + " -o " + dir.file("b.ckpt") +
      " --model order0 --alphabet 4 --epochs 40 --lr 0.05 --batch-size 2048");
  const double bpd2 = std::stod(out2.substr(out2.find(':') + 1));
  CHECK(std::abs(bpd2 - 1.75) < 0.05);

  // same invocation, byte-identical checkpoint
  REQUIRE(run_cli("pretrain " + dir.file("biased") + " -o " + dir.file("b2.ckpt") +
                  " --model order0 --alphabet 4 --epochs 40 --lr 0.05 "
                  "--batch-size 2048") == 0);
  CHECK(read_file(dir.file("b.ckpt")) == read_file(dir.file("b2.ckpt")));
}

TEST_CASE("bench smoke run emits the report and the series") {
  TempDir dir;
  const std::string out = run_cli_capture(
      "bench --alphabet 16 --pretrain-len 4096 --target-len 8192 --batch-size 512 "
      "--pretrain-epochs 6 --lr 0.05 --report " +
      dir.file("report.txt") + " --series " + dir.file("series.txt"));
  CHECK(out.find("PreTrain") != std::string::npos);
  CHECK(out.find("OSOA") != std::string::npos);
  CHECK(out.find("FineTune-v1") != std::string::npos);
  std::ifstream series(dir.file("series.txt"));
  std::string line;
  int lines = 0;
  while (std::getline(series, line)) ++lines;
  CHECK(lines == 16);

  // identical invocation: identical series (timing fields live only in the report)
  run_cli_capture(
      "bench --alphabet 16 --pretrain-len 4096 --target-len 8192 --batch-size 512 "
      "--pretrain-epochs 6 --lr 0.05 --series " +
      dir.file("series2.txt"));
  CHECK(read_file(dir.file("series.txt")) == read_file(dir.file("series2.txt")));
}
