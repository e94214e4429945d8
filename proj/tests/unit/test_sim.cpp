#include <catch_amalgamated.hpp>

#include <cstdint>
#include <random>

#include "tensopt/bench/gemm.hpp"
#include "tensopt/core/files.hpp"
#include "tensopt/dsl/diagnostic.hpp"
#include "tensopt/dsl/parser.hpp"
#include "tensopt/sim/address.hpp"
#include "tensopt/sim/config.hpp"
#include "tensopt/sim/simulator.hpp"

using namespace tensopt;
using namespace tensopt::sim;

namespace {

dsl::KernelProgram parse_ok(const std::string& src) {
  auto r = dsl::parse_kernel(src);
  INFO(dsl::format(r.diagnostics));
  REQUIRE(r.program);
  return *r.program;
}

Tensor random_int8(std::vector<std::size_t> shape, std::mt19937& rng) {
  Tensor t(ScalarType::I8, std::move(shape));
  std::uniform_int_distribution<int> d(-128, 127);
  for (std::size_t i = 0; i < t.size(); ++i) t.set_int(i, d(rng));
  return t;
}

Tensor random_float(std::vector<std::size_t> shape, std::mt19937& rng) {
  Tensor t(ScalarType::F32, std::move(shape));
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  for (std::size_t i = 0; i < t.size(); ++i) t.set(i, d(rng));
  return t;
}

// Plain triple loop kept local to this file: int32 sum, then round-half-even
// (exact for integers) and clamp to int8.
std::vector<int> naive_gemm(const Tensor& A, const Tensor& B) {
  const auto M = A.shape[0], K = A.shape[1], N = B.shape[1];
  std::vector<int> C(M * N);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      std::int64_t s = 0;
      for (std::size_t k = 0; k < K; ++k) s += A.get_int(i * K + k) * B.get_int(k * N + j);
      C[i * N + j] = static_cast<int>(std::clamp<std::int64_t>(s, -128, 127));
    }
  }
  return C;
}

std::int64_t latency(const dsl::KernelProgram& p, const AcceleratorConfig& cfg, const TensorMap& in) {
  auto r = run_timed(p, cfg, in);
  INFO(r.error);
  REQUIRE(r.ok);
  return r.perf->total_cycles;
}

TensorMap gemm_inputs(std::size_t M, std::size_t K, std::size_t N, unsigned seed) {
  std::mt19937 rng(seed);
  return {{"A", random_int8({M, K}, rng)}, {"B", random_int8({K, N}, rng)}};
}

// Union length of the given [start, end) intervals.
std::int64_t covered(std::vector<std::pair<std::int64_t, std::int64_t>> iv) {
  std::sort(iv.begin(), iv.end());
  std::int64_t total = 0, cur_s = 0, cur_e = -1;
  for (auto [s, e] : iv) {
    if (s > cur_e) {
      if (cur_e > cur_s) total += cur_e - cur_s;
      cur_s = s, cur_e = e;
    } else {
      cur_e = std::max(cur_e, e);
    }
  }
  if (cur_e > cur_s) total += cur_e - cur_s;
  return total;
}

// Cycles during which loads reading `array` ran while the execute controller was busy.
std::int64_t overlapped_load_cycles(const std::vector<Event>& ev, const std::string& array) {
  std::vector<std::pair<std::int64_t, std::int64_t>> load, exec, both;
  for (const auto& e : ev) {
    bool reads_array = std::any_of(e.rows.begin(), e.rows.end(),
                                   [&](const RowRange& r) { return r.mem == "dram:" + array; });
    if (e.controller == "load" && reads_array) load.push_back({e.start_cycle, e.end_cycle});
    if (e.controller == "execute") exec.push_back({e.start_cycle, e.end_cycle});
  }
  both = load;
  both.insert(both.end(), exec.begin(), exec.end());
  return covered(load) + covered(exec) - covered(both);
}

}  // namespace

TEST_CASE("local address decoding") {
  auto a = decode_local_address(0x00000000, Access::Write);
  CHECK(a.space == Space::Scratchpad);
  CHECK(a.row == 0);

  auto b = decode_local_address(0x80000000, Access::Write);
  CHECK(b.space == Space::Accumulator);
  CHECK_FALSE(b.accumulate);
  CHECK(b.row == 0);

  auto c = decode_local_address(0xC0000064, Access::Write);
  CHECK(c.space == Space::Accumulator);
  CHECK(c.accumulate);
  CHECK(c.row == 100);

  auto d = decode_local_address(0xA0000000, Access::Read);
  CHECK(d.space == Space::Accumulator);
  CHECK(d.full_width_read);
  CHECK_FALSE(d.accumulate);
}

TEST_CASE("local address encode/decode round trip") {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    auto row = static_cast<std::uint32_t>(rng() & kRowMask);
    bool acc = rng() & 1, flag = rng() & 1;
    Space sp = acc ? Space::Accumulator : Space::Scratchpad;
    Access ac = (rng() & 1) ? Access::Read : Access::Write;
    std::uint32_t raw = encode_local_address(sp, row, ac == Access::Write && flag, ac == Access::Read && flag);
    auto d = decode_local_address(raw, ac);
    CHECK(d.space == sp);
    CHECK(d.row == row);
    CHECK(d.accumulate == (acc && ac == Access::Write && flag));
    CHECK(d.full_width_read == (acc && ac == Access::Read && flag));
  }
}

TEST_CASE("identity weights reproduce A on a 4x4 float array") {
  auto p = parse_ok(R"(
void test(float A[4][4], float I[4][4], float C[4][4]) {
  config_ex(WEIGHT_STATIONARY, NO_ACTIVATION, 1, false, false);
  config_ld(16, 1.0, 4, 0);
  config_st(16);
  mvin(A, 0, 4, 4);
  mvin(I, 4, 4, 4);
  preload(4, 1 << 31, 4, 4, 4, 4);
  compute_preloaded(0, 0xffffffff, 4, 4, 4, 4);
  mvout(C, 1 << 31, 4, 4);
  fence();
})");
  std::mt19937 rng(3);
  Tensor A = random_float({4, 4}, rng), I(ScalarType::F32, {4, 4});
  for (int i = 0; i < 4; ++i) I.set(i * 5, 1.0);
  auto r = run_functional(p, instance_b(), {{"A", A}, {"I", I}});
  REQUIRE(r.ok);
  CHECK(r.arrays.at("C") == A);
}

TEST_CASE("load scale of -1 negates") {
  auto p = parse_ok(R"(
void test(float x[4][4], float y[4][4]) {
  config_ld(16, -1.0, 4, 0);
  config_st(16);
  mvin(x, 0, 4, 4);
  mvout(y, 0, 4, 4);
  fence();
})");
  std::mt19937 rng(5);
  Tensor x = random_float({4, 4}, rng);
  auto r = run_functional(p, instance_b(), {{"x", x}});
  REQUIRE(r.ok);
  for (std::size_t i = 0; i < 16; ++i) CHECK(r.arrays.at("y").get(i) == -x.get(i));
}

TEST_CASE("dram address 0 zero-fills a 16x16 accumulator block") {
  auto p = parse_ok(R"(
void test(int8_t C[16][16]) {
  config_ld(0, 1.0, 16, 0);
  config_st(16);
  mvin(0, 1 << 31, 16, 16);
  mvout(C, 1 << 31, 16, 16);
  fence();
})");
  Tensor C(ScalarType::I8, {16, 16});
  for (std::size_t i = 0; i < C.size(); ++i) C.set_int(i, 99);
  auto r = run_functional(p, instance_a(), {{"C", C}}, {}, 12345);
  REQUIRE(r.ok);
  for (std::size_t i = 0; i < 256; ++i) REQUIRE(r.arrays.at("C").get_int(i) == 0);
}

TEST_CASE("unoptimized GEMM template matches a plain triple loop") {
  std::mt19937 pick(11);
  const int dims[] = {16, 32, 48, 64};
  for (int trial = 0; trial < 12; ++trial) {
    int M = dims[pick() % 4], K = dims[pick() % 4], N = dims[pick() % 4];
    auto p = parse_ok(bench::gemm_unopt(M, K, N));
    auto in = gemm_inputs(M, K, N, 100 + trial);
    auto r = run_functional(p, instance_a(), in, {}, trial);
    INFO(M << "x" << K << "x" << N);
    REQUIRE(r.ok);
    auto want = naive_gemm(in.at("A"), in.at("B"));
    for (std::size_t i = 0; i < want.size(); ++i) REQUIRE(r.arrays.at("C").get_int(i) == want[i]);
  }
}

TEST_CASE("a lone fence costs its statement plus the drain overhead") {
  auto p = parse_ok("void test(int8_t x[1]) { fence(); }");
  auto r = run_timed(p, instance_a(), {});
  REQUIRE(r.ok);
  const auto& t = instance_a().timing;
  CHECK(r.perf->total_cycles == t.cpu_node_cost + t.fence_drain_overhead);
}

TEST_CASE("optimization fixture pairs are faster in the optimized member") {
  struct Pair {
    std::string name;
    std::size_t M, K, N;
  };
  for (const auto& f : {Pair{"hoist_config", 64, 64, 64}, Pair{"double_buffer", 64, 64, 64},
                        Pair{"pipeline", 128, 256, 16}}) {
    auto before = parse_ok(read_asset("fixtures/" + f.name + "_before.gk"));
    auto after = parse_ok(read_asset("fixtures/" + f.name + "_after.gk"));
    auto in = gemm_inputs(f.M, f.K, f.N, 1);
    INFO(f.name);
    auto rb = run_timed(before, instance_a(), in, {}, true);
    auto ra = run_timed(after, instance_a(), in, {}, true);
    REQUIRE(rb.ok);
    REQUIRE(ra.ok);
    CHECK(ra.arrays.at("C") == rb.arrays.at("C"));
    CHECK(ra.perf->total_cycles < rb.perf->total_cycles);
    if (f.name == "pipeline") {
      // A-panel loads now run under compute.
      CHECK(overlapped_load_cycles(ra.events, "A") > overlapped_load_cycles(rb.events, "A"));
    }
  }
}

TEST_CASE("slower DMA never makes a kernel faster") {
  std::vector<std::pair<dsl::KernelProgram, TensorMap>> cases;
  cases.push_back({parse_ok(bench::gemm_unopt(64, 64, 64)), gemm_inputs(64, 64, 64, 2)});
  cases.push_back({parse_ok(read_asset("fixtures/pipeline_after.gk")), gemm_inputs(128, 256, 16, 2)});
  cases.push_back({parse_ok(bench::gemm_stage(64, 128, 64, 7)), gemm_inputs(64, 128, 64, 2)});
  for (auto& [p, in] : cases) {
    std::int64_t prev = -1;
    for (std::int64_t startup : {1, 10, 20, 40, 80, 200}) {
      auto cfg = instance_a();
      cfg.timing.dma_startup = startup;
      auto t = latency(p, cfg, in);
      CHECK(t >= prev);
      prev = t;
    }
    prev = -1;
    for (std::int64_t bus : {64, 32, 16, 8, 4, 1}) {
      auto cfg = instance_a();
      cfg.timing.bus_bytes_per_cycle = bus;
      auto t = latency(p, cfg, in);
      CHECK(t >= prev);
      prev = t;
    }
  }
}

TEST_CASE("trace checker accepts simulator traces and flags overlaps") {
  auto p = parse_ok(read_asset("fixtures/double_buffer_after.gk"));
  auto r = run_timed(p, instance_a(), gemm_inputs(64, 64, 64, 4), {}, true);
  REQUIRE(r.ok);
  REQUIRE_FALSE(r.events.empty());
  CHECK(check_trace(r.events).empty());

  Event w{"mvin", "load", 0, 10, 30, {RowRange{"spad", 0, 16, 1, true}}};
  Event rd{"compute_preloaded", "execute", 1, 20, 40, {RowRange{"spad", 8, 4, 1, false}}};
  CHECK_FALSE(check_trace({w, rd}).empty());
  rd.start_cycle = 30;
  CHECK(check_trace({w, rd}).empty());
  rd.rows[0].first = 16;  // disjoint rows may overlap in time
  rd.start_cycle = 15;
  CHECK(check_trace({w, rd}).empty());
}

TEST_CASE("timed and functional runs agree bit for bit") {
  std::vector<std::pair<dsl::KernelProgram, TensorMap>> cases;
  for (int s : {0, 3, 5, 8, 9}) cases.push_back({parse_ok(bench::gemm_stage(64, 128, 64, s)), gemm_inputs(64, 128, 64, s)});
  cases.push_back({parse_ok(read_asset("fixtures/pipeline_before.gk")), gemm_inputs(128, 256, 16, 6)});
  for (auto& [p, in] : cases) {
    auto f = run_functional(p, instance_a(), in, {}, 77);
    auto t = run_timed(p, instance_a(), in, {}, false, 77);
    REQUIRE(f.ok);
    REQUIRE(t.ok);
    CHECK(f.arrays == t.arrays);
  }
}

TEST_CASE("feedback line format") {
  PerfReport r;
  r.total_cycles = 1000;
  r.spad_util_kb = 16.0;
  r.acc_util_kb = 4.0;
  CHECK(compute_feedback(r, instance_a()) ==
        "Latency: 1000 cycles. Scratchpad utilization: 16.0 KB / 256 KB. Accumulator utilization: "
        "4.0 KB / 64 KB.");
}

TEST_CASE("utilization: resident B counts its 16 KB, empty kernel counts nothing") {
  // 256x64 int8 B kept resident in the scratchpad = 256 * 64 bytes.
  auto p = parse_ok(read_asset("kernels/gemm_12544x64x256_autocomp.gk"));
  auto r = run_timed(p, instance_a(), gemm_inputs(12544, 256, 64, 1));
  REQUIRE(r.ok);
  CHECK(r.perf->spad_util_kb >= 16.0);
  CHECK(r.perf->spad_util_kb <= 256.0);
  CHECK(r.perf->acc_util_kb <= 64.0);

  auto empty = run_timed(parse_ok("void test(int8_t x[1]) { }"), instance_a(), {});
  REQUIRE(empty.ok);
  CHECK(empty.perf->spad_util_kb == 0.0);
  CHECK(empty.perf->acc_util_kb == 0.0);
  CHECK_THAT(compute_feedback(*empty.perf, instance_a()),
             Catch::Matchers::ContainsSubstring("0.0 KB / 256 KB") &&
                 Catch::Matchers::ContainsSubstring("0.0 KB / 64 KB"));
}

TEST_CASE("generated unoptimized GEMM equals the shipped asset") {
  auto gen = parse_ok(bench::gemm_unopt(12544, 256, 64));
  auto asset = parse_ok(read_asset("kernels/gemm_12544x64x256_unopt.gk"));
  CHECK(gen == asset);
}

TEST_CASE("every GEMM schedule stage computes the product") {
  for (auto [M, K, N] : {std::tuple{64, 64, 64}, std::tuple{48, 64, 128}, std::tuple{96, 128, 64}}) {
    auto in = gemm_inputs(M, K, N, M + K + N);
    auto want = naive_gemm(in.at("A"), in.at("B"));
    for (int s = 0; s < bench::gemm_stage_count(); ++s) {
      INFO(M << "x" << K << "x" << N << " stage " << s);
      auto p = parse_ok(bench::gemm_stage(M, K, N, s));
      auto r = run_timed(p, instance_a(), in, {}, true, 31 + s);
      REQUIRE(r.ok);
      CHECK(check_trace(r.events).empty());
      bool same = true;
      for (std::size_t i = 0; i < want.size(); ++i) same = same && r.arrays.at("C").get_int(i) == want[i];
      CHECK(same);
    }
  }
  CHECK_THROWS_AS(bench::gemm_stage(64, 64, 64, bench::gemm_stage_count()), std::invalid_argument);
}

TEST_CASE("runaway loops hit the node guard") {
  auto p = parse_ok("void test(int8_t x[1]) { for (int i = 0; i < 1000000; i++) { } }");
  auto c = Program::compile(p, instance_a());
  REQUIRE(c.program);
  RunOptions o;
  o.node_limit = 10000;
  auto r = c.program->run({}, o);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.error.empty());
}
