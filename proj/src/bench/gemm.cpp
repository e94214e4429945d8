#include "tensopt/bench/gemm.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace tensopt::bench {
namespace {

// Largest of 4, 3, 2, 1 dividing n.
int inner_factor(int n) {
  for (int f : {4, 3, 2}) {
    if (n % f == 0) return f;
  }
  return 1;
}

void check_dims(int M, int K, int N) {
  if (M <= 0 || K <= 0 || N <= 0 || M % 16 || K % 16 || N % 16) {
    throw std::invalid_argument(fmt::format("GEMM dims {}x{}x{} must be positive multiples of 16", M, K, N));
  }
}

}  // namespace

std::string gemm_unopt(int M, int K, int N) {
  check_dims(M, K, N);
  const int J = inner_factor(N / 16);   // 16-column output tiles per j block
  const int KI = inner_factor(K / 16);  // 16-row k tiles per ko block
  const int JO = N / (16 * J);
  const int KO = K / (16 * KI);
  std::string s;
  auto out = [&](fmt::string_view f, const auto&... args) { s += fmt::format(fmt::runtime(f), args...); };
  out("void test(int8_t A[{0}][{1}], int8_t B[{1}][{2}], int8_t C[{0}][{2}]) {{\n", M, K, N);
  out("  config_st(({}));\n", N);
  out("  config_ex(WEIGHT_STATIONARY, NO_ACTIVATION, 1, false, false);\n");
  out("  config_ld(({}), 1.0f, 16, 2);\n", N);
  out("  config_ld(({}), 1.0f, 16, 1);\n", K);
  out("  config_ld(0, 1.0f, 0, 0);\n\n");
  out("  for (int_fast32_t i = 0; i < {}; i++) {{\n", M / 16);
  out("    for (int_fast32_t j = 0; j < {}; j++) {{\n", JO);
  out("      uint32_t res = 1 << 31;\n");
  out("      for (int_fast32_t j_in_o = 0; j_in_o < {}; j_in_o++) {{\n", J);
  out("        mvin( 0, res + ((j_in_o) * (256))/16,(16 + 0), (16 + 0) );\n");
  out("      }}\n");
  out("      uint32_t a = 0;\n");
  out("      uint32_t b = 16 * 16 * {} * {} / 16;\n", KI, KO);
  out("      for (int_fast32_t ko = 0; ko < {}; ko++) {{\n", KO);
  out("        mvin2( &A[(16 * i)][{0} * ko], a + ((ko) * ({1}))/16, 16*({2} + 0), (16 + 0) );\n",
      16 * KI, 256 * KI, KI);
  out("        for (int_fast32_t k = 0; k < {}; k++) {{\n", KI);
  out("          mvin3( &B[({0} * ko + 16 * k)][{1} * j], b + ((ko) * ({2}) + (k) * ({3}))/16, "
      "16*({4} + 0), (16 + 0) );\n",
      16 * KI, 16 * J, 256 * J * KI, 256 * J, J);
  out("        }}\n");
  out("        for (int_fast32_t k = 0; k < {}; k++) {{\n", KI);
  out("          for (int_fast32_t j_in_o = 0; j_in_o < {}; j_in_o++) {{\n", J);
  out("            preload(b + ((ko) * ({0}) + (k) * ({1}) + (j_in_o) * (256))/16, res + ((j_in_o) * "
      "(256))/16 | 0x40000000, (16 + 0), (16 + 0), (16 + 0), (16 + 0));\n",
      256 * J * KI, 256 * J);
  out("            compute_preloaded(a + ((ko) * ({0}) + (k) * (256))/16, ~((uint32_t)0), (16 + 0), "
      "(16 + 0), 16, 16);\n",
      256 * KI);
  out("          }}\n");
  out("        }}\n");
  out("      }}\n");
  out("      for (int_fast32_t j_in_o = 0; j_in_o < {}; j_in_o++) {{\n", J);
  out("        mvout( &C[(16 * i)][16 * j_in_o + {} * j], res + ((j_in_o) * (256))/16, (16 + 0), "
      "(16 + 0) );\n",
      16 * J);
  out("      }}\n");
  out("    }}\n");
  out("  }}\n");
  out("  fence();\n");
  out("}}\n");
  return s;
}

}  // namespace tensopt::bench
