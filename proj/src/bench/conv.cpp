#include "tensopt/bench/conv.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace tensopt::bench {

std::string conv_unopt(const verify::ConvDims& d) {
  const int O = d.out_spatial();
  if (d.batch < 1 || d.stride < 1 || O < 1 || O > 16 || d.in_ch % 16 || d.out_ch % 16 ||
      d.in_ch <= 0 || d.out_ch <= 0) {
    throw std::invalid_argument("conv_unopt needs 1 <= out_spatial <= 16 and channels in multiples of 16");
  }
  const int H = d.spatial, R = d.kernel;
  std::string s;
  auto out = [&](fmt::string_view f, const auto&... args) { s += fmt::format(fmt::runtime(f), args...); };
  out("void test(int8_t inp[{}][{}][{}], int8_t weights[{}][{}], int32_t bias[{}], int8_t out[{}][{}][{}]) {{\n",
      d.batch * H, H, d.in_ch, R * R * d.in_ch, d.out_ch, d.out_ch, d.batch * O, O, d.out_ch);
  out("  config_ex(WEIGHT_STATIONARY, NO_ACTIVATION, 1, false, false);\n");
  out("  config_st({});\n", d.out_ch);
  out("  config_ld({}, 1.0, 16, 0);\n", d.stride * d.in_ch);
  out("  config_ld({}, 1.0, 16, 1);\n", d.out_ch);
  out("  config_ld(0, 1.0, 16, 2);\n");
  out("  for (int b = 0; b < {}; b++) {{\n", d.batch);
  out("    for (int oy = 0; oy < {}; oy++) {{\n", O);
  out("      for (int co = 0; co < {}; co++) {{\n", d.out_ch / 16);
  out("        uint32_t acc = 1 << 31;\n");
  out("        mvin3(&bias[co * 16], acc, 16, {});\n", O);
  out("        for (int kh = 0; kh < {}; kh++) {{\n", R);
  out("          for (int kw = 0; kw < {}; kw++) {{\n", R);
  out("            for (int ci = 0; ci < {}; ci++) {{\n", d.in_ch / 16);
  out("              mvin(&inp[b * {} + oy * {} + kh][kw][ci * 16], 0, 16, {});\n", H, d.stride, O);
  out("              mvin2(&weights[(kh * {} + kw) * {} + ci * 16][co * 16], 16, 16, 16);\n", R, d.in_ch);
  out("              preload(16, acc | 0x40000000, 16, 16, 16, {});\n", O);
  out("              compute_preloaded(0, 0xffffffff, 16, {}, 16, 16);\n", O);
  out("            }}\n");
  out("          }}\n");
  out("        }}\n");
  out("        mvout(&out[b * {} + oy][0][co * 16], acc, 16, {});\n", O, O);
  out("      }}\n");
  out("    }}\n");
  out("  }}\n");
  out("  fence();\n");
  out("}}\n");
  return s;
}

}  // namespace tensopt::bench
