#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "tensopt/bench/gemm.hpp"

namespace tensopt::bench {
namespace {

using Vars = std::vector<std::pair<std::string, std::string>>;

// Replaces @NAME@ tokens in a kernel template.
std::string fill(std::string t, const Vars& vars) {
  for (const auto& [name, value] : vars) {
    const std::string key = "@" + name + "@";
    for (auto p = t.find(key); p != std::string::npos; p = t.find(key, p + value.size())) {
      t.replace(p, key.size(), value);
    }
  }
  return t;
}

const char* const kHeader =
    "void test(int8_t A[@M@][@K@], int8_t B[@K@][@N@], int8_t C[@M@][@N@]) {\n";

const char* const kConfig = R"(  config_st(@N@);
  config_ex(WEIGHT_STATIONARY, NO_ACTIVATION, 1, false, false);
  config_ld(@N@, 1.0f, tile_dim, 2);
  config_ld(@K@, 1.0f, tile_dim, 1);
  config_ld(0, 1.0f, 0, 0);
)";

// 1: hoist constants and loop-invariant address arithmetic.
const char* const kHoist = R"(  const uint32_t tile_dim = 16;
  const uint32_t res = 1U << 31;
  const uint32_t a = 0;
  const uint32_t b = @K@;
@CONFIG@
  for (int i = 0; i < @MT@; i++) {
    uint32_t a_row = 16 * i;
    for (int j = 0; j < @NJ@; j++) {
      uint32_t b_col = 64 * j;
      for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
        mvin(0, res + j_in_o * tile_dim, tile_dim, tile_dim);
      }
      for (int ko = 0; ko < @KC@; ko++) {
        uint32_t a_ko = a + ko * 64;
        uint32_t b_ko = b + ko * 256;
        mvin2(&A[a_row][64 * ko], a_ko, 64, tile_dim);
        for (int k = 0; k < 4; k++) {
          mvin3(&B[64 * ko + 16 * k][b_col], b_ko + k * 64, 64, tile_dim);
        }
        for (int k = 0; k < 4; k++) {
          for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
            preload(b_ko + k * 64 + j_in_o * tile_dim, (res + j_in_o * tile_dim) | 0x40000000, tile_dim, tile_dim, tile_dim, tile_dim);
            compute_preloaded(a_ko + k * tile_dim, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          }
        }
      }
      for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
        mvout(&C[a_row][b_col + j_in_o * tile_dim], res + j_in_o * tile_dim, tile_dim, tile_dim);
      }
    }
  }
  fence();
}
)";

// 2: two scratchpad regions for the A and B tiles, alternating every (i, j)
// iteration; the accumulator is zeroed after the first loads are issued.
const char* const kDoubleBuffer = R"(  const uint32_t tile_dim = 16;
  const uint32_t res = 1U << 31;
  const uint32_t a = 0;
  const uint32_t b = @K2@;
  uint32_t buffer_toggle = 0;
@CONFIG@
  for (int i = 0; i < @MT@; i++) {
    uint32_t a_row = 16 * i;
    for (int j = 0; j < @NJ@; j++) {
      uint32_t b_col = 64 * j;
      uint32_t a_buf = a + buffer_toggle * @K@;
      uint32_t b_buf = b + buffer_toggle * @K4@;
      for (int ko = 0; ko < @KC@; ko++) {
        uint32_t a_ko = a_buf + ko * 64;
        uint32_t b_ko = b_buf + ko * 256;
        mvin2(&A[a_row][64 * ko], a_ko, 64, tile_dim);
        for (int k = 0; k < 4; k++) {
          mvin3(&B[64 * ko + 16 * k][b_col], b_ko + k * 64, 64, tile_dim);
        }
        if (ko == 0) {
          for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
            mvin(0, res + j_in_o * tile_dim, tile_dim, tile_dim);
          }
        }
        for (int k = 0; k < 4; k++) {
          uint32_t a_k = a_ko + k * tile_dim;
          uint32_t b_k = b_ko + k * 64;
          for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
            preload(b_k + j_in_o * tile_dim, (res + j_in_o * tile_dim) | 0x40000000, tile_dim, tile_dim, tile_dim, tile_dim);
            compute_preloaded(a_k, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          }
        }
      }
      for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
        mvout(&C[a_row][b_col + j_in_o * tile_dim], res + j_in_o * tile_dim, tile_dim, tile_dim);
      }
      buffer_toggle = 1 - buffer_toggle;
    }
  }
  fence();
}
)";

// 3: the loads for chunk ko + 1 are issued before the computes of chunk ko.
const char* const kPipeline = R"(  const uint32_t tile_dim = 16;
  const uint32_t res = 1U << 31;
  const uint32_t res_acc = res | 0x40000000;
  const uint32_t a = 0;
  const uint32_t b = @K2@;
  uint32_t buffer_toggle = 0;
@CONFIG@
  for (int i = 0; i < @MT@; i++) {
    uint32_t a_row = 16 * i;
    for (int j = 0; j < @NJ@; j++) {
      uint32_t b_col = 64 * j;
      uint32_t a_buf = a + buffer_toggle * @K@;
      uint32_t b_buf = b + buffer_toggle * @K4@;
      mvin2(&A[a_row][0], a_buf, 64, tile_dim);
      for (int k = 0; k < 4; k++) {
        mvin3(&B[16 * k][b_col], b_buf + k * 64, 64, tile_dim);
      }
      for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
        mvin(0, res + j_in_o * tile_dim, tile_dim, tile_dim);
      }
      for (int ko = 0; ko < @KC@; ko++) {
        uint32_t a_ko = a_buf + ko * 64;
        uint32_t b_ko = b_buf + ko * 256;
        if (ko + 1 < @KC@) {
          mvin2(&A[a_row][64 * ko + 64], a_ko + 64, 64, tile_dim);
          for (int k = 0; k < 4; k++) {
            mvin3(&B[64 * ko + 64 + 16 * k][b_col], b_ko + 256 + k * 64, 64, tile_dim);
          }
        }
        for (int k = 0; k < 4; k++) {
          uint32_t a_k = a_ko + k * tile_dim;
          uint32_t b_k = b_ko + k * 64;
          for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
            preload(b_k + j_in_o * tile_dim, res_acc + j_in_o * tile_dim, tile_dim, tile_dim, tile_dim, tile_dim);
            compute_preloaded(a_k, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          }
        }
      }
      for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
        mvout(&C[a_row][b_col + j_in_o * tile_dim], res + j_in_o * tile_dim, tile_dim, tile_dim);
      }
      buffer_toggle = 1 - buffer_toggle;
    }
  }
  fence();
}
)";

// 4: the j loop moves outside; the whole B column block is loaded once per j
// (guarded by i == 0) into its own region. A keeps two alternating regions.
const char* const kOuterLoad = R"(  const uint32_t tile_dim = 16;
  const uint32_t res = 1U << 31;
  const uint32_t res_acc = res | 0x40000000;
  const uint32_t a = 0;
  const uint32_t new_B_base = @K2@;
@CONFIG@
  for (int j = 0; j < @NJ@; j++) {
    uint32_t b_col = 64 * j;
    for (int i = 0; i < @MT@; i++) {
      uint32_t a_row = 16 * i;
      uint32_t a_buf = a + (i % 2) * @K@;
      if (i == 0) {
        for (int kt = 0; kt < @KT@; kt++) {
          mvin3(&B[16 * kt][b_col], new_B_base + kt * 64, 64, tile_dim);
        }
      }
      mvin2(&A[a_row][0], a_buf, 64, tile_dim);
      for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
        mvin(0, res + j_in_o * tile_dim, tile_dim, tile_dim);
      }
      for (int ko = 0; ko < @KC@; ko++) {
        uint32_t a_ko = a_buf + ko * 64;
        uint32_t b_ko = new_B_base + ko * 256;
        if (ko + 1 < @KC@) {
          mvin2(&A[a_row][64 * ko + 64], a_ko + 64, 64, tile_dim);
        }
        for (int k = 0; k < 4; k++) {
          uint32_t a_k = a_ko + k * tile_dim;
          uint32_t b_k = b_ko + k * 64;
          for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
            preload(b_k + j_in_o * tile_dim, res_acc + j_in_o * tile_dim, tile_dim, tile_dim, tile_dim, tile_dim);
            compute_preloaded(a_k, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          }
        }
      }
      for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
        mvout(&C[a_row][b_col + j_in_o * tile_dim], res + j_in_o * tile_dim, tile_dim, tile_dim);
      }
    }
  }
  fence();
}
)";

// 5: an A block of @MI@ row tiles is loaded before the reduction loop, and each
// preloaded B tile is reused for all of its rows (B address 0xffffffff).
const char* const kLargerTiles = R"(  const uint32_t tile_dim = 16;
  const uint32_t res = 1U << 31;
  const uint32_t A_tile_base = 0;
  const uint32_t new_B_base = @MIK2@;
@CONFIG@
  for (int j = 0; j < @NJ@; j++) {
    uint32_t b_col = 64 * j;
    for (int ib = 0; ib < @MB@; ib++) {
      uint32_t a_row = @MI16@ * ib;
      if (ib == 0) {
        for (int kt = 0; kt < @KT@; kt++) {
          mvin3(&B[16 * kt][b_col], new_B_base + kt * 64, 64, tile_dim);
        }
      }
      for (int t = 0; t < @ACCT@; t++) {
        mvin(0, res + t * tile_dim, tile_dim, tile_dim);
      }
      for (int r = 0; r < @MI@; r++) {
        for (int kc = 0; kc < @KC@; kc++) {
          mvin2(&A[a_row + 16 * r][64 * kc], A_tile_base + r * @K@ + kc * 64, 64, tile_dim);
        }
      }
      for (int kt = 0; kt < @KT@; kt++) {
        uint32_t a_k = A_tile_base + kt * tile_dim;
        uint32_t b_k = new_B_base + kt * 64;
        for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
          uint32_t c = (res + j_in_o * @MI16@) | 0x40000000;
          preload(b_k + j_in_o * tile_dim, c, tile_dim, tile_dim, tile_dim, tile_dim);
          compute_preloaded(a_k, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          for (int r = 1; r < @MI@; r++) {
            preload(0xffffffff, c + r * tile_dim, tile_dim, tile_dim, tile_dim, tile_dim);
            compute_accumulated(a_k + r * @K@, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          }
        }
      }
      for (int t = 0; t < @ACCT@; t++) {
        mvout(&C[a_row + 16 * (t % @MI@)][b_col + 16 * (t / @MI@)], res + t * tile_dim, tile_dim, tile_dim);
      }
    }
  }
  fence();
}
)";

// 6: two A block regions; the next block is fetched in slices while the
// current one is being computed.
const char* const kDoubleBufferA = R"(  const uint32_t tile_dim = 16;
  const uint32_t res = 1U << 31;
  const uint32_t A_tile_base0 = 0;
  const uint32_t A_tile_base1 = @MIK@;
  const uint32_t new_B_base = @MIK2@;
@CONFIG@
  for (int j = 0; j < @NJ@; j++) {
    uint32_t b_col = 64 * j;
    for (int kt = 0; kt < @KT@; kt++) {
      mvin3(&B[16 * kt][b_col], new_B_base + kt * 64, 64, tile_dim);
    }
    for (int r = 0; r < @MI@; r++) {
      for (int kc = 0; kc < @KC@; kc++) {
        mvin2(&A[16 * r][64 * kc], A_tile_base0 + r * @K@ + kc * 64, 64, tile_dim);
      }
    }
    for (int ib = 0; ib < @MB@; ib++) {
      uint32_t a_row = @MI16@ * ib;
      uint32_t current_buffer = (ib % 2 == 0) ? A_tile_base0 : A_tile_base1;
      uint32_t next_buffer = (ib % 2 == 0) ? A_tile_base1 : A_tile_base0;
      for (int t = 0; t < @ACCT@; t++) {
        mvin(0, res + t * tile_dim, tile_dim, tile_dim);
      }
      for (int kt = 0; kt < @KT@; kt++) {
        if (kt % 4 == 0 && ib + 1 < @MB@) {
          for (int r = 0; r < @MI@; r++) {
            mvin2(&A[a_row + @MI16@ + 16 * r][16 * kt], next_buffer + r * @K@ + kt * tile_dim, 64, tile_dim);
          }
        }
        uint32_t a_k = current_buffer + kt * tile_dim;
        uint32_t b_k = new_B_base + kt * 64;
        for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
          uint32_t c = (res + j_in_o * @MI16@) | 0x40000000;
          preload(b_k + j_in_o * tile_dim, c, tile_dim, tile_dim, tile_dim, tile_dim);
          compute_preloaded(a_k, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          for (int r = 1; r < @MI@; r++) {
            preload(0xffffffff, c + r * tile_dim, tile_dim, tile_dim, tile_dim, tile_dim);
            compute_accumulated(a_k + r * @K@, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          }
        }
      }
      for (int t = 0; t < @ACCT@; t++) {
        mvout(&C[a_row + 16 * (t % @MI@)][b_col + 16 * (t / @MI@)], res + t * tile_dim, tile_dim, tile_dim);
      }
    }
  }
  fence();
}
)";

// 7: two accumulator regions, so zeroing the next block does not wait for the
// previous block's stores.
const char* const kDoubleBufferAcc = R"(  const uint32_t tile_dim = 16;
  const uint32_t acc_base0 = 1U << 31;
  const uint32_t acc_base1 = (1U << 31) + @ACCROWS@;
  const uint32_t A_tile_base0 = 0;
  const uint32_t A_tile_base1 = @MIK@;
  const uint32_t new_B_base = @MIK2@;
@CONFIG@
  for (int j = 0; j < @NJ@; j++) {
    uint32_t b_col = 64 * j;
@ZERO0@    for (int kt = 0; kt < @KT@; kt++) {
      mvin3(&B[16 * kt][b_col], new_B_base + kt * 64, 64, tile_dim);
    }
    for (int r = 0; r < @MI@; r++) {
      for (int kc = 0; kc < @KC@; kc++) {
        mvin2(&A[16 * r][64 * kc], A_tile_base0 + r * @K@ + kc * 64, 64, tile_dim);
      }
    }
    for (int ib = 0; ib < @MB@; ib++) {
      uint32_t a_row = @MI16@ * ib;
      uint32_t current_buffer = (ib % 2 == 0) ? A_tile_base0 : A_tile_base1;
      uint32_t next_buffer = (ib % 2 == 0) ? A_tile_base1 : A_tile_base0;
      uint32_t cur_acc_base = (ib % 2 == 0) ? acc_base0 : acc_base1;
      uint32_t next_acc_base = (ib % 2 == 0) ? acc_base1 : acc_base0;
      for (int kt = 0; kt < @KT@; kt++) {
        if (kt % 4 == 0 && ib + 1 < @MB@) {
          for (int r = 0; r < @MI@; r++) {
            mvin2(&A[a_row + @MI16@ + 16 * r][16 * kt], next_buffer + r * @K@ + kt * tile_dim, 64, tile_dim);
          }
        }
@ZERONEXT@        uint32_t a_k = current_buffer + kt * tile_dim;
        uint32_t b_k = new_B_base + kt * 64;
        for (int j_in_o = 0; j_in_o < 4; j_in_o++) {
          uint32_t c = (cur_acc_base + j_in_o * @MI16@) | 0x40000000;
          preload(b_k + j_in_o * tile_dim, c, tile_dim, tile_dim, tile_dim, tile_dim);
          compute_preloaded(a_k, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          for (int r = 1; r < @MI@; r++) {
            preload(0xffffffff, c + r * tile_dim, tile_dim, tile_dim, tile_dim, tile_dim);
            compute_accumulated(a_k + r * @K@, 0xffffffff, tile_dim, tile_dim, tile_dim, tile_dim);
          }
        }
      }
      for (int t = 0; t < @ACCT@; t++) {
        mvout(&C[a_row + 16 * (t % @MI@)][b_col + 16 * (t / @MI@)], cur_acc_base + t * tile_dim, tile_dim, tile_dim);
      }
    }
  }
  fence();
}
)";

// 8 and 9 share this skeleton; @BODY@ is the unrolled j_in_o x r block.
const char* const kUnrolled = R"(  const uint32_t tile_dim = 16;
  const uint32_t acc_base0 = 1U << 31;
  const uint32_t acc_base1 = (1U << 31) + @ACCROWS@;
  const uint32_t A_tile_base0 = 0;
  const uint32_t A_tile_base1 = @MIK@;
  const uint32_t new_B_base = @MIK2@;
@CONFIG@
  for (int j = 0; j < @NJ@; j++) {
    uint32_t b_col = 64 * j;
@ZERO0@    for (int kt = 0; kt < @KT@; kt++) {
      mvin3(&B[16 * kt][b_col], new_B_base + kt * 64, 64, tile_dim);
    }
    for (int r = 0; r < @MI@; r++) {
      for (int kc = 0; kc < @KC@; kc++) {
        mvin2(&A[16 * r][64 * kc], A_tile_base0 + r * @K@ + kc * 64, 64, tile_dim);
      }
    }
    for (int ib = 0; ib < @MB@; ib++) {
      uint32_t a_row = @MI16@ * ib;
      uint32_t current_buffer = (ib % 2 == 0) ? A_tile_base0 : A_tile_base1;
      uint32_t next_buffer = (ib % 2 == 0) ? A_tile_base1 : A_tile_base0;
      uint32_t cur_acc_base = (ib % 2 == 0) ? acc_base0 : acc_base1;
      uint32_t next_acc_base = (ib % 2 == 0) ? acc_base1 : acc_base0;
      for (int kt = 0; kt < @KT@; kt++) {
        if (kt % 4 == 0 && ib + 1 < @MB@) {
          for (int r = 0; r < @MI@; r++) {
            mvin2(&A[a_row + @MI16@ + 16 * r][16 * kt], next_buffer + r * @K@ + kt * tile_dim, 64, tile_dim);
          }
        }
@ZERONEXT@        uint32_t a_k = current_buffer + kt * tile_dim;
        uint32_t b_k = new_B_base + kt * 64;
@CADDR@@BODY@      }
      for (int t = 0; t < @ACCT@; t++) {
        mvout(&C[a_row + 16 * (t % @MI@)][b_col + 16 * (t / @MI@)], cur_acc_base + t * tile_dim, tile_dim, tile_dim);
      }
    }
  }
  fence();
}
)";

std::string unrolled_body(int mi, int k) {
  std::string s;
  for (int jt = 0; jt < 4; ++jt) {
    for (int r = 0; r < mi; ++r) {
      const int tile = jt * mi + r;
      std::string c = tile == 0 ? "c" : fmt::format("c + {}", tile * 16);
      std::string bsp = r != 0 ? "0xffffffff" : jt == 0 ? "b_k" : fmt::format("b_k + {}", jt * 16);
      std::string asp = r == 0 ? "a_k" : fmt::format("a_k + {}", r * k);
      s += fmt::format("        preload({}, {}, 16, 16, 16, 16);\n", bsp, c);
      s += fmt::format("        {}({}, 0xffffffff, 16, 16, 16, 16);\n",
                       r == 0 ? "compute_preloaded" : "compute_accumulated", asp);
    }
  }
  return s;
}

}  // namespace

int gemm_stage_count() { return 10; }

std::string gemm_stage(int M, int K, int N, int stage) {
  if (stage == 0) return gemm_unopt(M, K, N);
  if (stage < 0 || stage >= gemm_stage_count()) {
    throw std::invalid_argument(fmt::format("no GEMM stage {}", stage));
  }
  if (M <= 0 || K <= 0 || N <= 0 || M % 16 || K % 64 || N % 64 || K > 512) {
    throw std::invalid_argument(fmt::format(
        "GEMM stages need M a multiple of 16, N a multiple of 64 and K a multiple of 64 up to 512 "
        "(got {}x{}x{})",
        M, K, N));
  }
  int mi = 1;
  for (int f : {8, 4, 2}) {
    if ((M / 16) % f == 0) {
      mi = f;
      break;
    }
  }
  auto n = [](long v) { return std::to_string(v); };
  // Zero-fill of the first accumulator block of a column block, and of the
  // next block spread over the reduction loop (stages 7 and 8).
  const char* zero0 = R"(    for (int t = 0; t < @ACCT@; t++) {
      mvin(0, acc_base0 + t * tile_dim, tile_dim, tile_dim);
    }
)";
  const char* zero_next = R"(        if (ib + 1 < @MB@) {
          for (int t = kt; t < @ACCT@; t += @KT@) {
            mvin(0, next_acc_base + t * tile_dim, tile_dim, tile_dim);
          }
        }
)";
  Vars vars = {{"CONFIG", kConfig},
               {"ZERO0", zero0},
               {"ZERONEXT", zero_next},
               {"M", n(M)},
               {"K", n(K)},
               {"N", n(N)},
               {"K2", n(2L * K)},
               {"K4", n(4L * K)},
               {"MT", n(M / 16)},
               {"NJ", n(N / 64)},
               {"KC", n(K / 64)},
               {"KT", n(K / 16)},
               {"MI", n(mi)},
               {"MB", n(M / (16 * mi))},
               {"MI16", n(16L * mi)},
               {"MIK", n(1L * mi * K)},
               {"MIK2", n(2L * mi * K)},
               {"ACCT", n(4L * mi)},
               {"ACCROWS", n(64L * mi)}};
  const char* tpl = nullptr;
  switch (stage) {
    case 1: tpl = kHoist; break;
    case 2: tpl = kDoubleBuffer; break;
    case 3: tpl = kPipeline; break;
    case 4: tpl = kOuterLoad; break;
    case 5: tpl = kLargerTiles; break;
    case 6: tpl = kDoubleBufferA; break;
    case 7: tpl = kDoubleBufferAcc; break;
    default: {
      tpl = kUnrolled;
      const bool fused = stage == 9;
      std::string caddr = fused ? "        uint32_t c = kt == 0 ? cur_acc_base : cur_acc_base | 0x40000000;\n"
                                : "        uint32_t c = cur_acc_base | 0x40000000;\n";
      vars.insert(vars.begin(), {{"CADDR", caddr}, {"BODY", unrolled_body(mi, K)}});
      if (fused) vars.insert(vars.begin(), {{"ZERO0", ""}, {"ZERONEXT", ""}});
      break;
    }
  }
  // CONFIG and the stage bodies hold further tokens, so they are substituted first.
  return fill(std::string(kHeader) + tpl, vars);
}

}  // namespace tensopt::bench
