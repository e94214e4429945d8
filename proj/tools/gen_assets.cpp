// Regenerates the GEMM schedule kernels and script manifests under assets/.
// Usage: tensopt_gen_assets <assets dir>
#include <iostream>

#include <fmt/format.h>

#include "tensopt/bench/gemm.hpp"
#include "tensopt/bench/schedule.hpp"
#include "tensopt/core/files.hpp"

using namespace tensopt;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: tensopt_gen_assets <assets dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  for (int n : {64, 512}) {
    write_file(dir / fmt::format("kernels/gemm_{0}x{0}x{0}_unopt.gk", n), bench::gemm_unopt(n, n, n));
    write_file(dir / fmt::format("manifests/gemm{}_replay.json", n),
               llm::to_json(bench::gemm_replay_manifest(n, n, n)).dump(2) + "\n");
    write_file(dir / fmt::format("manifests/gemm{}_oracle.json", n),
               llm::to_json(bench::gemm_oracle_manifest(n, n, n)).dump(2) + "\n");
  }
  return 0;
}
