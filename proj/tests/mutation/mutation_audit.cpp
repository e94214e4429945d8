// Runs the mutation suite over every shipped kernel with an oracle and checks
// that the survivors are exactly the hand-audited semantics-preserving ones.
#include <cstdio>
#include <set>

#include <fmt/format.h>

#include "support/audit.hpp"
#include "tensopt/dsl/parser.hpp"
#include "tensopt/verify/mutate.hpp"

using namespace tensopt;

int main() {
  auto audited = testing::audited_survivors();
  int total = 0, detected = 0;
  bool ok = true;
  for (const auto& c : testing::asset_kernels(true)) {
    auto p = dsl::parse_kernel(read_asset("kernels/" + c.file));
    if (!p.program) {
      fmt::print("FAIL {}: does not parse\n", c.file);
      ok = false;
      continue;
    }
    auto r = verify::run_mutation_suite(*p.program, c.spec, c.cfg, {1, 0, 0});
    std::set<std::string> got(r.survivors.begin(), r.survivors.end());
    const auto& want = audited[c.file];
    bool match = got == want;
    ok = ok && match;
    total += r.total;
    detected += r.detected;
    fmt::print("{} {}: {}/{} detected ({:.1f}%), {} survivors{}\n", match ? "PASS" : "FAIL", c.file,
               r.detected, r.total, 100.0 * r.detection_rate(), got.size(),
               match ? " all audited" : "");
    for (const auto& s : got) {
      if (!want.count(s)) fmt::print("    unaudited survivor: {}\n", s);
    }
    for (const auto& s : want) {
      if (!got.count(s)) fmt::print("    audited survivor now detected: {}\n", s);
    }
  }
  fmt::print("aggregate: {}/{} detected ({:.1f}%)\n", detected, total, 100.0 * detected / total);
  return ok ? 0 : 1;
}
