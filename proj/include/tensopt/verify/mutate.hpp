#pragma once

#include <string>
#include <vector>

#include "tensopt/dsl/ast.hpp"
#include "tensopt/sim/config.hpp"
#include "tensopt/verify/equivalence.hpp"

namespace tensopt::verify {

enum class MutationKind { DropCall, BoundMinusOne, BoundPlusOne, SwapAddresses };

std::string_view name_of(MutationKind k);

struct Mutant {
  MutationKind kind;
  std::string label;  // stable id, e.g. "drop fence @12"
  dsl::KernelProgram program;
};

/// Every single-point mutant of `p`:
///  - each intrinsic call statement removed,
///  - each for-loop bound moved by one step either way (one iteration fewer
///    or more for `<` loops; `x += c` loops move by c),
///  - the two local addresses of a preload/compute swapped, and the local
///    address of consecutive same-intrinsic calls exchanged.
/// Labels use source line numbers, so they are stable for a given listing.
std::vector<Mutant> mutants(const dsl::KernelProgram& p);

struct MutationReport {
  int total = 0;
  int detected = 0;
  std::vector<std::string> survivors;  // labels

  double detection_rate() const { return total ? static_cast<double>(detected) / total : 1.0; }
};

MutationReport run_mutation_suite(const dsl::KernelProgram& p, const WorkloadSpec& spec,
                                  const sim::AcceleratorConfig& cfg, const CheckOptions& opts);

}  // namespace tensopt::verify
