#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tensopt/dsl/ast.hpp"
#include "tensopt/dsl/diagnostic.hpp"
#include "tensopt/sim/config.hpp"

namespace tensopt::dsl {

/// Named integer constants visible to a kernel besides its own declarations
/// (e.g. NHORIZON for the TinyMPC workload).
using Bindings = std::map<std::string, std::int64_t>;

/// Bindings every kernel sees for a given accelerator (DIM).
Bindings default_bindings(const sim::AcceleratorConfig& cfg);

/// Folds an expression built from literals, builtin constants, `sizeof`, and
/// the given named constants. Arithmetic is 64-bit signed, except that casts
/// to 32-bit types narrow.
std::optional<std::int64_t> const_eval(const Expr& e, const Bindings& names,
                                       const sim::AcceleratorConfig& cfg);

/// Static checks that do not need inputs: intrinsic arity and argument kinds,
/// declaration before use, array shapes, constant local addresses in range.
std::vector<Diagnostic> validate_kernel(const KernelProgram& p, const sim::AcceleratorConfig& cfg,
                                        const Bindings& bindings = {});

}  // namespace tensopt::dsl
