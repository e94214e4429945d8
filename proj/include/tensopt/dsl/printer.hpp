#pragma once

#include <string>

#include "tensopt/dsl/ast.hpp"

namespace tensopt::dsl {

/// Canonical source: 2-space indentation, braces on every body, minimal
/// parentheses. Comments are not preserved.
std::string print_kernel(const KernelProgram& p);
std::string print_expr(const Expr& e);

}  // namespace tensopt::dsl
