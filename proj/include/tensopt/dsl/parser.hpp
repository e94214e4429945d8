#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "tensopt/dsl/ast.hpp"
#include "tensopt/dsl/diagnostic.hpp"

namespace tensopt::dsl {

struct ParseResult {
  std::optional<KernelProgram> program;
  std::vector<Diagnostic> diagnostics;

  explicit operator bool() const { return program.has_value(); }
};

/// Parses one `void test(...) { ... }` kernel. Comments are discarded.
/// On failure `program` is empty and at least one error diagnostic is set.
ParseResult parse_kernel(std::string_view text);

/// True for spellings accepted as scalar/element type names.
bool is_type_name(std::string_view word);

}  // namespace tensopt::dsl
