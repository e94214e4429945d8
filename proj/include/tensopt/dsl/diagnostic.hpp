#pragma once

#include <string>
#include <vector>

#include "tensopt/dsl/ast.hpp"

namespace tensopt::dsl {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceLoc loc;
  std::string code;  // stable identifier, e.g. "syntax", "arity"
  std::string message;
};

bool has_errors(const std::vector<Diagnostic>& diags);

/// `line:col: error[code]: message`
std::string format(const Diagnostic& d);
std::string format(const std::vector<Diagnostic>& diags);

}  // namespace tensopt::dsl
