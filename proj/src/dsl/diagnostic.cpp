#include "tensopt/dsl/diagnostic.hpp"

#include <algorithm>

namespace tensopt::dsl {

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string format(const Diagnostic& d) {
  std::string out = std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": ";
  out += d.severity == Severity::Error ? "error" : "warning";
  out += "[" + d.code + "]: " + d.message;
  return out;
}

std::string format(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    out += format(d);
    out += '\n';
  }
  return out;
}

}  // namespace tensopt::dsl
