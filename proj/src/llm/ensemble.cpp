#include <stdexcept>

#include "tensopt/llm/backend.hpp"

namespace tensopt::llm {

std::vector<int> ensemble_assign(int n_samples, int n_models) {
  if (n_models < 1) throw std::invalid_argument("ensemble_assign needs at least one model");
  std::vector<int> out(static_cast<std::size_t>(std::max(n_samples, 0)));
  for (int s = 0; s < n_samples; ++s) out[s] = s % n_models;
  return out;
}

std::string_view name_of(Phase p) { return p == Phase::Plan ? "plan" : "code"; }

std::optional<Phase> parse_phase(std::string_view s) {
  if (s == "plan") return Phase::Plan;
  if (s == "code") return Phase::Code;
  return std::nullopt;
}

}  // namespace tensopt::llm
