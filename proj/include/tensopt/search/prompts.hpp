#pragma once

#include <optional>
#include <random>
#include <string>

#include "tensopt/search/config.hpp"
#include "tensopt/search/plan.hpp"
#include "tensopt/sim/config.hpp"

namespace tensopt::search {

/// Restricts planning to one recorded menu option (schedule reuse).
struct ReuseConstraint {
  std::string menu_option;
  std::string plan_hint;  // recorded plan text; empty for none
};

/// What a prompt knows about the current candidate.
struct PromptSubject {
  std::string code_text;
  std::string feedback;  // compute_feedback line
};

std::string build_plan_prompt(const PromptSubject& cur, const SearchConfig& sc,
                              const sim::AcceleratorConfig& cfg, std::mt19937_64& rng,
                              const std::optional<ReuseConstraint>& reuse = std::nullopt);

std::string build_code_prompt(const PromptSubject& cur, const Plan& plan, const SearchConfig& sc,
                              const sim::AcceleratorConfig& cfg);

/// True when the tiling in-context example belongs in the code prompt.
bool wants_tiling_example(const Plan& plan);

/// Replaces {{NAME}} placeholders. A line holding only a placeholder that
/// expands to nothing is removed.
std::string fill_template(const std::string& tpl,
                          const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace tensopt::search
