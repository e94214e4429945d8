#include "tensopt/search/config.hpp"

#include <fmt/format.h>

#include "tensopt/core/files.hpp"

namespace tensopt::search {

PromptAssets default_prompt_assets() {
  PromptAssets a;
  a.isa_text = read_asset("prompts/isa.txt");
  a.rules = read_asset("prompts/rules.txt");
  a.icl_tiling = read_asset("prompts/icl_tiling.txt");
  a.plan_template = read_asset("prompts/plan_template.txt");
  a.code_template = read_asset("prompts/code_template.txt");
  a.plan_instruction = read_asset("prompts/instruction_plan.txt");
  a.plan_instruction_nomenu = read_asset("prompts/instruction_plan_nomenu.txt");
  a.code_instruction = read_asset("prompts/instruction_code.txt");
  return a;
}

std::string SearchConfig::validate() const {
  if (B < 1 || N < 1 || K < 1) return "B, N and K must be at least 1";
  if (T < 0) return "T must be non-negative";
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) return "dropout_prob must be in [0, 1]";
  if (menu.options.empty()) return "menu has no options";
  if (jobs < 1) return "jobs must be at least 1";
  if (check.n_timed < 1) return "the search needs at least one timed trial for latency";
  return {};
}

SearchConfig default_search_config(MenuKind kind) {
  SearchConfig sc;
  sc.menu = kind == MenuKind::Gemm ? gemm_menu() : fine_grained_menu();
  sc.prompts = default_prompt_assets();
  return sc;
}

}  // namespace tensopt::search
