#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensopt/llm/backend.hpp"
#include "tensopt/search/menu.hpp"
#include "tensopt/verify/equivalence.hpp"

namespace tensopt::search {

struct Ablations {
  bool include_isa = true;
  bool include_menu = true;
  bool include_feedback = true;
  bool enable_dropout = true;
  bool enable_ensemble = true;

  bool operator==(const Ablations&) const = default;
};

struct PromptAssets {
  std::string isa_text;
  std::string rules;
  std::string icl_tiling;
  std::string plan_template;
  std::string code_template;
  std::string plan_instruction;
  std::string plan_instruction_nomenu;
  std::string code_instruction;

  bool operator==(const PromptAssets&) const = default;
};

/// Loads the prompt files shipped under assets/prompts.
PromptAssets default_prompt_assets();

struct SearchConfig {
  int B = 6;  // beam width
  int N = 6;  // plans per beam member
  int K = 2;  // codes per plan
  int T = 15;
  double dropout_prob = 0.7;
  MenuConfig menu;
  PromptAssets prompts;
  std::vector<llm::ModelSpec> models;
  Ablations ablations;
  std::uint64_t seed = 0;
  bool reuse_hint = true;  // show the recorded plan text during reuse
  verify::CheckOptions check;
  int jobs = 1;  // evaluation and request parallelism

  /// Empty when valid.
  std::string validate() const;
};

enum class MenuKind { Gemm, FineGrained };

SearchConfig default_search_config(MenuKind kind = MenuKind::Gemm);

}  // namespace tensopt::search
