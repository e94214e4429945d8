#include "tensopt/search/prompts.hpp"

#include <algorithm>
#include <cctype>

namespace tensopt::search {
namespace {

std::string trim_end(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

std::string block(const std::string& s) { return s.empty() ? s : trim_end(s) + "\n"; }

std::string code_section(const std::string& code) { return "```c\n" + block(code) + "```\n"; }

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string fill_template(const std::string& tpl,
                          const std::vector<std::pair<std::string, std::string>>& values) {
  auto lookup = [&](const std::string& name) -> const std::string* {
    for (const auto& [k, v] : values) {
      if (k == name) return &v;
    }
    return nullptr;
  };
  std::string out;
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    std::size_t eol = tpl.find('\n', pos);
    std::size_t end = eol == std::string::npos ? tpl.size() : eol + 1;
    std::string line = tpl.substr(pos, end - pos);
    pos = end;
    std::string bare = trim_end(line);
    if (bare.size() > 4 && bare.rfind("{{", 0) == 0 && bare.find("}}") == bare.size() - 2 &&
        bare.find("{{", 2) == std::string::npos) {
      const std::string* v = lookup(bare.substr(2, bare.size() - 4));
      if (v && v->empty()) continue;
    }
    // Single pass, so placeholder-like text inside values is left alone.
    std::size_t i = 0;
    while (i < line.size()) {
      auto open = line.find("{{", i);
      if (open == std::string::npos) {
        out.append(line, i);
        break;
      }
      auto close = line.find("}}", open + 2);
      if (close == std::string::npos) {
        out.append(line, i);
        break;
      }
      const std::string* v = lookup(line.substr(open + 2, close - open - 2));
      out.append(line, i, open - i);
      if (v) {
        out += *v;
      } else {
        out.append(line, open, close + 2 - open);
      }
      i = close + 2;
    }
  }
  return out;
}

std::string build_plan_prompt(const PromptSubject& cur, const SearchConfig& sc,
                              const sim::AcceleratorConfig& cfg, std::mt19937_64& rng,
                              const std::optional<ReuseConstraint>& reuse) {
  const auto& a = sc.ablations;
  std::string menu;
  if (reuse) {
    menu = "Optimization menu:\n" + format_menu({reuse->menu_option});
    if (sc.reuse_hint && !reuse->plan_hint.empty()) {
      menu += "\nA plan that applied this optimization to a similar kernel:\n" + block(reuse->plan_hint);
    }
  } else if (a.include_menu) {
    double p = a.enable_dropout ? sc.dropout_prob : 0.0;
    menu = "Optimization menu:\n" + render_menu(sc.menu, p, rng);
  }
  const std::string& instruction =
      a.include_menu || reuse ? sc.prompts.plan_instruction : sc.prompts.plan_instruction_nomenu;
  return fill_template(sc.prompts.plan_template,
                       {{"ISA", a.include_isa ? block(sc.prompts.isa_text) : ""},
                        {"CODE", code_section(cur.code_text)},
                        {"FEEDBACK", a.include_feedback ? "Feedback:\n" + block(cur.feedback) : ""},
                        {"MENU", menu},
                        {"ACCEL_SUMMARY", sim::accelerator_summary(cfg)},
                        {"INSTRUCTION", trim_end(instruction)},
                        {"RULES", trim_end(sc.prompts.rules)}});
}

bool wants_tiling_example(const Plan& plan) {
  return lower(plan.plan_text).find("tiling") != std::string::npos ||
         lower(plan.menu_option).find("tiling") != std::string::npos;
}

std::string build_code_prompt(const PromptSubject& cur, const Plan& plan, const SearchConfig& sc,
                              const sim::AcceleratorConfig& cfg) {
  const auto& a = sc.ablations;
  std::string plan_block = block(plan.raw_response.empty() ? plan.plan_text : plan.raw_response);
  return fill_template(sc.prompts.code_template,
                       {{"ISA", a.include_isa ? block(sc.prompts.isa_text) : ""},
                        {"CODE", code_section(cur.code_text)},
                        {"PLAN", plan_block},
                        {"ICL", wants_tiling_example(plan) ? block(sc.prompts.icl_tiling) : ""},
                        {"ACCEL_SUMMARY", sim::accelerator_summary(cfg)},
                        {"INSTRUCTION", trim_end(sc.prompts.code_instruction)},
                        {"RULES", trim_end(sc.prompts.rules)}});
}

}  // namespace tensopt::search
