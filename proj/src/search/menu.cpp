#include "tensopt/search/menu.hpp"

#include <algorithm>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "tensopt/core/files.hpp"

namespace tensopt::search {

MenuConfig parse_menu(const std::string& text) {
  static const std::regex item(R"(^\s*\d+\.\s+(.*\S)\s*$)");
  MenuConfig m;
  std::istringstream in(text);
  std::string line;
  std::smatch sm;
  while (std::getline(in, line)) {
    if (std::regex_match(line, sm, item)) m.options.push_back(sm[1].str());
  }
  if (m.options.empty()) throw std::invalid_argument("menu has no numbered options");
  m.always_keep = {m.options.back()};
  return m;
}

MenuConfig load_menu(const std::filesystem::path& path) { return parse_menu(read_file(path)); }

MenuConfig gemm_menu() { return parse_menu(read_asset("prompts/menu_gemm.txt")); }
MenuConfig fine_grained_menu() { return parse_menu(read_asset("prompts/menu_fine.txt")); }

std::vector<std::string> draw_menu(const MenuConfig& menu, double p, std::mt19937_64& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("dropout probability must be in [0, 1]");
  auto kept = [&](const std::string& o) {
    return std::find(menu.always_keep.begin(), menu.always_keep.end(), o) != menu.always_keep.end();
  };
  std::vector<bool> keep(menu.options.size());
  std::vector<std::size_t> droppable;
  bool any_survivor = false;
  for (std::size_t i = 0; i < menu.options.size(); ++i) {
    if (kept(menu.options[i])) {
      keep[i] = true;
      continue;
    }
    droppable.push_back(i);
    // 53-bit uniform in [0, 1): identical across standard library vendors
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    keep[i] = u >= p;
    any_survivor = any_survivor || keep[i];
  }
  if (!any_survivor && !droppable.empty()) keep[droppable[rng() % droppable.size()]] = true;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < menu.options.size(); ++i) {
    if (keep[i]) out.push_back(menu.options[i]);
  }
  return out;
}

std::string format_menu(const std::vector<std::string>& options) {
  std::string s = "<optimizations>:\n";
  for (std::size_t i = 0; i < options.size(); ++i) s += fmt::format("{}. {}\n", i + 1, options[i]);
  return s;
}

std::string render_menu(const MenuConfig& menu, double p, std::mt19937_64& rng) {
  return format_menu(draw_menu(menu, p, rng));
}

}  // namespace tensopt::search
