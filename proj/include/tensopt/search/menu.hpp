#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace tensopt::search {

struct MenuConfig {
  std::vector<std::string> options;      // menu lines without their numbers
  std::vector<std::string> always_keep;  // never dropped

  bool operator==(const MenuConfig&) const = default;
};

/// Parses "<optimizations>:" followed by numbered lines. The last option is
/// kept unconditionally.
MenuConfig parse_menu(const std::string& text);
MenuConfig load_menu(const std::filesystem::path& path);
/// Shipped menus: 17 options for GEMM/conv, 14 for fine-grained kernels.
MenuConfig gemm_menu();
MenuConfig fine_grained_menu();

/// Options that survive one dropout draw, in menu order. Each option outside
/// always_keep is dropped independently with probability p; if every such
/// option drops, one of them is redrawn uniformly so the menu keeps a choice.
std::vector<std::string> draw_menu(const MenuConfig& menu, double p, std::mt19937_64& rng);
/// draw_menu rendered as a renumbered list.
std::string render_menu(const MenuConfig& menu, double p, std::mt19937_64& rng);
std::string format_menu(const std::vector<std::string>& options);

}  // namespace tensopt::search
