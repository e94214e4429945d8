#pragma once

#include <string>

#include "tensopt/search/menu.hpp"

namespace tensopt::search {

inline constexpr const char* kOtherOption = "other";

struct Plan {
  std::string menu_option;
  std::string plan_text;
  std::string raw_response;

  bool operator==(const Plan&) const = default;
};

/// Reads the `OPTIMIZATION: <line>` header. A header that names no menu line,
/// or a missing header, falls back to the longest menu line quoted anywhere in
/// the response; failing that the option is "other".
Plan parse_plan(const std::string& response, const MenuConfig& menu);

}  // namespace tensopt::search
