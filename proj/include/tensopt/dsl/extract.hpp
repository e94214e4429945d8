#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tensopt::dsl {

/// Pulls kernel source out of a model response: the last fenced block, or
/// failing that the longest `void test(` function found by brace matching.
std::optional<std::string> extract_code_block(std::string_view response);

}  // namespace tensopt::dsl
