#include "tensopt/dsl/extract.hpp"

#include <vector>

namespace tensopt::dsl {
namespace {

struct Line {
  std::size_t begin;
  std::size_t end;  // exclusive, without the newline
};

std::vector<Line> split_lines(std::string_view s) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t nl = s.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < s.size()) lines.push_back({pos, s.size()});
      break;
    }
    lines.push_back({pos, nl});
    pos = nl + 1;
  }
  return lines;
}

bool is_fence(std::string_view line) {
  std::size_t i = line.find_first_not_of(" \t");
  return i != std::string_view::npos && line.substr(i, 3) == "```";
}

std::optional<std::string> last_fenced(std::string_view s) {
  auto lines = split_lines(s);
  std::optional<std::string> last;
  constexpr std::size_t kClosed = static_cast<std::size_t>(-1);
  std::size_t open = kClosed;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view text = s.substr(lines[i].begin, lines[i].end - lines[i].begin);
    if (!is_fence(text)) continue;
    if (open == kClosed) {
      open = i;
    } else {
      std::string body;
      for (std::size_t j = open + 1; j < i; ++j) {
        body.append(s.substr(lines[j].begin, lines[j].end - lines[j].begin));
        body += '\n';
      }
      last = std::move(body);
      open = kClosed;
    }
  }
  return last;
}

std::optional<std::string> longest_function(std::string_view s) {
  std::optional<std::string> best;
  for (const auto& line : split_lines(s)) {
    std::string_view text = s.substr(line.begin, line.end - line.begin);
    if (text.find("void test(") == std::string_view::npos) continue;
    std::size_t open = s.find('{', line.begin);
    if (open == std::string_view::npos) continue;
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}' && --depth == 0) {
        std::string region(s.substr(line.begin, i + 1 - line.begin));
        if (!best || region.size() > best->size()) best = region + "\n";
        break;
      }
    }
  }
  return best;
}

}  // namespace

std::optional<std::string> extract_code_block(std::string_view response) {
  if (auto fenced = last_fenced(response)) return fenced;
  return longest_function(response);
}

}  // namespace tensopt::dsl
