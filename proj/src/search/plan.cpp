#include "tensopt/search/plan.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>

namespace tensopt::search {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Lowercase, no list number, no markdown emphasis, no trailing period.
std::string normalize(std::string s) {
  s = lower(trim(s));
  s.erase(std::remove(s.begin(), s.end(), '*'), s.end());
  s.erase(std::remove(s.begin(), s.end(), '`'), s.end());
  static const std::regex number(R"(^\d+[.)]\s*)");
  s = std::regex_replace(s, number, "");
  while (!s.empty() && (s.back() == '.' || std::isspace(static_cast<unsigned char>(s.back())))) s.pop_back();
  return trim(s);
}

}  // namespace

Plan parse_plan(const std::string& response, const MenuConfig& menu) {
  Plan p;
  p.raw_response = response;
  static const std::regex header(R"(^\s*[*#`\s]*optimization\s*[*]*\s*:\s*(.*)$)", std::regex::icase);

  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= response.size()) {
      auto nl = response.find('\n', start);
      if (nl == std::string::npos) nl = response.size();
      lines.push_back(response.substr(start, nl - start));
      start = nl + 1;
    }
  }
  std::optional<std::size_t> header_line;
  std::string named;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    if (std::regex_match(lines[i], m, header)) {
      header_line = i;
      named = normalize(m[1].str());
      break;
    }
  }

  std::string body;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (header_line && i == *header_line) continue;
    body += lines[i];
    body += '\n';
  }
  p.plan_text = trim(body);

  if (header_line) {
    for (const auto& o : menu.options) {
      if (normalize(o) == named) {
        p.menu_option = o;
        return p;
      }
    }
  }
  // Fallback: the longest menu line quoted anywhere in the response.
  const std::string hay = lower(response);
  std::size_t best_len = 0;
  for (const auto& o : menu.options) {
    std::string needle = normalize(o);
    if (needle.size() > best_len && hay.find(needle) != std::string::npos) {
      best_len = needle.size();
      p.menu_option = o;
    }
  }
  if (best_len == 0) p.menu_option = kOtherOption;
  return p;
}

}  // namespace tensopt::search
