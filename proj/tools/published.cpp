#include "published.hpp"

#include <cstdlib>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "ietrial/error.hpp"

namespace ietrial::cli {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kPublished[];
extern const std::size_t kPublishedCount;
}  // namespace detail

std::string_view published_text(std::string_view target) {
  for (std::size_t i = 0; i < detail::kPublishedCount; ++i) {
    if (detail::kPublished[i].first == target) return detail::kPublished[i].second;
  }
  throw ConfigError(fmt::format("no published values for '{}'", target));
}

std::vector<PublishedValue> published_values(std::string_view target) {
  std::istringstream in{std::string(published_text(target))};
  std::vector<PublishedValue> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw std::logic_error(fmt::format("bad published row in {}: {}", target, line));
    }
    out.push_back({line.substr(0, a), line.substr(a + 1, b - a - 1),
                   std::strtod(line.c_str() + b + 1, nullptr)});
  }
  return out;
}

}  // namespace ietrial::cli
