#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ietrial::cli {

struct PublishedValue {
  std::string row;
  std::string quantity;
  double value = 0.0;
};

// Raw text of data/published/<target>.csv, compiled in. Throws ConfigError
// for an unknown target.
std::string_view published_text(std::string_view target);

// Parsed rows of the same file ('#' lines are provenance comments).
std::vector<PublishedValue> published_values(std::string_view target);

}  // namespace ietrial::cli
