// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ravel {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// FNV-1a 64-bit over a byte string. Used for state and request digests.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex_digest(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

/// Whitespace-delimited word count (EN length unit).
inline int word_count(std::string_view text) {
  int n = 0;
  bool in_word = false;
  for (char c : text) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

/// Scores are displayed with one decimal everywhere.
inline std::string format_score(double s) {
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << s;
  return os.str();
}

/// Extracts the first syntactically balanced JSON object embedded in free
/// text. Models wrap structured output in prose or code fences; extraction is
/// wrapper-invariant.
inline std::optional<json> extract_json_object(std::string_view text) {
  for (std::size_t start = 0; start < text.size(); ++start) {
    if (text[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped)
          escaped = false;
        else if (c == '\\')
          escaped = true;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          auto candidate = text.substr(start, i - start + 1);
          json parsed = json::parse(candidate, nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) return parsed;
          break;  // balanced but unparsable; try the next '{'
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace ravel
