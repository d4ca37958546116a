#pragma once

// Tokenization shared by every module that looks at literal values.
// Blocking and similarity must agree on what a token is, so nothing else in
// the library splits strings on its own.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kbmatch {

namespace detail {

// Bytes >= 0x80 are kept as token characters so that UTF-8 words stay whole.
constexpr bool is_token_byte(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

constexpr char ascii_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace detail

/// Calls `sink(std::string)` for every token of `text` in order of
/// appearance. Tokens are maximal runs of alphanumeric (or non-ASCII) bytes,
/// lowercased. Numbers and dates are tokenized like any other string.
template <class Sink>
void for_each_token(std::string_view text, Sink&& sink) {
  std::string current;
  for (char ch : text) {
    if (detail::is_token_byte(static_cast<unsigned char>(ch))) {
      current.push_back(detail::ascii_lower(ch));
    } else if (!current.empty()) {
      sink(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) sink(std::move(current));
}

/// Tokens of `text` in order of appearance, duplicates kept.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for_each_token(text, [&](std::string&& t) { out.push_back(std::move(t)); });
  return out;
}

/// Contribution of one shared token to the value similarity of two
/// descriptions, given its entity frequency in each knowledge base.
/// Equals 1 when the token is unique to the pair.
inline double token_weight(std::size_t ef_first, std::size_t ef_second) noexcept {
  return 1.0 /
         std::log2(static_cast<double>(ef_first) * static_cast<double>(ef_second) + 1.0);
}

}  // namespace kbmatch
