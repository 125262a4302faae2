#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace depsentry::text {

/// Byte offset -> 1-based line lookup for one file.
class LineIndex {
 public:
  explicit LineIndex(std::string_view content);

  std::uint32_t line_of(std::uint64_t byte_offset) const;
  std::uint64_t line_start(std::uint32_t line) const;
  std::uint64_t line_end(std::uint32_t line) const;  // exclusive, before the '\n'
  std::uint32_t line_count() const { return static_cast<std::uint32_t>(starts_.size()); }
  /// 0-based column (bytes) of an offset within its line.
  std::uint64_t column_of(std::uint64_t byte_offset) const;

 private:
  std::vector<std::uint64_t> starts_;
  std::uint64_t size_;
};

/// Decodes one UTF-8 sequence at `pos`; returns U+FFFD and advances by one byte on malformed input.
char32_t decode_utf8(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

/// Replaces malformed UTF-8 with U+FFFD; returns true when a replacement happened.
bool sanitize_utf8(std::string& s);

bool is_printable_byte(unsigned char c);
double printable_fraction(std::string_view bytes);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool ends_with_icase(std::string_view s, std::string_view suffix);

/// Last path component.
std::string_view basename(std::string_view path);
/// Lowercase extension including the dot, or empty.
std::string extension(std::string_view path);
/// Directory part without trailing slash ("" for top-level files).
std::string_view dirname(std::string_view path);
std::size_t path_depth(std::string_view path);

}  // namespace depsentry::text
