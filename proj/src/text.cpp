#include "depsentry/text.hpp"

#include <algorithm>
#include <cctype>

namespace depsentry::text {

LineIndex::LineIndex(std::string_view content) : size_(content.size()) {
  starts_.push_back(0);
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i] == '\n') starts_.push_back(i + 1);
  }
}

std::uint32_t LineIndex::line_of(std::uint64_t byte_offset) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), byte_offset);
  return static_cast<std::uint32_t>(it - starts_.begin());
}

std::uint64_t LineIndex::line_start(std::uint32_t line) const {
  if (line == 0 || line > starts_.size()) return size_;
  return starts_[line - 1];
}

std::uint64_t LineIndex::line_end(std::uint32_t line) const {
  if (line == 0 || line > starts_.size()) return size_;
  if (line == starts_.size()) return size_;
  return starts_[line] - 1;
}

std::uint64_t LineIndex::column_of(std::uint64_t byte_offset) const {
  return byte_offset - line_start(line_of(byte_offset));
}

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + len > s.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (int i = 1; i < len; ++i) {
    auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  // overlong forms and surrogates are malformed
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
      cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return 0xFFFD;
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool sanitize_utf8(std::string& s) {
  std::string out;
  bool replaced = false;
  std::size_t pos = 0;
  out.reserve(s.size());
  while (pos < s.size()) {
    std::size_t before = pos;
    char32_t cp = decode_utf8(s, pos);
    if (cp == 0xFFFD && !(pos - before == 3 && s.compare(before, 3, "\xEF\xBF\xBD") == 0)) {
      replaced = true;
      append_utf8(out, 0xFFFD);
    } else {
      out.append(s, before, pos - before);
    }
  }
  if (replaced) s = std::move(out);
  return replaced;
}

bool is_printable_byte(unsigned char c) {
  return (c >= 0x20 && c <= 0x7E) || c == '\t' || c == '\n' || c == '\r';
}

double printable_fraction(std::string_view bytes) {
  if (bytes.empty()) return 0.0;
  std::size_t n = 0;
  for (char c : bytes) n += is_printable_byte(static_cast<unsigned char>(c)) ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(bytes.size());
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto p = s.find(sep, start);
    if (p == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, p - start));
    start = p + 1;
  }
  return out;
}

bool ends_with_icase(std::string_view s, std::string_view suffix) {
  if (suffix.size() > s.size()) return false;
  return to_lower(s.substr(s.size() - suffix.size())) == to_lower(suffix);
}

std::string_view basename(std::string_view path) {
  auto p = path.rfind('/');
  return p == std::string_view::npos ? path : path.substr(p + 1);
}

std::string extension(std::string_view path) {
  auto base = basename(path);
  auto p = base.rfind('.');
  if (p == std::string_view::npos || p == 0) return {};
  return to_lower(base.substr(p));
}

std::string_view dirname(std::string_view path) {
  auto p = path.rfind('/');
  return p == std::string_view::npos ? std::string_view{} : path.substr(0, p);
}

std::size_t path_depth(std::string_view path) {
  return static_cast<std::size_t>(std::count(path.begin(), path.end(), '/'));
}

}  // namespace depsentry::text
