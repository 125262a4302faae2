#include "depsentry/toml.hpp"

#include <cctype>
#include <cstdlib>

#include "depsentry/text.hpp"

namespace depsentry::toml {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  json run() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        const bool array = s_.substr(pos_, 2) == "[[";
        pos_ += array ? 2 : 1;
        skip_ws();
        const auto path = key_path();
        skip_ws();
        if (!consume(array ? "]]" : "]")) fail("unterminated table header");
        table = open_table(root, path, array);
      } else {
        const auto path = key_path();
        skip_ws();
        if (!consume("=")) fail("expected '='");
        skip_ws();
        json v = value();
        json* target = table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          json& next = (*target)[path[i]];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("key '" + path[i] + "' is not a table");
          target = &next;
        }
        if (target->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*target)[path.back()] = std::move(v);
      }
      skip_ws();
      if (!eof() && peek() == '#') skip_comment();
      if (!eof() && peek() != '\n' && peek() != '\r') fail("expected end of line");
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek(std::size_t o = 0) const { return pos_ + o < s_.size() ? s_[pos_ + o] : '\0'; }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    throw ParseError(line, what);
  }

  bool consume(std::string_view t) {
    if (s_.substr(pos_, t.size()) != t) return false;
    pos_ += t.size();
    return true;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_comment() {
    while (!eof() && peek() != '\n') ++pos_;
  }
  void skip_ws_comments_newlines() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') ++pos_;
      else if (c == '#') skip_comment();
      else break;
    }
  }

  json* open_table(json& root, const std::vector<std::string>& path, bool array) {
    json* t = &root;
    for (std::size_t i = 0; i < path.size(); ++i) {
      json& next = (*t)[path[i]];
      const bool last = i + 1 == path.size();
      if (last && array) {
        if (next.is_null()) next = json::array();
        if (!next.is_array()) fail("'" + path[i] + "' is not an array of tables");
        next.push_back(json::object());
        return &next.back();
      }
      if (next.is_null()) next = json::object();
      if (next.is_array() && !last) {
        if (next.empty() || !next.back().is_object()) fail("'" + path[i] + "' is not a table");
        t = &next.back();
        continue;
      }
      if (!next.is_object()) fail("'" + path[i] + "' is not a table");
      t = &next;
    }
    return t;
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> parts;
    while (true) {
      skip_ws();
      if (peek() == '"' || peek() == '\'') {
        parts.push_back(string_value());
      } else {
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
          ++pos_;
        if (pos_ == start) fail("expected key");
        parts.emplace_back(s_.substr(start, pos_ - start));
      }
      skip_ws();
      if (peek() != '.') break;
      ++pos_;
    }
    return parts;
  }

  std::string string_value() {
    if (consume("\"\"\"")) return basic_string(true);
    if (consume("'''")) return literal_string(true);
    if (consume("\"")) return basic_string(false);
    if (consume("'")) return literal_string(false);
    fail("expected string");
  }

  std::string literal_string(bool multi) {
    std::string out;
    if (multi && (consume("\r\n") || consume("\n"))) {
    }
    while (true) {
      if (eof()) fail("unterminated string");
      if (multi ? consume("'''") : consume("'")) {
        if (multi) {
          while (peek() == '\'') out.push_back(s_[pos_++]);
        }
        return out;
      }
      if (!multi && peek() == '\n') fail("newline in string");
      out.push_back(s_[pos_++]);
    }
  }

  std::string basic_string(bool multi) {
    std::string out;
    if (multi && (consume("\r\n") || consume("\n"))) {
    }
    while (true) {
      if (eof()) fail("unterminated string");
      if (multi ? consume("\"\"\"") : consume("\"")) {
        if (multi) {
          while (peek() == '"') out.push_back(s_[pos_++]);
        }
        return out;
      }
      const char c = s_[pos_++];
      if (c == '\n' && !multi) fail("newline in string");
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'u':
        case 'U': {
          const std::size_t n = e == 'u' ? 4 : 8;
          if (pos_ + n > s_.size()) fail("bad unicode escape");
          char32_t cp = 0;
          for (std::size_t i = 0; i < n; ++i) {
            const char h = s_[pos_++];
            if (!std::isxdigit(static_cast<unsigned char>(h))) fail("bad unicode escape");
            cp = cp * 16 + static_cast<char32_t>(std::isdigit(static_cast<unsigned char>(h))
                                                      ? h - '0'
                                                      : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
          }
          text::append_utf8(out, cp);
          break;
        }
        default:
          if (multi && (e == '\n' || e == ' ' || e == '\t' || e == '\r')) {
            // line-ending backslash trims following whitespace
            --pos_;
            while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
            break;
          }
          fail("bad escape");
      }
    }
  }

  json value() {
    const char c = peek();
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') return array();
    if (c == '{') return inline_table();
    if (consume("true")) return true;
    if (consume("false")) return false;
    return scalar();
  }

  json array() {
    ++pos_;
    json out = json::array();
    while (true) {
      skip_ws_comments_newlines();
      if (consume("]")) return out;
      out.push_back(value());
      skip_ws_comments_newlines();
      if (consume(",")) continue;
      skip_ws_comments_newlines();
      if (consume("]")) return out;
      fail("expected ',' or ']' in array");
    }
  }

  json inline_table() {
    ++pos_;
    json out = json::object();
    skip_ws();
    if (consume("}")) return out;
    while (true) {
      const auto path = key_path();
      skip_ws();
      if (!consume("=")) fail("expected '=' in inline table");
      skip_ws();
      json* t = &out;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        json& next = (*t)[path[i]];
        if (next.is_null()) next = json::object();
        t = &next;
      }
      (*t)[path.back()] = value();
      skip_ws();
      if (consume("}")) return out;
      if (!consume(",")) fail("expected ',' or '}' in inline table");
      skip_ws();
    }
  }

  json scalar() {
    const std::size_t start = pos_;
    while (!eof()) {
      const char c = peek();
      if (c == ',' || c == ']' || c == '}' || c == '#' || c == '\n' || c == '\r') break;
      if ((c == ' ' || c == '\t') && !(std::isdigit(static_cast<unsigned char>(peek(1))))) break;
      ++pos_;
    }
    std::string raw = text::trim(s_.substr(start, pos_ - start));
    if (raw.empty()) fail("expected value");
    std::string digits;
    for (char c : raw)
      if (c != '_') digits.push_back(c);
    if (digits == "inf" || digits == "+inf" || digits == "-inf" || digits == "nan" || digits == "+nan" || digits == "-nan")
      return std::strtod(digits.c_str(), nullptr);
    char* end = nullptr;
    if (digits.starts_with("0x") || digits.starts_with("0o") || digits.starts_with("0b")) {
      const int base = digits[1] == 'x' ? 16 : digits[1] == 'o' ? 8 : 2;
      const long long v = std::strtoll(digits.c_str() + 2, &end, base);
      if (*end == '\0') return v;
      fail("bad integer");
    }
    const long long iv = std::strtoll(digits.c_str(), &end, 10);
    if (*end == '\0') return iv;
    const double dv = std::strtod(digits.c_str(), &end);
    if (*end == '\0') return dv;
    // dates and times
    if (std::isdigit(static_cast<unsigned char>(raw[0]))) return raw;
    fail("unrecognized value '" + raw + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

nlohmann::json parse(std::string_view text) { return Parser(text).run(); }

}  // namespace depsentry::toml
