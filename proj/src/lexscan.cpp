#include "depsentry/lexscan.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <deque>
#include <optional>
#include <unordered_set>

#include "depsentry/text.hpp"

namespace depsentry::lex {

namespace {

using Words = std::unordered_set<std::string_view>;

const Words& keywords(Language lang) {
  static const Words python = {"False", "None",   "True",    "and",    "as",     "assert",
                               "async", "await",  "break",   "class",  "continue", "def",
                               "del",   "elif",   "else",    "except", "finally", "for",
                               "from",  "global", "if",      "import", "in",     "is",
                               "lambda", "nonlocal", "not",  "or",     "pass",   "raise",
                               "return", "try",   "while",   "with",   "yield"};
  static const Words javascript = {
      "break",  "case",   "catch",  "class",    "const",      "continue", "debugger",
      "default", "delete", "do",    "else",     "export",     "extends",  "finally",
      "for",    "function", "if",   "import",   "in",         "instanceof", "let",
      "new",    "return", "super",  "switch",   "throw",      "try",      "typeof",
      "var",    "void",   "while",  "with",     "yield",      "async",    "await",
      "of",     "static", "null",   "true",     "false",      "undefined"};
  static const Words ruby = {"BEGIN", "END",    "alias", "and",    "begin",  "break", "case",
                             "class", "def",    "defined?", "do",  "else",   "elsif", "end",
                             "ensure", "false", "for",   "if",     "in",     "module", "next",
                             "nil",   "not",    "or",    "redo",   "rescue", "retry", "return",
                             "super", "then",   "true",  "undef",  "unless", "until", "when",
                             "while", "yield",  "__FILE__", "__LINE__"};
  static const Words php = {
      "abstract", "and",      "as",         "break",        "callable",   "case",
      "catch",    "class",    "clone",      "const",        "continue",   "declare",
      "default",  "do",       "echo",       "else",         "elseif",     "empty",
      "enddeclare", "endfor", "endforeach", "endif",        "endswitch",  "endwhile",
      "extends",  "final",    "finally",    "fn",           "for",        "foreach",
      "function", "global",   "goto",       "if",           "implements", "include",
      "include_once", "instanceof", "insteadof", "interface", "isset",    "list",
      "match",    "namespace", "new",       "or",           "print",      "private",
      "protected", "public",  "readonly",   "require",      "require_once", "return",
      "static",   "switch",   "throw",      "trait",        "try",        "unset",
      "use",      "var",      "while",      "xor",          "yield",      "null",
      "true",     "false",    "enum"};
  static const Words rust = {"as",    "async", "await",  "break",  "const",  "continue", "crate",
                             "dyn",   "else",  "enum",   "extern", "false",  "fn",       "for",
                             "if",    "impl",  "in",     "let",    "loop",   "match",    "mod",
                             "move",  "mut",   "pub",    "ref",    "return", "static",   "struct",
                             "super", "trait", "true",   "type",   "unsafe", "use",      "where",
                             "while", "union"};
  static const Words go = {"break",   "case",  "chan",   "const",  "continue", "default",
                           "defer",   "else",  "fallthrough", "for", "func",   "go",
                           "goto",    "if",    "import", "interface", "map",   "package",
                           "range",   "return", "select", "struct", "switch",  "type",
                           "var"};
  static const Words java = {
      "abstract", "assert", "boolean", "break",    "byte",       "case",      "catch",
      "char",     "class",  "const",   "continue", "default",    "do",        "double",
      "else",     "enum",   "extends", "final",    "finally",    "float",     "for",
      "goto",     "if",     "implements", "import", "instanceof", "int",      "interface",
      "long",     "native", "new",     "package",  "private",    "protected", "public",
      "return",   "short",  "static",  "strictfp", "super",      "switch",    "synchronized",
      "throw",    "throws", "transient", "try",    "void",       "volatile",  "while",
      "var",      "record", "yield",   "null",     "true",       "false"};
  switch (lang) {
    case Language::Python: return python;
    case Language::JavaScript: return javascript;
    case Language::Ruby: return ruby;
    case Language::PHP: return php;
    case Language::Rust: return rust;
    case Language::Go: return go;
    case Language::Java: return java;
  }
  return python;
}

bool is_try_word(Language lang, std::string_view w) {
  switch (lang) {
    case Language::Ruby: return w == "begin";
    case Language::Rust:
    case Language::Go: return false;
    default: return w == "try";
  }
}

bool is_catch_word(Language lang, std::string_view w) {
  switch (lang) {
    case Language::Python: return w == "except";
    case Language::Ruby: return w == "rescue";
    case Language::Rust:
    case Language::Go: return false;
    default: return w == "catch";
  }
}

constexpr std::array<std::string_view, 45> kOperators = {
    ">>>=", "===", "!==", "**=", "<<=", ">>=", ">>>", "...", "<=>", "||=", "&&=", "?\?=",
    "//=",  "..=", "?->", "=>",  "==",  "!=",  "<=",  ">=",  "&&",  "||",  "??",  "?.",
    "::",   "->",  "+=",  "-=",  "*=",  "/=",  "%=",  "&=",  "|=",  "^=",  ":=",  ".=",
    "=~",   "!~",  "**",  "//",  "<<",  ">>",  "++",  "--",  "<-"};

const Words kAssignOps = {"=",  "+=",  "-=",  "*=",  "/=",  "%=",  "&=",   "|=",  "^=", "||=",
                          "&&=", "?\?=", ":=", ".=", "<<=", ">>=", ">>>=", "**=", "//="};

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_hex(unsigned char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}
int hex_value(unsigned char c) {
  if (is_digit(c)) return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return c - 'A' + 10;
}
bool is_alnum(unsigned char c) {
  return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

// Full: decode per language. Lite: only \\ and \<close>. Keep: backslash kept but still
// protects the delimiter. Verbatim: backslash is an ordinary byte.
enum class Escapes { Full, Lite, Keep, Verbatim };
enum class Interp { None, JsTemplate, RubyHash, PhpVar, PyFormat };

struct QuoteSpec {
  std::string_view close;
  Escapes escapes = Escapes::Full;
  bool bytes = false;
  bool multiline = true;
  Interp interp = Interp::None;
  char open_pair = 0;
};

struct PendingHeredoc {
  std::string id;
  bool indented = false;  // <<- / <<~
  bool squiggly = false;
  bool raw = false;
};

class Lexer {
 public:
  Lexer(std::string_view src, const LanguageProfile& prof, TokenStream& out)
      : src_(src), lang_(prof.language), prof_(prof), out_(out) {}

  void run() {
    php_html_ = lang_ == Language::PHP;
    while (pos_ < src_.size()) {
      if (php_html_) {
        lex_php_inline();
        continue;
      }
      const unsigned char c = src_[pos_];
      if (c == '\n') {
        ++pos_;
        if (!heredocs_.empty()) read_heredoc_bodies();
        continue;
      }
      if (is_space(c)) {
        ++pos_;
        continue;
      }
      if (lang_ == Language::PHP && starts("?>")) {
        emit(TokenKind::Other, pos_, pos_ + 2);
        pos_ += 2;
        php_html_ = true;
        continue;
      }
      if (lex_comment()) continue;
      if (lex_string()) continue;
      if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
        lex_number();
        continue;
      }
      if (ident_start(c)) {
        lex_word();
        continue;
      }
      lex_punct();
    }
    if (!heredocs_.empty()) {
      note("unterminated heredoc at end of file");
      heredocs_.clear();
    }
  }

 private:
  bool starts(std::string_view s, std::size_t at) const {
    return src_.substr(std::min(at, src_.size()), s.size()) == s;
  }
  bool starts(std::string_view s) const { return starts(s, pos_); }
  unsigned char at(std::size_t p) const { return p < src_.size() ? src_[p] : 0; }

  bool ident_start(unsigned char c) const {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80 ||
           (c != 0 && prof_.identifier_extra.find(static_cast<char>(c)) != std::string_view::npos);
  }
  bool ident_char(unsigned char c) const { return ident_start(c) || is_digit(c); }
  bool leading_only(unsigned char c) const {
    return (lang_ == Language::PHP && c == '$') ||
           (lang_ == Language::Ruby && (c == '@' || c == '$')) ||
           (lang_ == Language::JavaScript && c == '#');
  }

  void note(std::string msg) {
    if (std::find(out_.notes.begin(), out_.notes.end(), msg) == out_.notes.end())
      out_.notes.push_back(std::move(msg));
  }

  Token& emit(TokenKind kind, std::size_t start, std::size_t end, std::string text) {
    Token t;
    t.kind = kind;
    t.span.byte_start = start;
    t.span.byte_end = end;
    t.text = std::move(text);
    t.nesting = depth_;
    out_.tokens.push_back(std::move(t));
    return out_.tokens.back();
  }
  Token& emit(TokenKind kind, std::size_t start, std::size_t end) {
    return emit(kind, start, end, std::string(src_.substr(start, end - start)));
  }
  Token& emit_string(std::size_t start, std::size_t end, std::string value) {
    if (text::sanitize_utf8(value)) note("invalid UTF-8 in string literal replaced");
    return emit(TokenKind::StringLiteral, start, end, std::move(value));
  }

  const Token* prev_sig() const {
    for (auto it = out_.tokens.rbegin(); it != out_.tokens.rend(); ++it) {
      if (it->kind != TokenKind::Comment) return &*it;
    }
    return nullptr;
  }

  // ---- PHP inline content ----
  void lex_php_inline() {
    std::size_t open = src_.find("<?", pos_);
    while (open != std::string_view::npos) {
      if (starts("<?php", open) || starts("<?=", open)) break;
      const unsigned char n = at(open + 2);
      if (is_space(n) || n == 0) break;
      open = src_.find("<?", open + 2);
    }
    if (open == std::string_view::npos) {
      if (out_.tokens.empty() && pos_ == 0) note("no PHP open tag; file treated as inline content");
      std::size_t s = pos_;
      std::size_t e = src_.size();
      while (s < e && is_space(src_[s])) ++s;
      while (e > s && is_space(src_[e - 1])) --e;
      if (s < e) emit(TokenKind::Other, s, e);
      pos_ = src_.size();
      return;
    }
    if (open > pos_) {
      std::size_t s = pos_;
      std::size_t e = open;
      while (s < e && is_space(src_[s])) ++s;
      while (e > s && is_space(src_[e - 1])) --e;
      if (s < e) emit(TokenKind::Other, s, e);
    }
    const std::size_t len = starts("<?php", open) ? 5 : starts("<?=", open) ? 3 : 2;
    emit(TokenKind::Other, open, open + len);
    pos_ = open + len;
    php_html_ = false;
  }

  // ---- comments ----
  bool lex_comment() {
    const unsigned char c = src_[pos_];
    auto line_comment = [&] {
      std::size_t e = src_.find('\n', pos_);
      if (e == std::string_view::npos) e = src_.size();
      if (e > pos_ && src_[e - 1] == '\r') --e;
      emit(TokenKind::Comment, pos_, e);
      pos_ = e;
      return true;
    };
    auto block_comment = [&](bool nested) {
      std::size_t p = pos_ + 2;
      int level = 1;
      while (p < src_.size()) {
        if (nested && starts("/*", p)) {
          ++level;
          p += 2;
        } else if (starts("*/", p)) {
          p += 2;
          if (--level == 0) break;
        } else {
          ++p;
        }
      }
      if (level != 0) note("unterminated block comment");
      emit(TokenKind::Comment, pos_, std::min(p, src_.size()));
      pos_ = std::min(p, src_.size());
      return true;
    };
    switch (lang_) {
      case Language::Python:
        if (c == '#') return line_comment();
        return false;
      case Language::Ruby:
        if (c == '#') return line_comment();
        if (c == '=' && starts("=begin") && (pos_ == 0 || src_[pos_ - 1] == '\n') &&
            (is_space(at(pos_ + 6)) || pos_ + 6 == src_.size())) {
          std::size_t p = pos_;
          std::size_t end = src_.size();
          while (true) {
            std::size_t nl = src_.find('\n', p);
            if (nl == std::string_view::npos) {
              note("unterminated =begin comment");
              break;
            }
            p = nl + 1;
            if (starts("=end", p)) {
              std::size_t e = src_.find('\n', p);
              end = e == std::string_view::npos ? src_.size() : e;
              break;
            }
          }
          emit(TokenKind::Comment, pos_, end);
          pos_ = end;
          return true;
        }
        return false;
      case Language::PHP:
        if (c == '#' && at(pos_ + 1) != '[') return line_comment();
        [[fallthrough]];
      case Language::JavaScript:
      case Language::Go:
      case Language::Java:
      case Language::Rust:
        if (c == '/' && at(pos_ + 1) == '/') return line_comment();
        if (c == '/' && at(pos_ + 1) == '*') return block_comment(lang_ == Language::Rust);
        if (lang_ == Language::JavaScript && pos_ == 0 && starts("#!")) return line_comment();
        return false;
    }
    return false;
  }

  // ---- escapes ----
  void put_codepoint(std::string& out, std::uint32_t cp) {
    text::append_utf8(out, static_cast<char32_t>(cp > 0x10FFFF ? 0xFFFD : cp));
  }

  // `p` is at the backslash; returns the position after the escape.
  std::size_t decode_escape(std::size_t p, std::string& out, bool bytes) {
    const unsigned char e = at(p + 1);
    if (p + 1 >= src_.size()) {
      out.push_back('\\');
      return p + 1;
    }
    const bool raw_bytes = bytes || lang_ == Language::Go || lang_ == Language::PHP ||
                           lang_ == Language::Ruby;
    switch (e) {
      case 'n': out.push_back('\n'); return p + 2;
      case 't': out.push_back('\t'); return p + 2;
      case 'r': out.push_back('\r'); return p + 2;
      case 'a': out.push_back('\a'); return p + 2;
      case 'b': out.push_back('\b'); return p + 2;
      case 'f': out.push_back('\f'); return p + 2;
      case 'v': out.push_back('\v'); return p + 2;
      case 'e':
        if (lang_ == Language::Ruby || lang_ == Language::PHP) {
          out.push_back('\x1b');
          return p + 2;
        }
        break;
      case '\n': return p + 2;
      case '\r': return at(p + 2) == '\n' ? p + 3 : p + 2;
      case 'x': {
        std::size_t q = p + 2;
        unsigned v = 0;
        int n = 0;
        while (n < 2 && is_hex(at(q))) {
          v = v * 16 + static_cast<unsigned>(hex_value(at(q)));
          ++q;
          ++n;
        }
        if (n == 0) break;
        if (raw_bytes)
          out.push_back(static_cast<char>(v));
        else
          put_codepoint(out, v);
        return q;
      }
      case 'u':
      case 'U': {
        std::size_t q = p + 2;
        std::uint32_t v = 0;
        if (e == 'u' && at(q) == '{') {
          ++q;
          int n = 0;
          while (is_hex(at(q)) && n < 8) {
            v = v * 16 + static_cast<std::uint32_t>(hex_value(at(q)));
            ++q;
            ++n;
          }
          if (at(q) != '}' || n == 0) break;
          put_codepoint(out, v);
          return q + 1;
        }
        const int want = e == 'u' ? 4 : 8;
        if (e == 'U' && lang_ != Language::Python && lang_ != Language::Go) break;
        int n = 0;
        while (n < want && is_hex(at(q))) {
          v = v * 16 + static_cast<std::uint32_t>(hex_value(at(q)));
          ++q;
          ++n;
        }
        if (n != want) break;
        if (v >= 0xD800 && v <= 0xDBFF && at(q) == '\\' && at(q + 1) == 'u') {
          std::uint32_t lo = 0;
          int m = 0;
          std::size_t r = q + 2;
          while (m < 4 && is_hex(at(r))) {
            lo = lo * 16 + static_cast<std::uint32_t>(hex_value(at(r)));
            ++r;
            ++m;
          }
          if (m == 4 && lo >= 0xDC00 && lo <= 0xDFFF) {
            put_codepoint(out, 0x10000 + ((v - 0xD800) << 10) + (lo - 0xDC00));
            return r;
          }
        }
        put_codepoint(out, v);
        return q;
      }
      default: break;
    }
    if (e >= '0' && e <= '7' && lang_ != Language::Rust) {
      std::size_t q = p + 1;
      unsigned v = 0;
      int n = 0;
      while (n < 3 && at(q) >= '0' && at(q) <= '7') {
        v = v * 8 + (at(q) - '0');
        ++q;
        ++n;
      }
      if (lang_ == Language::JavaScript && v == 0 && n == 1) {
        out.push_back('\0');
        return q;
      }
      if (raw_bytes)
        out.push_back(static_cast<char>(v & 0xFF));
      else
        put_codepoint(out, v);
      return q;
    }
    if (lang_ == Language::Python && !bytes && e != '\\' && e != '\'' && e != '"') {
      out.push_back('\\');
    }
    std::size_t q = p + 1;
    text::decode_utf8(src_, q);
    out.append(src_.substr(p + 1, q - (p + 1)));
    return q;
  }

  // Skips embedded code up to the matching close brace; `p` is after the opener.
  std::size_t skip_code(std::size_t p, char open, char close) {
    int level = 1;
    while (p < src_.size()) {
      const unsigned char c = src_[p];
      if (c == '\\') {
        p += 2;
        continue;
      }
      if (c == '"' || c == '\'' || c == '`') {
        const std::size_t q = src_.find(static_cast<char>(c), p + 1);
        if (q == std::string_view::npos) return src_.size();
        p = q + 1;
        continue;
      }
      if (c == static_cast<unsigned char>(open)) ++level;
      if (c == static_cast<unsigned char>(close) && --level == 0) return p + 1;
      ++p;
    }
    return src_.size();
  }

  // Scans a quoted body starting at `p` (after the opening delimiter).
  std::size_t scan_quoted(std::size_t p, const QuoteSpec& spec, std::string& value,
                          std::vector<Span>& interps, bool& terminated) {
    terminated = false;
    int level = 0;
    while (p < src_.size()) {
      const unsigned char c = src_[p];
      if (spec.open_pair != 0 && c == static_cast<unsigned char>(spec.open_pair)) {
        ++level;
        value.push_back(static_cast<char>(c));
        ++p;
        continue;
      }
      if (starts(spec.close, p)) {
        if (level > 0) {
          --level;
          value.append(spec.close);
          p += spec.close.size();
          continue;
        }
        terminated = true;
        return p + spec.close.size();
      }
      if (c == '\n' && !spec.multiline) return p;
      if (c == '\\') {
        if (spec.escapes == Escapes::Full) {
          p = decode_escape(p, value, spec.bytes);
          continue;
        }
        const unsigned char n = at(p + 1);
        if (spec.escapes == Escapes::Lite && (n == '\\' || starts(spec.close, p + 1))) {
          value.push_back(static_cast<char>(n));
          p += 2;
          continue;
        }
        if (spec.escapes == Escapes::Verbatim) {
          value.push_back('\\');
          ++p;
          continue;
        }
        if (spec.escapes == Escapes::Keep && p + 1 < src_.size() &&
            (n == '\\' || starts(spec.close, p + 1))) {
          value.push_back('\\');
          value.push_back(static_cast<char>(n));
          p += 2;
          continue;
        }
        value.push_back('\\');
        ++p;
        continue;
      }
      std::size_t interp_end = 0;
      switch (spec.interp) {
        case Interp::JsTemplate:
          if (c == '$' && at(p + 1) == '{') interp_end = skip_code(p + 2, '{', '}');
          break;
        case Interp::RubyHash:
          if (c == '#' && at(p + 1) == '{') interp_end = skip_code(p + 2, '{', '}');
          break;
        case Interp::PyFormat:
          if (c == '{' && at(p + 1) == '{') {
            value.push_back('{');
            p += 2;
            continue;
          }
          if (c == '}' && at(p + 1) == '}') {
            value.push_back('}');
            p += 2;
            continue;
          }
          if (c == '{') interp_end = skip_code(p + 1, '{', '}');
          break;
        case Interp::PhpVar:
          if (c == '{' && at(p + 1) == '$') {
            interp_end = skip_code(p + 1, '{', '}');
          } else if (c == '$' && ident_start(at(p + 1)) && at(p + 1) != '$') {
            std::size_t q = p + 1;
            while (q < src_.size() && is_alnum(at(q))) ++q;
            interp_end = q;
          }
          break;
        case Interp::None: break;
      }
      if (interp_end > p) {
        Span s;
        s.byte_start = p;
        s.byte_end = interp_end;
        interps.push_back(s);
        value.append(src_.substr(p, interp_end - p));
        p = interp_end;
        continue;
      }
      value.push_back(static_cast<char>(c));
      ++p;
    }
    return p;
  }

  // Emits a quoted literal whose opener spans [start, body).
  Token& quoted(std::size_t start, std::size_t body, const QuoteSpec& spec) {
    std::string value;
    std::vector<Span> interps;
    bool terminated = false;
    const std::size_t end = scan_quoted(body, spec, value, interps, terminated);
    if (!terminated) note("unterminated string literal");
    Token& t = emit_string(start, end, std::move(value));
    t.interpolations = std::move(interps);
    pos_ = end;
    return t;
  }

  bool regex_allowed() const {
    const Token* p = prev_sig();
    if (p == nullptr) return true;
    switch (p->kind) {
      case TokenKind::Identifier:
      case TokenKind::StringLiteral:
      case TokenKind::NumberArray: return false;
      case TokenKind::Other: {
        static const Words expr_keywords = {"return", "typeof", "instanceof", "in",    "of",
                                            "new",    "delete", "void",       "throw", "case",
                                            "do",     "else",   "yield",      "await", "if",
                                            "unless", "when",   "and",        "or",    "not"};
        if (p->text == ")" || p->text == "]" || p->text == "}") return false;
        if (!p->text.empty() && (is_alnum(static_cast<unsigned char>(p->text[0])))) {
          return expr_keywords.count(p->text) > 0;
        }
        return true;
      }
      default: return true;
    }
  }

  bool lex_regex() {
    std::size_t p = pos_ + 1;
    bool in_class = false;
    while (p < src_.size() && src_[p] != '\n') {
      const char c = src_[p];
      if (c == '\\') {
        p += 2;
        continue;
      }
      if (c == '[') in_class = true;
      if (c == ']') in_class = false;
      if (c == '/' && !in_class) break;
      ++p;
    }
    if (p >= src_.size() || src_[p] != '/') return false;
    ++p;
    while (p < src_.size() && is_alnum(src_[p])) ++p;
    emit(TokenKind::Other, pos_, p);
    pos_ = p;
    return true;
  }

  bool lex_string() {
    const unsigned char c = src_[pos_];
    switch (lang_) {
      case Language::JavaScript:
        if (c == '\'' || c == '"') {
          quoted(pos_, pos_ + 1, {std::string_view(&src_[pos_], 1), Escapes::Full, false, false});
          return true;
        }
        if (c == '`') {
          quoted(pos_, pos_ + 1, {"`", Escapes::Full, false, true, Interp::JsTemplate});
          return true;
        }
        if (c == '/' && at(pos_ + 1) != '/' && at(pos_ + 1) != '*' && regex_allowed())
          return lex_regex();
        return false;
      case Language::Python:
        if (c == '\'' || c == '"') {
          python_string(pos_, pos_, "");
          return true;
        }
        return false;
      case Language::Ruby: return ruby_string();
      case Language::PHP:
        if (c == '\'') {
          quoted(pos_, pos_ + 1, {"'", Escapes::Lite});
          return true;
        }
        if (c == '"') {
          quoted(pos_, pos_ + 1, {"\"", Escapes::Full, false, true, Interp::PhpVar});
          return true;
        }
        if (c == '`') {
          quoted(pos_, pos_ + 1, {"`", Escapes::Full, false, true, Interp::PhpVar}).detail =
              "command";
          return true;
        }
        if (starts("<<<")) return php_heredoc();
        return false;
      case Language::Rust:
        if (c == '"') {
          quoted(pos_, pos_ + 1, {"\"", Escapes::Full});
          return true;
        }
        if (c == '\'') return char_or_lifetime(pos_, pos_ + 1, false);
        return false;
      case Language::Go:
        if (c == '"') {
          quoted(pos_, pos_ + 1, {"\"", Escapes::Full, false, false});
          return true;
        }
        if (c == '`') {
          quoted(pos_, pos_ + 1, {"`", Escapes::Verbatim});
          return true;
        }
        if (c == '\'') {
          quoted(pos_, pos_ + 1, {"'", Escapes::Full, false, false});
          return true;
        }
        return false;
      case Language::Java:
        if (starts("\"\"\"")) {
          quoted(pos_, pos_ + 3, {"\"\"\"", Escapes::Full});
          return true;
        }
        if (c == '"' || c == '\'') {
          quoted(pos_, pos_ + 1, {std::string_view(&src_[pos_], 1), Escapes::Full, false, false});
          return true;
        }
        return false;
    }
    return false;
  }

  // `start` is the token start (prefix included), `q` the opening quote.
  void python_string(std::size_t start, std::size_t q, std::string_view prefix) {
    const std::string pre = text::to_lower(prefix);
    const bool raw = pre.find('r') != std::string::npos;
    const bool bytes = pre.find('b') != std::string::npos;
    const bool fmt = pre.find('f') != std::string::npos;
    const char quote = src_[q];
    const bool triple = at(q + 1) == static_cast<unsigned char>(quote) &&
                        at(q + 2) == static_cast<unsigned char>(quote);
    QuoteSpec spec;
    spec.close = src_.substr(q, triple ? 3 : 1);
    spec.escapes = raw ? Escapes::Keep : Escapes::Full;
    spec.bytes = bytes;
    spec.multiline = triple;
    spec.interp = fmt ? Interp::PyFormat : Interp::None;
    quoted(start, q + (triple ? 3 : 1), spec);
  }

  bool char_or_lifetime(std::size_t start, std::size_t body, bool bytes) {
    if (at(body) == '\\') {
      quoted(start, body, {"'", Escapes::Full, bytes, false});
      return true;
    }
    std::size_t q = body;
    text::decode_utf8(src_, q);
    if (at(q) == '\'') {
      emit_string(start, q + 1, std::string(src_.substr(body, q - body)));
      pos_ = q + 1;
      return true;
    }
    std::size_t e = body;
    while (e < src_.size() && ident_char(src_[e])) ++e;
    emit(TokenKind::Other, start, e);
    pos_ = e;
    return true;
  }

  // ---- Ruby ----
  bool ruby_string() {
    const unsigned char c = src_[pos_];
    if (c == '\'') {
      quoted(pos_, pos_ + 1, {"'", Escapes::Lite});
      return true;
    }
    if (c == '"') {
      quoted(pos_, pos_ + 1, {"\"", Escapes::Full, false, true, Interp::RubyHash});
      return true;
    }
    if (c == '`') {
      quoted(pos_, pos_ + 1, {"`", Escapes::Full, false, true, Interp::RubyHash}).detail =
          "command";
      return true;
    }
    if (c == '%') return ruby_percent();
    if (c == '<' && starts("<<")) return ruby_heredoc_open();
    if (c == '/' && regex_allowed()) return lex_regex();
    return false;
  }

  static char closing_of(char open) {
    switch (open) {
      case '(': return ')';
      case '[': return ']';
      case '{': return '}';
      case '<': return '>';
      default: return open;
    }
  }

  bool ruby_percent() {
    unsigned char type = at(pos_ + 1);
    std::size_t delim_at = pos_ + 2;
    const std::string_view types = "qQwWiIxrs";
    if (type == 0) return false;
    if (types.find(static_cast<char>(type)) == std::string_view::npos) {
      if (!(type == '(' || type == '[' || type == '{' || type == '<' || type == '|' ||
            type == '!' || type == '/') ||
          !regex_allowed())
        return false;
      delim_at = pos_ + 1;
      type = 'Q';
    }
    const unsigned char open = at(delim_at);
    if (open == 0 || is_alnum(open) || is_space(open)) return false;
    const char close_char = closing_of(static_cast<char>(open));
    QuoteSpec spec;
    spec.close = closing_delims_.emplace_back(1, close_char);
    spec.open_pair = close_char != static_cast<char>(open) ? static_cast<char>(open) : 0;
    const std::size_t start = pos_;
    const std::size_t body = delim_at + 1;
    switch (type) {
      case 'q':
        spec.escapes = Escapes::Lite;
        quoted(start, body, spec);
        return true;
      case 'Q':
        spec.interp = Interp::RubyHash;
        quoted(start, body, spec);
        return true;
      case 'x':
        spec.interp = Interp::RubyHash;
        quoted(start, body, spec).detail = "command";
        return true;
      case 'w':
      case 'W': {
        std::string value;
        std::vector<Span> interps;
        bool terminated = false;
        spec.escapes = Escapes::Verbatim;
        const std::size_t end = scan_quoted(body, spec, value, interps, terminated);
        if (!terminated) note("unterminated %-literal");
        const std::size_t content_end = terminated ? end - 1 : end;
        emit(TokenKind::Other, start, body);
        std::size_t p = body;
        while (p < content_end) {
          while (p < content_end && is_space(src_[p])) ++p;
          std::size_t w = p;
          while (w < content_end && !is_space(src_[w])) ++w;
          if (w > p) emit_string(p, w, std::string(src_.substr(p, w - p)));
          p = w;
        }
        if (terminated) emit(TokenKind::Other, end - 1, end);
        pos_ = end;
        return true;
      }
      default: {
        std::string value;
        std::vector<Span> interps;
        bool terminated = false;
        spec.escapes = Escapes::Keep;
        const std::size_t end = scan_quoted(body, spec, value, interps, terminated);
        if (!terminated) note("unterminated %-literal");
        emit(TokenKind::Other, start, end);
        pos_ = end;
        return true;
      }
    }
  }

  bool ruby_heredoc_open() {
    std::size_t p = pos_ + 2;
    bool indented = false;
    bool squiggly = false;
    if (at(p) == '~') {
      squiggly = indented = true;
      ++p;
    } else if (at(p) == '-') {
      indented = true;
      ++p;
    }
    bool raw = false;
    std::string id;
    const unsigned char q = at(p);
    if (q == '\'' || q == '"' || q == '`') {
      const std::size_t e = src_.find(static_cast<char>(q), p + 1);
      if (e == std::string_view::npos || src_.substr(p, e - p).find('\n') != std::string_view::npos)
        return false;
      id = std::string(src_.substr(p + 1, e - p - 1));
      raw = q == '\'';
      p = e + 1;
    } else {
      const bool upper = (q >= 'A' && q <= 'Z') || q == '_';
      if (!upper && !indented) return false;
      if (!(is_alnum(q) && !is_digit(q))) return false;
      std::size_t e = p;
      while (is_alnum(at(e))) ++e;
      id = std::string(src_.substr(p, e - p));
      p = e;
    }
    if (id.empty()) return false;
    emit(TokenKind::Other, pos_, p);
    heredocs_.push_back({id, indented, squiggly, raw});
    pos_ = p;
    return true;
  }

  void read_heredoc_bodies() {
    auto pending = std::move(heredocs_);
    heredocs_.clear();
    for (const auto& h : pending) {
      const std::size_t body = pos_;
      std::size_t p = body;
      std::size_t body_end = src_.size();
      std::size_t end = src_.size();
      bool found = false;
      while (p < src_.size()) {
        std::size_t nl = src_.find('\n', p);
        const std::size_t le = nl == std::string_view::npos ? src_.size() : nl;
        std::string_view line = src_.substr(p, le - p);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::string_view cmp = line;
        if (h.indented) {
          while (!cmp.empty() && (cmp.front() == ' ' || cmp.front() == '\t')) cmp.remove_prefix(1);
        }
        if (cmp == h.id) {
          body_end = p;
          end = p + line.size();
          found = true;
          break;
        }
        if (nl == std::string_view::npos) break;
        p = nl + 1;
      }
      if (!found) {
        note("unterminated heredoc");
        body_end = end = src_.size();
      }
      std::string raw_body(src_.substr(body, body_end - body));
      if (h.squiggly) raw_body = dedent(raw_body);
      std::string value;
      if (h.raw) {
        value = raw_body;
      } else {
        // Decode escapes over the (possibly dedented) body.
        Lexer sub(raw_body, prof_, scratch_);
        std::vector<Span> interps;
        bool terminated = false;
        sub.scan_quoted(0, {"\x01\x02", Escapes::Full, false, true}, value, interps, terminated);
      }
      emit_string(body, end, std::move(value));
      pos_ = end;
      if (pos_ < src_.size() && src_[pos_] == '\r') ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '\n') ++pos_;
    }
  }

  static std::string dedent(std::string_view body) {
    std::size_t common = std::string::npos;
    std::size_t p = 0;
    while (p < body.size()) {
      std::size_t e = body.find('\n', p);
      if (e == std::string_view::npos) e = body.size();
      std::size_t i = p;
      while (i < e && (body[i] == ' ' || body[i] == '\t')) ++i;
      if (i < e) common = std::min(common, i - p);
      p = e + 1;
    }
    if (common == std::string::npos || common == 0) return std::string(body);
    std::string out;
    p = 0;
    while (p < body.size()) {
      std::size_t e = body.find('\n', p);
      const bool last = e == std::string_view::npos;
      if (last) e = body.size();
      std::string_view line = body.substr(p, e - p);
      out.append(line.size() >= common ? line.substr(common) : std::string_view());
      if (!last) out.push_back('\n');
      p = e + 1;
    }
    return out;
  }

  // ---- PHP heredoc / nowdoc ----
  bool php_heredoc() {
    std::size_t p = pos_ + 3;
    while (at(p) == ' ' || at(p) == '\t') ++p;
    bool raw = false;
    bool quoted_id = false;
    if (at(p) == '\'' || at(p) == '"') {
      raw = at(p) == '\'';
      quoted_id = true;
      ++p;
    }
    std::size_t e = p;
    while (is_alnum(at(e))) ++e;
    if (e == p) return false;
    const std::string id(src_.substr(p, e - p));
    if (quoted_id) {
      if (at(e) != '\'' && at(e) != '"') return false;
      ++e;
    }
    if (at(e) == '\r') ++e;
    if (at(e) != '\n') return false;
    const std::size_t body = e + 1;
    std::size_t line = body;
    std::size_t body_end = src_.size();
    std::size_t end = src_.size();
    std::size_t indent = 0;
    bool found = false;
    while (line <= src_.size()) {
      std::size_t i = line;
      while (i < src_.size() && (src_[i] == ' ' || src_[i] == '\t')) ++i;
      if (starts(id, i) && !is_alnum(at(i + id.size()))) {
        body_end = line == body ? body : line - 1;
        end = i + id.size();
        indent = i - line;
        found = true;
        break;
      }
      const std::size_t nl = src_.find('\n', line);
      if (nl == std::string_view::npos) break;
      line = nl + 1;
    }
    if (!found) note("unterminated PHP heredoc");
    std::string raw_body(src_.substr(body, body_end - body));
    if (indent > 0) {
      std::string out;
      std::size_t q = 0;
      while (q <= raw_body.size()) {
        std::size_t nl = raw_body.find('\n', q);
        const bool last = nl == std::string::npos;
        if (last) nl = raw_body.size();
        std::string_view l = std::string_view(raw_body).substr(q, nl - q);
        std::size_t cut = 0;
        while (cut < indent && cut < l.size() && (l[cut] == ' ' || l[cut] == '\t')) ++cut;
        out.append(l.substr(cut));
        if (last) break;
        out.push_back('\n');
        q = nl + 1;
      }
      raw_body = std::move(out);
    }
    std::string value;
    std::vector<Span> interps;
    if (raw) {
      value = raw_body;
    } else {
      Lexer sub(raw_body, prof_, scratch_);
      bool terminated = false;
      sub.scan_quoted(0, {"\x01\x02", Escapes::Full, false, true, Interp::PhpVar}, value, interps,
                      terminated);
      for (auto& s : interps) {
        s.byte_start += body;
        s.byte_end += body;
      }
    }
    Token& t = emit_string(pos_, end, std::move(value));
    if (indent == 0) t.interpolations = std::move(interps);
    pos_ = end;
    return true;
  }

  // ---- numbers, words, punctuation ----
  void lex_number() {
    std::size_t p = pos_;
    const bool hex = src_[p] == '0' && (at(p + 1) == 'x' || at(p + 1) == 'X');
    while (p < src_.size()) {
      const unsigned char c = src_[p];
      if (is_alnum(c)) {
        ++p;
        continue;
      }
      if (c == '.' && is_digit(at(p + 1)) && !hex) {
        ++p;
        continue;
      }
      if ((c == '+' || c == '-') && !hex && p > pos_ && (src_[p - 1] == 'e' || src_[p - 1] == 'E') &&
          is_digit(at(p + 1))) {
        ++p;
        continue;
      }
      break;
    }
    emit(TokenKind::Other, pos_, p);
    pos_ = p;
  }

  void lex_word() {
    std::size_t p = pos_;
    bool leading = true;
    while (p < src_.size() && ident_char(src_[p])) {
      const bool lead_char = leading_only(src_[p]);
      if (lead_char && !leading) break;
      leading = leading && lead_char;
      ++p;
    }
    std::string_view word = src_.substr(pos_, p - pos_);

    if (lang_ == Language::Python && word.size() <= 2 && (at(p) == '\'' || at(p) == '"')) {
      const std::string lw = text::to_lower(word);
      static const Words prefixes = {"r", "b", "u", "f", "rb", "br", "fr", "rf"};
      if (prefixes.count(lw)) {
        python_string(pos_, p, word);
        return;
      }
    }
    if (lang_ == Language::Rust && (word == "b" || word == "r" || word == "br")) {
      if (word == "b" && at(p) == '\'') {
        char_or_lifetime(pos_, p + 1, true);
        return;
      }
      if (word == "b" && at(p) == '"') {
        quoted(pos_, p + 1, {"\"", Escapes::Full, true});
        return;
      }
      if (word != "b" && (at(p) == '"' || at(p) == '#')) {
        std::size_t h = p;
        while (at(h) == '#') ++h;
        if (at(h) == '"') {
          const std::string close = "\"" + std::string(h - p, '#');
          quoted(pos_, h + 1, {closing_delims_.emplace_back(close), Escapes::Verbatim});
          return;
        }
      }
    }
    if (lang_ == Language::Ruby && p > pos_ && (at(p) == '?' || at(p) == '!') &&
        at(p + 1) != '=') {
      const unsigned char n = at(p + 1);
      const bool ends = n == 0 || is_space(n) || std::string_view("),.;(").find(static_cast<char>(n)) !=
                                                      std::string_view::npos;
      if (at(p) == '!' || ends) {
        ++p;
        word = src_.substr(pos_, p - pos_);
      }
    }

    TokenKind kind = TokenKind::Identifier;
    if (is_try_word(lang_, word)) {
      kind = TokenKind::TryBlock;
    } else if (is_catch_word(lang_, word)) {
      kind = TokenKind::CatchBlock;
    } else if (keywords(lang_).count(word)) {
      kind = TokenKind::Other;
    }
    // Member names after '.' are never keywords.
    if (kind != TokenKind::Identifier) {
      const Token* prev = prev_sig();
      if (prev && (prev->is_punct(".") || prev->is_punct("?.") || prev->is_punct("->")) &&
          prev->span.byte_end == pos_)
        kind = TokenKind::Identifier;
    }
    emit(kind, pos_, p);
    pos_ = p;
  }

  std::optional<std::pair<std::size_t, std::vector<std::int64_t>>> number_array(std::size_t open) {
    const char close = closing_of(src_[open]);
    std::size_t p = open + 1;
    std::vector<std::int64_t> values;
    auto skip_ws = [&] {
      while (p < src_.size() && is_space(src_[p])) ++p;
    };
    while (true) {
      skip_ws();
      if (at(p) == static_cast<unsigned char>(close)) break;
      bool neg = false;
      if (at(p) == '-' || at(p) == '+') {
        neg = at(p) == '-';
        ++p;
        skip_ws();
      }
      if (!is_digit(at(p))) return std::nullopt;
      int base = 10;
      if (at(p) == '0' && (at(p + 1) == 'x' || at(p + 1) == 'X')) {
        base = 16;
        p += 2;
      } else if (at(p) == '0' && (at(p + 1) == 'o' || at(p + 1) == 'O')) {
        base = 8;
        p += 2;
      } else if (at(p) == '0' && (at(p + 1) == 'b' || at(p + 1) == 'B')) {
        base = 2;
        p += 2;
      }
      std::string digits;
      while (p < src_.size() && (is_hex(src_[p]) || src_[p] == '_')) {
        if (base != 16 && !is_digit(src_[p])) break;
        if (src_[p] != '_') digits.push_back(src_[p]);
        ++p;
      }
      if (digits.empty()) return std::nullopt;
      if (base == 10 && digits.size() > 1 && digits[0] == '0' &&
          (lang_ == Language::Java || lang_ == Language::Go || lang_ == Language::PHP ||
           lang_ == Language::Ruby))
        base = 8;
      // integer type suffixes (u8, i32, L, ...)
      while (p < src_.size() && is_alnum(src_[p])) ++p;
      if (at(p) == '.') return std::nullopt;
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
      values.push_back(neg ? -v : v);
      skip_ws();
      if (at(p) == ',') {
        ++p;
        continue;
      }
      if (at(p) == static_cast<unsigned char>(close)) break;
      return std::nullopt;
    }
    if (values.size() < 2) return std::nullopt;
    return std::make_pair(p + 1, std::move(values));
  }

  void lex_punct() {
    const unsigned char c = src_[pos_];
    if (c == '(' || c == '[' || c == '{') {
      bool array_ok = c != '(';
      if (c == '(') {
        const Token* prev = prev_sig();
        array_ok = prev && prev->kind == TokenKind::Identifier && prev->text == "array";
      }
      if (array_ok) {
        if (auto arr = number_array(pos_)) {
          Token& t = emit(TokenKind::NumberArray, pos_, arr->first);
          t.values = std::move(arr->second);
          pos_ = arr->first;
          return;
        }
      }
      emit(TokenKind::Other, pos_, pos_ + 1);
      ++depth_;
      ++pos_;
      return;
    }
    if (c == ')' || c == ']' || c == '}') {
      depth_ = std::max(0, depth_ - 1);
      emit(TokenKind::Other, pos_, pos_ + 1);
      ++pos_;
      return;
    }
    if (c >= 0x80 || c < 0x20) {
      std::size_t q = pos_;
      text::decode_utf8(src_, q);
      emit(TokenKind::Other, pos_, q);
      pos_ = q;
      return;
    }
    for (std::string_view op : kOperators) {
      if (!starts(op)) continue;
      if (op == ".=" && lang_ != Language::PHP) continue;
      if (op == "//=" && lang_ != Language::Python) continue;
      if (op == "//" && lang_ != Language::Python) continue;
      if (op == "<-" && lang_ != Language::Go) continue;
      if (op == "?->" && lang_ != Language::PHP) continue;
      if (op == ":=" && lang_ != Language::Go && lang_ != Language::Python) continue;
      emit(kAssignOps.count(op) ? TokenKind::Assignment : TokenKind::Other, pos_,
           pos_ + op.size());
      pos_ += op.size();
      return;
    }
    emit(c == '=' ? TokenKind::Assignment : TokenKind::Other, pos_, pos_ + 1);
    ++pos_;
  }

  std::string_view src_;
  Language lang_;
  const LanguageProfile& prof_;
  TokenStream& out_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  bool php_html_ = false;
  std::vector<PendingHeredoc> heredocs_;
  std::deque<std::string> closing_delims_;
  TokenStream scratch_;
};

// ---- post passes ----

std::size_t next_sig(const std::vector<Token>& toks, std::size_t i) {
  ++i;
  while (i < toks.size() && toks[i].kind == TokenKind::Comment) ++i;
  return i;
}

std::size_t prev_sig_index(const std::vector<Token>& toks, std::size_t i) {
  while (i > 0) {
    --i;
    if (toks[i].kind != TokenKind::Comment) return i;
  }
  return toks.size();
}

bool statement_start(const std::vector<Token>& toks, std::size_t i) {
  const std::size_t p = prev_sig_index(toks, i);
  if (p == toks.size()) return true;
  if (toks[p].is_punct(";")) return true;
  if (toks[p].is_punct("\\")) return false;
  return toks[i].nesting == 0 && toks[p].span.byte_end <= toks[i].span.byte_start &&
         toks[p].span.line_end < toks[i].span.line_start;
}

Token merge(const std::vector<Token>& toks, std::size_t first, std::size_t last,
            std::string_view src) {
  Token t;
  t.kind = TokenKind::ImportStmt;
  t.span.byte_start = toks[first].span.byte_start;
  t.span.byte_end = toks[last - 1].span.byte_end;
  t.span.line_start = toks[first].span.line_start;
  t.span.line_end = toks[last - 1].span.line_end;
  t.text = std::string(src.substr(t.span.byte_start, t.span.byte_end - t.span.byte_start));
  t.nesting = toks[first].nesting;
  t.column = toks[first].column;
  return t;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.append(sep);
    out.append(v[i]);
  }
  return out;
}

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!is_space(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

// Returns the end index (exclusive) and fills `tok` when an import statement starts at i.
std::size_t import_at(const std::vector<Token>& toks, std::size_t i, Language lang,
                      std::string_view src, std::vector<Token>& out) {
  const Token& t = toks[i];
  const std::size_t n = toks.size();
  auto text_of = [&](std::size_t a, std::size_t b) {
    return std::string(src.substr(toks[a].span.byte_start,
                                  toks[b - 1].span.byte_end - toks[a].span.byte_start));
  };
  switch (lang) {
    case Language::Python: {
      if (t.kind != TokenKind::Other || (t.text != "import" && t.text != "from")) return 0;
      if (!statement_start(toks, i)) return 0;
      std::size_t j = i + 1;
      int depth = 0;
      while (j < n) {
        const Token& u = toks[j];
        if (u.is_punct("(")) ++depth;
        if (u.is_punct(")")) --depth;
        if (depth <= 0 && u.is_punct(";")) break;
        if (depth <= 0 && u.nesting == 0 && !u.is_punct(")") &&
            u.span.line_start > toks[j - 1].span.line_end && !toks[j - 1].is_punct("\\"))
          break;
        ++j;
      }
      Token m = merge(toks, i, j, src);
      std::vector<std::string> words;
      for (std::size_t k = i + 1; k < j; ++k) {
        const Token& u = toks[k];
        if (u.kind == TokenKind::Comment || u.is_punct("(") || u.is_punct(")") ||
            u.is_punct("\\"))
          continue;
        words.push_back(u.text);
      }
      std::vector<std::string> modules;
      std::vector<std::string> names;
      auto parse_list = [&](std::size_t from, bool dotted_modules) {
        std::string cur;
        std::string alias;
        bool in_alias = false;
        auto flush = [&] {
          if (cur.empty()) return;
          if (dotted_modules) {
            modules.push_back(cur);
            names.push_back(alias.empty() ? cur.substr(0, cur.find('.')) : alias + "=" + cur);
          } else {
            names.push_back(alias.empty() ? cur : alias + "=" + cur);
          }
          cur.clear();
          alias.clear();
          in_alias = false;
        };
        for (std::size_t k = from; k < words.size(); ++k) {
          const std::string& w = words[k];
          if (w == ",") {
            flush();
          } else if (w == "as") {
            in_alias = true;
          } else if (in_alias) {
            alias = w;
          } else {
            cur += w;
          }
        }
        flush();
      };
      if (t.text == "import") {
        parse_list(0, true);
      } else {
        std::size_t k = 0;
        std::string mod;
        while (k < words.size() && words[k] != "import") mod += words[k++];
        modules.push_back(mod);
        parse_list(k + 1, false);
      }
      m.detail = join(modules, ", ");
      m.parts = names;
      out.push_back(std::move(m));
      return j;
    }
    case Language::JavaScript: {
      if (!t.is(TokenKind::Other, "import")) return 0;
      const std::size_t nx = next_sig(toks, i);
      if (nx >= n || toks[nx].is_punct("(") || toks[nx].is_punct(".")) return 0;
      std::size_t j = nx;
      std::size_t str = n;
      while (j < n && j < i + 400) {
        if (toks[j].kind == TokenKind::StringLiteral) {
          str = j;
          break;
        }
        if (toks[j].is_punct(";")) break;
        ++j;
      }
      if (str == n) return 0;
      std::size_t end = str + 1;
      const std::size_t semi = next_sig(toks, str);
      if (semi < n && toks[semi].is_punct(";") &&
          toks[semi].span.line_start == toks[str].span.line_end)
        end = semi + 1;
      Token m = merge(toks, i, end, src);
      m.detail = toks[str].text;
      for (std::size_t k = i + 1; k < str; ++k) {
        if (toks[k].kind != TokenKind::Identifier) continue;
        const std::string& w = toks[k].text;
        if (w == "as" || w == "from" || w == "type") continue;
        const std::size_t a = next_sig(toks, k);
        if (a < str && toks[a].is(TokenKind::Identifier, "as")) continue;
        m.parts.push_back(w);
      }
      out.push_back(std::move(m));
      return end;
    }
    case Language::Go: {
      auto spec_at = [&](std::size_t k, std::size_t limit) -> std::size_t {
        if (k >= limit) return 0;
        std::size_t s = k;
        std::string alias;
        if ((toks[k].kind == TokenKind::Identifier || toks[k].is_punct(".")) && k + 1 < limit &&
            toks[k + 1].kind == TokenKind::StringLiteral) {
          alias = toks[k].text;
          ++k;
        }
        if (toks[k].kind != TokenKind::StringLiteral) return 0;
        Token m = merge(toks, s, k + 1, src);
        m.detail = toks[k].text;
        if (!alias.empty()) m.parts.push_back(alias);
        out.push_back(std::move(m));
        return k + 1;
      };
      if (!t.is(TokenKind::Other, "import")) return 0;
      out.push_back(t);
      std::size_t k = i + 1;
      while (k < n && toks[k].kind == TokenKind::Comment) out.push_back(toks[k++]);
      if (k < n && toks[k].is_punct("(")) {
        const std::size_t close = matching_close(toks, k);
        out.push_back(toks[k++]);
        while (k < close) {
          const std::size_t e = spec_at(k, close);
          if (e == 0) {
            out.push_back(toks[k++]);
          } else {
            k = e;
          }
        }
        if (close < n) out.push_back(toks[close]);
        return close < n ? close + 1 : n;
      }
      const std::size_t e = spec_at(k, n);
      return e == 0 ? k : e;
    }
    case Language::Java: {
      if (!t.is(TokenKind::Other, "import")) return 0;
      std::size_t j = i + 1;
      std::string name;
      while (j < n && !toks[j].is_punct(";") && j < i + 200) {
        if (toks[j].kind != TokenKind::Comment && toks[j].text != "static") name += toks[j].text;
        ++j;
      }
      const std::size_t end = j < n && toks[j].is_punct(";") ? j + 1 : j;
      Token m = merge(toks, i, end, src);
      m.detail = name;
      const auto dot = name.rfind('.');
      m.parts.push_back(dot == std::string::npos ? name : name.substr(dot + 1));
      out.push_back(std::move(m));
      return end;
    }
    case Language::Rust: {
      const bool ext = t.is(TokenKind::Other, "extern") && i + 1 < n &&
                       toks[i + 1].is(TokenKind::Other, "crate");
      if (!t.is(TokenKind::Other, "use") && !ext) return 0;
      std::size_t j = i + 1;
      while (j < n && !toks[j].is_punct(";") && j < i + 400) ++j;
      if (j >= n) return 0;
      Token m = merge(toks, i, j + 1, src);
      const std::size_t body = ext ? i + 2 : i + 1;
      m.detail = body < j ? strip_spaces(text_of(body, j)) : std::string();
      for (std::size_t k = body; k < j; ++k) {
        if (toks[k].kind != TokenKind::Identifier && toks[k].text != "self") continue;
        const std::size_t a = next_sig(toks, k);
        if (a < j && (toks[a].is_punct("::") || toks[a].is(TokenKind::Other, "as"))) continue;
        m.parts.push_back(toks[k].text);
      }
      out.push_back(std::move(m));
      return j + 1;
    }
    case Language::PHP: {
      if (!t.is(TokenKind::Other, "use") || t.nesting != 0) return 0;
      const std::size_t nx = next_sig(toks, i);
      if (nx >= n || toks[nx].is_punct("(")) return 0;
      std::size_t j = i + 1;
      while (j < n && !toks[j].is_punct(";") && j < i + 400) ++j;
      if (j >= n) return 0;
      Token m = merge(toks, i, j + 1, src);
      m.detail = nx < j ? strip_spaces(text_of(nx, j)) : std::string();
      out.push_back(std::move(m));
      return j + 1;
    }
    case Language::Ruby: {
      if (t.kind != TokenKind::Identifier ||
          (t.text != "require" && t.text != "require_relative" && t.text != "load"))
        return 0;
      std::size_t k = next_sig(toks, i);
      bool paren = false;
      if (k < n && toks[k].is_punct("(") && toks[k].span.byte_start == t.span.byte_end) {
        paren = true;
        k = next_sig(toks, k);
      }
      if (k >= n || toks[k].kind != TokenKind::StringLiteral) return 0;
      std::size_t end = k + 1;
      if (paren) {
        const std::size_t c = next_sig(toks, k);
        if (c >= n || !toks[c].is_punct(")")) return 0;
        end = c + 1;
      }
      Token m = merge(toks, i, end, src);
      m.detail = toks[k].text;
      out.push_back(std::move(m));
      return end;
    }
  }
  return 0;
}

void merge_imports(TokenStream& ts, std::string_view src) {
  std::vector<Token> out;
  out.reserve(ts.tokens.size());
  const auto& toks = ts.tokens;
  std::size_t i = 0;
  while (i < toks.size()) {
    const std::size_t before = out.size();
    const std::size_t e = import_at(toks, i, ts.language, src, out);
    if (e > i) {
      i = e;
      continue;
    }
    out.resize(before);
    out.push_back(toks[i]);
    ++i;
  }
  ts.tokens = std::move(out);
}

std::size_t matching_open(const std::vector<Token>& toks, std::size_t close) {
  const std::string_view c = toks[close].text;
  const std::string_view o = c == ")" ? "(" : c == "]" ? "[" : "{";
  int level = 0;
  for (std::size_t k = close + 1; k-- > 0;) {
    if (toks[k].kind != TokenKind::Other) continue;
    if (toks[k].text == c) ++level;
    if (toks[k].text == o && --level == 0) return k;
  }
  return toks.size();
}

void assignment_targets(TokenStream& ts, std::string_view src) {
  auto& toks = ts.tokens;
  const std::size_t n = toks.size();
  static const Words separators = {".", "::", "->", "?.", "?->"};
  for (std::size_t i = 0; i < n; ++i) {
    if (toks[i].kind != TokenKind::Assignment) continue;
    std::size_t j = prev_sig_index(toks, i);
    if (j == n) continue;
    const std::size_t last = j;
    std::size_t start = n;
    while (j < n) {
      const Token& t = toks[j];
      if (t.kind == TokenKind::Identifier) {
        start = j;
      } else if (t.is_punct(")") || t.is_punct("]") || t.is_punct("}")) {
        const std::size_t k = matching_open(toks, j);
        if (k == n) break;
        start = k;
        const std::size_t pj = prev_sig_index(toks, k);
        if (pj < n && toks[pj].span.byte_end == toks[k].span.byte_start &&
            (toks[pj].kind == TokenKind::Identifier || toks[pj].is_punct(")") ||
             toks[pj].is_punct("]"))) {
          j = pj;
          continue;
        }
      } else {
        break;
      }
      const std::size_t pj = prev_sig_index(toks, start);
      if (pj < n && toks[pj].kind == TokenKind::Other && separators.count(toks[pj].text)) {
        j = prev_sig_index(toks, pj);
        continue;
      }
      break;
    }
    // `let x: T = ...` and `x: T = ...` annotate the target.
    for (std::size_t k = prev_sig_index(toks, i); k < n && k + 64 > i;
         k = prev_sig_index(toks, k)) {
      const Token& u = toks[k];
      if (u.is_punct(";") || u.is_punct("{") || u.is_punct("}") || u.kind == TokenKind::Assignment)
        break;
      if (u.is_punct(":") && u.nesting == toks[i].nesting) {
        const std::size_t id = prev_sig_index(toks, k);
        if (id < n && toks[id].kind == TokenKind::Identifier) {
          const std::size_t before = prev_sig_index(toks, id);
          const bool let = before < n && (toks[before].is(TokenKind::Other, "let") ||
                                          toks[before].is(TokenKind::Other, "mut"));
          const bool py_head = ts.language == Language::Python && statement_start(toks, id);
          if (let || py_head) {
            start = id;
            toks[i].detail = toks[id].text;
          }
        }
        break;
      }
      if (toks[k].span.line_start < toks[i].span.line_start && ts.language == Language::Python) break;
    }
    if (start == n) continue;
    if (!toks[i].detail.empty()) continue;
    toks[i].detail = strip_spaces(src.substr(
        toks[start].span.byte_start, toks[last].span.byte_end - toks[start].span.byte_start));
  }
}

void assign_lines(TokenStream& ts, std::string_view src) {
  const text::LineIndex index(src);
  for (auto& t : ts.tokens) {
    t.span.line_start = index.line_of(t.span.byte_start);
    t.span.line_end = index.line_of(t.span.byte_end > t.span.byte_start ? t.span.byte_end - 1
                                                                       : t.span.byte_start);
    t.column = static_cast<std::uint32_t>(index.column_of(t.span.byte_start));
    for (auto& s : t.interpolations) {
      s.line_start = index.line_of(s.byte_start);
      s.line_end = index.line_of(s.byte_end > s.byte_start ? s.byte_end - 1 : s.byte_start);
    }
  }
}

}  // namespace

const LanguageProfile& profile(Language lang) {
  static const std::array<LanguageProfile, 7> profiles = {{
      {Language::JavaScript, {".js", ".mjs", ".cjs"}, {"'", "\"", "`"},
       {{"//", "\n"}, {"/*", "*/"}}, "$#", true},
      {Language::Python, {".py"}, {"'", "\"", "'''", "\"\"\""}, {{"#", "\n"}}, "", true},
      {Language::Ruby, {".rb", ".gemspec"}, {"'", "\"", "`", "%q", "%Q", "%w", "<<~"},
       {{"#", "\n"}, {"=begin", "=end"}}, "@$", true},
      {Language::PHP, {".php"}, {"'", "\"", "`", "<<<"},
       {{"//", "\n"}, {"#", "\n"}, {"/*", "*/"}}, "$", true},
      {Language::Rust, {".rs"}, {"\"", "r\"", "r#\"", "b\""}, {{"//", "\n"}, {"/*", "*/"}}, "",
       false},
      {Language::Go, {".go"}, {"\"", "`", "'"}, {{"//", "\n"}, {"/*", "*/"}}, "", false},
      {Language::Java, {".java"}, {"\"", "\"\"\"", "'"}, {{"//", "\n"}, {"/*", "*/"}}, "$",
       true},
  }};
  for (const auto& p : profiles)
    if (p.language == lang) return p;
  return profiles[0];
}

const LanguageProfile* profile_for_path(std::string_view path) {
  const auto lang = language_for_path(path);
  return lang ? &profile(*lang) : nullptr;
}

std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::StringLiteral: return "StringLiteral";
    case TokenKind::Identifier: return "Identifier";
    case TokenKind::Comment: return "Comment";
    case TokenKind::NumberArray: return "NumberArray";
    case TokenKind::TryBlock: return "TryBlock";
    case TokenKind::CatchBlock: return "CatchBlock";
    case TokenKind::ImportStmt: return "ImportStmt";
    case TokenKind::Assignment: return "Assignment";
    case TokenKind::Other: return "Other";
  }
  return "Other";
}

SourceSpan to_source_span(std::string_view path, const Span& span) {
  SourceSpan s;
  s.path = std::string(path);
  s.line_start = span.line_start;
  s.line_end = span.line_end;
  s.byte_start = span.byte_start;
  s.byte_end = span.byte_end;
  return s;
}

TokenStream tokenize(std::string_view path, std::string_view bytes, const LanguageProfile& prof) {
  TokenStream ts;
  ts.path = std::string(path);
  ts.language = prof.language;
  if (bytes.substr(0, 4096).find('\0') != std::string_view::npos) {
    ts.binary = true;
    ts.notes.push_back("binary file: NUL byte in first 4 KiB, not tokenized");
    return ts;
  }
  {
    std::string probe(bytes);
    if (text::sanitize_utf8(probe)) ts.notes.push_back("invalid UTF-8 sequences present");
  }
  Lexer(bytes, prof, ts).run();
  assign_lines(ts, bytes);
  merge_imports(ts, bytes);
  assignment_targets(ts, bytes);
  return ts;
}

std::size_t matching_close(const std::vector<Token>& tokens, std::size_t open) {
  if (open >= tokens.size() || tokens[open].kind != TokenKind::Other) return tokens.size();
  const std::string_view o = tokens[open].text;
  const std::string_view c = o == "(" ? ")" : o == "[" ? "]" : o == "{" ? "}" : "";
  if (c.empty()) return tokens.size();
  int level = 0;
  for (std::size_t k = open; k < tokens.size(); ++k) {
    if (tokens[k].kind != TokenKind::Other) continue;
    if (tokens[k].text == o) ++level;
    if (tokens[k].text == c && --level == 0) return k;
  }
  return tokens.size();
}

}  // namespace depsentry::lex
