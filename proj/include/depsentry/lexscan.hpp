#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "depsentry/language.hpp"
#include "depsentry/model.hpp"

namespace depsentry::lex {

struct LanguageProfile {
  Language language;
  std::vector<std::string_view> extensions;
  std::vector<std::string_view> string_delimiters;
  /// (open, close) pairs; a close of "\n" marks a line comment.
  std::vector<std::pair<std::string_view, std::string_view>> comment_styles;
  /// Extra identifier characters beyond [A-Za-z0-9_] and non-ASCII bytes.
  std::string_view identifier_extra;
  bool has_try_catch;
};

const LanguageProfile& profile(Language lang);
/// Profile chosen by the fixed extension table, or nullptr when no profile covers the path.
const LanguageProfile* profile_for_path(std::string_view path);

enum class TokenKind {
  StringLiteral,
  Identifier,
  Comment,
  NumberArray,
  TryBlock,
  CatchBlock,
  ImportStmt,
  Assignment,
  Other,
};

std::string_view to_string(TokenKind k);

struct Span {
  std::uint64_t byte_start = 0;
  std::uint64_t byte_end = 0;
  std::uint32_t line_start = 1;
  std::uint32_t line_end = 1;

  friend bool operator==(const Span&, const Span&) = default;
};

SourceSpan to_source_span(std::string_view path, const Span& span);

struct Token {
  TokenKind kind = TokenKind::Other;
  Span span;
  /// Decoded value for StringLiteral, raw source text otherwise.
  std::string text;
  /// Assignment: target text ("builtins.print"). ImportStmt: imported module(s), comma
  /// separated. StringLiteral: "command" for shell-executing literals (backticks, %x).
  std::string detail;
  /// ImportStmt: local names the statement binds (Go: the alias, "_" for blank imports).
  /// Python renames read "alias=name".
  std::vector<std::string> parts;
  /// NumberArray element values.
  std::vector<std::int64_t> values;
  /// Interpolated sub-spans inside StringLiteral (template literals, "#{}" and friends).
  std::vector<Span> interpolations;
  /// Enclosing bracket depth; an opener and its closer share the same value.
  int nesting = 0;
  /// 0-based byte column of the first byte.
  std::uint32_t column = 0;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return kind == TokenKind::Other && text == t; }
};

struct TokenStream {
  std::string path;
  Language language = Language::JavaScript;
  std::vector<Token> tokens;
  std::vector<std::string> notes;
  bool binary = false;
};

/// Total, deterministic tokenization. Binary content (NUL in the first 4 KiB) yields no
/// tokens and a note.
TokenStream tokenize(std::string_view path, std::string_view bytes, const LanguageProfile& prof);

struct CatchShape {
  Span try_span;
  Span catch_span;
  Span try_body;
  Span catch_body;
  bool catch_body_is_empty = false;
  /// Token index ranges [first, last) of the try and catch bodies.
  std::size_t try_first = 0, try_last = 0;
  std::size_t catch_first = 0, catch_last = 0;
};

struct CatchShapes {
  std::vector<CatchShape> shapes;
  std::vector<std::string> notes;
};

CatchShapes catch_shapes(const TokenStream& stream);

enum class BodyKind { Function, Method, Constructor, StaticInit, InstanceInit, Class, Anonymous };

std::string_view to_string(BodyKind k);

struct Body {
  BodyKind kind = BodyKind::Function;
  std::string name;
  /// Enclosing class / impl / receiver type, when known.
  std::string owner;
  /// Header start to body end.
  Span span;
  /// Token index where the header starts.
  std::size_t header = 0;
  /// Token index range [first, last) of the body contents.
  std::size_t first = 0, last = 0;
  int parent = -1;
};

/// Function, method, constructor, initializer and class bodies, ordered by start.
std::vector<Body> find_bodies(const TokenStream& stream);

/// For each token, the index of the innermost body containing it, or -1.
std::vector<int> innermost_bodies(const TokenStream& stream, const std::vector<Body>& bodies);

/// Nearest enclosing body that executes code when called (function-like), skipping class
/// bodies; -1 when the token runs at module level.
int enclosing_callable(const std::vector<Body>& bodies, int innermost);

/// One simple statement: token index range [first, last), comments excluded.
struct Statement {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Python simple statements split on logical lines and ';' at bracket depth 0.
std::vector<Statement> python_statements(const TokenStream& stream);

/// Index of the bracket matching the opener at `open`, or tokens.size().
std::size_t matching_close(const std::vector<Token>& tokens, std::size_t open);

}  // namespace depsentry::lex
