#include <algorithm>
#include <optional>
#include <unordered_set>

#include "depsentry/lexscan.hpp"
#include "depsentry/text.hpp"

namespace depsentry::lex {

namespace {

using Words = std::unordered_set<std::string_view>;

std::size_t prev_sig(const std::vector<Token>& toks, std::size_t i) {
  while (i > 0) {
    --i;
    if (toks[i].kind != TokenKind::Comment) return i;
  }
  return toks.size();
}

std::size_t next_sig(const std::vector<Token>& toks, std::size_t i) {
  ++i;
  while (i < toks.size() && toks[i].kind == TokenKind::Comment) ++i;
  return i;
}

std::size_t match_open(const std::vector<Token>& toks, std::size_t close) {
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

/// First significant token of a physical line.
bool line_head(const std::vector<Token>& toks, std::size_t i) {
  const std::size_t p = prev_sig(toks, i);
  if (p == toks.size()) return true;
  return toks[p].span.line_end < toks[i].span.line_start && !toks[p].is_punct("\\");
}

/// Python: head of a logical line (bracket depth 0, no backslash continuation).
bool py_line_head(const std::vector<Token>& toks, std::size_t i) {
  return toks[i].kind != TokenKind::Comment && toks[i].nesting == 0 && line_head(toks, i);
}

Span join_spans(const Span& a, const Span& b) {
  Span s;
  s.byte_start = a.byte_start;
  s.line_start = a.line_start;
  s.byte_end = b.byte_end;
  s.line_end = b.line_end;
  return s;
}

Span range_span(const std::vector<Token>& toks, std::size_t first, std::size_t last,
                const Span& fallback) {
  if (first >= last || first >= toks.size()) {
    Span s = fallback;
    s.byte_start = s.byte_end;
    s.line_start = s.line_end;
    return s;
  }
  return join_spans(toks[first].span, toks[last - 1].span);
}

// ---- Python ----

std::vector<Body> python_bodies(const TokenStream& ts) {
  const auto& toks = ts.tokens;
  std::vector<Body> bodies;
  struct Open {
    int body;
    std::uint32_t col;
  };
  std::vector<Open> stack;
  auto close_to = [&](std::size_t i, std::uint32_t col) {
    while (!stack.empty() && col <= stack.back().col) {
      Body& b = bodies[stack.back().body];
      b.last = std::max(b.first, i);
      std::size_t end = b.last;
      while (end > b.first && toks[end - 1].kind == TokenKind::Comment) --end;
      b.span = join_spans(toks[b.header].span, toks[end > b.first ? end - 1 : b.header].span);
      stack.pop_back();
    }
  };
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Comment) continue;
    if (py_line_head(toks, i)) close_to(i, t.column);
    if (!(t.is_punct("def") || t.is(TokenKind::Other, "def") || t.is(TokenKind::Other, "class")))
      continue;
    std::size_t head = i;
    const std::size_t p = prev_sig(toks, i);
    if (p < toks.size() && toks[p].is(TokenKind::Other, "async")) head = p;
    if (!py_line_head(toks, head) && !(head > 0 && p < toks.size() && toks[p].is_punct(";")))
      continue;
    const std::size_t name_idx = next_sig(toks, i);
    if (name_idx >= toks.size() || toks[name_idx].kind != TokenKind::Identifier) continue;
    std::size_t colon = name_idx + 1;
    while (colon < toks.size() && !(toks[colon].is_punct(":") && toks[colon].nesting == t.nesting))
      ++colon;
    if (colon >= toks.size()) continue;
    Body b;
    b.name = toks[name_idx].text;
    b.header = head;
    b.first = colon + 1;
    b.last = toks.size();
    b.parent = stack.empty() ? -1 : stack.back().body;
    const Body* parent = b.parent >= 0 ? &bodies[b.parent] : nullptr;
    if (t.text == "class") {
      b.kind = BodyKind::Class;
    } else if (parent && parent->kind == BodyKind::Class) {
      b.owner = parent->name;
      b.kind = (b.name == "__init__" || b.name == "__new__") ? BodyKind::Constructor
                                                              : BodyKind::Method;
    } else {
      b.kind = BodyKind::Function;
    }
    b.span = toks[head].span;
    bodies.push_back(std::move(b));
    stack.push_back({static_cast<int>(bodies.size() - 1), toks[head].column});
  }
  close_to(toks.size(), 0);
  return bodies;
}

// ---- Ruby ----

struct RubyBlock {
  std::size_t opener = 0;
  std::size_t end = 0;
  std::string word;
  std::vector<std::size_t> clauses;  // rescue / else / ensure at this level
};

struct RubyStructure {
  std::vector<Body> bodies;
  std::vector<RubyBlock> blocks;
};

bool ruby_value_context(const Token& p) {
  static const Words words = {"(",  ",",   "[",     "{",    "||",   "&&",  "return", "then",
                              "else", "do", "begin", "!",   "and",  "or",  "not",    "<<",
                              "?",  ":",   "=>",    "|",    "when", "in",  "elsif",  "unless",
                              "if", "while", "until", "puts", "yield"};
  if (p.kind == TokenKind::Assignment) return true;
  if (p.kind == TokenKind::TryBlock || p.kind == TokenKind::CatchBlock) return true;
  return p.kind == TokenKind::Other && words.count(p.text) > 0;
}

RubyStructure ruby_structure(const TokenStream& ts) {
  const auto& toks = ts.tokens;
  RubyStructure rs;
  struct Open {
    std::string word;
    std::size_t token;
    int body;
    int block;
  };
  std::vector<Open> stack;
  static const Words openers = {"class", "module", "def",    "do",    "case",
                                "if",    "unless", "while",  "until", "for"};
  static const Words modifiable = {"if", "unless", "while", "until"};
  auto owner_class = [&]() -> std::string {
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      if (it->body >= 0 && rs.bodies[it->body].kind == BodyKind::Class)
        return rs.bodies[it->body].name;
    }
    return {};
  };
  auto close_top = [&](std::size_t i) {
    const Open o = stack.back();
    stack.pop_back();
    if (o.body >= 0) {
      Body& b = rs.bodies[o.body];
      b.last = i;
      b.span = join_spans(toks[b.header].span, toks[std::min(i, toks.size() - 1)].span);
    }
    if (o.block >= 0) rs.blocks[o.block].end = i;
  };
  auto push = [&](std::string word, std::size_t i, std::optional<Body> body) {
    int bi = -1;
    if (body) {
      body->parent = -1;
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        if (it->body >= 0) {
          body->parent = it->body;
          break;
        }
      }
      rs.bodies.push_back(std::move(*body));
      bi = static_cast<int>(rs.bodies.size() - 1);
    }
    int blk = -1;
    if (word != "{") {
      rs.blocks.push_back({i, toks.size(), word, {}});
      blk = static_cast<int>(rs.blocks.size() - 1);
    }
    stack.push_back({std::move(word), i, bi, blk});
  };
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Comment) continue;
    const std::size_t p = prev_sig(toks, i);
    const bool head = line_head(toks, i) || (p < toks.size() && toks[p].is_punct(";"));
    if (t.kind == TokenKind::TryBlock) {
      push("begin", i, std::nullopt);
      continue;
    }
    if (t.kind == TokenKind::CatchBlock || t.is(TokenKind::Other, "else") ||
        t.is(TokenKind::Other, "ensure")) {
      if (head && !stack.empty() && stack.back().block >= 0) {
        const std::string& w = stack.back().word;
        if (w == "begin" || w == "def" || w == "do" || t.kind == TokenKind::CatchBlock)
          rs.blocks[stack.back().block].clauses.push_back(i);
      }
      continue;
    }
    if (t.is_punct("{")) {
      std::optional<Body> body;
      const std::size_t n = next_sig(toks, i);
      if (n < toks.size() && (toks[n].is_punct("|") || toks[n].is_punct("||"))) {
        Body b;
        b.kind = BodyKind::Anonymous;
        b.header = i;
        b.first = i + 1;
        b.span = t.span;
        b.owner = owner_class();
        body = std::move(b);
      }
      push("{", i, std::move(body));
      continue;
    }
    if (t.is_punct("}")) {
      while (!stack.empty()) {
        const bool brace = stack.back().word == "{";
        close_top(i);
        if (brace) break;
      }
      continue;
    }
    if (t.is(TokenKind::Other, "end")) {
      if (!stack.empty() && stack.back().word != "{") close_top(i);
      continue;
    }
    if (t.kind != TokenKind::Other || !openers.count(t.text)) continue;
    if (modifiable.count(t.text) && !head && !(p < toks.size() && ruby_value_context(toks[p])))
      continue;
    if (t.text == "do" && !stack.empty() &&
        (stack.back().word == "while" || stack.back().word == "until" ||
         stack.back().word == "for") &&
        toks[stack.back().token].span.line_start == t.span.line_start)
      continue;
    std::optional<Body> body;
    if (t.text == "def") {
      std::size_t k = next_sig(toks, i);
      if (k >= toks.size()) continue;
      const std::size_t after = next_sig(toks, k);
      if (after < toks.size() && toks[after].is_punct(".")) k = next_sig(toks, after);
      if (k >= toks.size()) continue;
      std::string name = toks[k].text;
      std::size_t q = next_sig(toks, k);
      if (q < toks.size() && toks[q].kind == TokenKind::Assignment &&
          toks[q].span.byte_start == toks[k].span.byte_end) {
        name += "=";
        q = next_sig(toks, q);
      }
      if (q < toks.size() && toks[q].is_punct("(")) q = next_sig(toks, matching_close(toks, q));
      if (q < toks.size() && toks[q].is(TokenKind::Assignment, "=") &&
          toks[q].span.line_start == t.span.line_start)
        continue;  // endless method definition
      Body b;
      b.name = name;
      b.owner = owner_class();
      b.kind = b.owner.empty() ? BodyKind::Function
               : name == "initialize" ? BodyKind::Constructor
                                      : BodyKind::Method;
      b.header = i;
      b.first = i + 1;
      b.span = t.span;
      body = std::move(b);
    } else if (t.text == "class" || t.text == "module") {
      Body b;
      b.kind = BodyKind::Class;
      b.header = i;
      b.first = i + 1;
      b.span = t.span;
      std::size_t k = next_sig(toks, i);
      if (k < toks.size() && toks[k].is_punct("<<")) {
        b.name = owner_class();
      } else {
        while (k < toks.size() && toks[k].span.line_start == t.span.line_start &&
               (toks[k].kind == TokenKind::Identifier || toks[k].is_punct("::"))) {
          b.name += toks[k].text;
          k = next_sig(toks, k);
        }
      }
      body = std::move(b);
    } else if (t.text == "do") {
      Body b;
      b.kind = BodyKind::Anonymous;
      b.header = i;
      b.first = i + 1;
      b.span = t.span;
      b.owner = owner_class();
      body = std::move(b);
    }
    push(t.text, i, std::move(body));
  }
  while (!stack.empty()) close_top(toks.size());
  for (auto& b : rs.bodies) {
    if (b.last < b.first) b.last = b.first;
  }
  return rs;
}

// ---- brace languages ----

struct Pending {
  BodyKind kind = BodyKind::Function;
  std::string name;
  std::string owner;
  std::size_t header = 0;
  int nesting = 0;
  std::uint32_t line = 0;
  bool anonymous = false;
};

std::string context_name(const std::vector<Token>& toks, std::size_t header) {
  const std::size_t p = prev_sig(toks, header);
  if (p >= toks.size()) return {};
  if (toks[p].kind == TokenKind::Assignment) return toks[p].detail;
  if (toks[p].is_punct(":")) {
    const std::size_t k = prev_sig(toks, p);
    if (k < toks.size() &&
        (toks[k].kind == TokenKind::Identifier || toks[k].kind == TokenKind::StringLiteral))
      return toks[k].text;
  }
  return {};
}

std::vector<Body> brace_bodies(const TokenStream& ts) {
  const auto& toks = ts.tokens;
  const Language lang = ts.language;
  std::vector<Body> bodies;
  struct Frame {
    int body = -1;
  };
  std::vector<Frame> stack;
  std::optional<Pending> pending;
  static const Words control = {"if",    "for",     "while", "switch",       "catch", "with",
                                "foreach", "elseif", "using", "synchronized", "match", "return"};

  auto enclosing_class = [&]() -> const Body* {
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      if (it->body < 0) continue;
      const Body& b = bodies[it->body];
      return b.kind == BodyKind::Class ? &b : nullptr;
    }
    return nullptr;
  };
  auto parent_body = [&]() -> int {
    for (auto it = stack.rbegin(); it != stack.rend(); ++it)
      if (it->body >= 0) return it->body;
    return -1;
  };
  auto next_ident = [&](std::size_t i) -> std::string {
    std::size_t k = next_sig(toks, i);
    if (k < toks.size() && toks[k].is_punct("*")) k = next_sig(toks, k);
    if (k < toks.size() && toks[k].kind == TokenKind::Identifier) return toks[k].text;
    return {};
  };

  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Comment) continue;

    if (pending && lang == Language::Go && t.nesting == pending->nesting &&
        t.span.line_start > pending->line && !t.is_punct("{")) {
      pending.reset();
    }
    if (pending && lang == Language::Go && t.nesting == pending->nesting)
      pending->line = t.span.line_end;

    if (t.kind == TokenKind::Other) {
      const std::string& w = t.text;
      const bool fn_kw = (w == "function" && (lang == Language::JavaScript || lang == Language::PHP)) ||
                         (w == "fn" && lang == Language::Rust) || (w == "func" && lang == Language::Go);
      const bool class_kw =
          ((w == "class") && lang != Language::Rust && lang != Language::Go) ||
          ((w == "interface" || w == "enum") && (lang == Language::Java || lang == Language::PHP)) ||
          (w == "record" && lang == Language::Java) || (w == "trait" && lang == Language::PHP) ||
          ((w == "impl" || w == "trait") && lang == Language::Rust);
      if (fn_kw) {
        Pending p;
        p.header = i;
        p.nesting = t.nesting;
        p.line = t.span.line_end;
        p.kind = BodyKind::Function;
        if (lang == Language::Go) {
          const std::size_t k = next_sig(toks, i);
          if (k < toks.size() && toks[k].is_punct("(")) {
            const std::size_t close = matching_close(toks, k);
            const std::size_t after = close < toks.size() ? next_sig(toks, close) : toks.size();
            const std::size_t paren = after < toks.size() ? next_sig(toks, after) : toks.size();
            if (after < toks.size() && toks[after].kind == TokenKind::Identifier &&
                paren < toks.size() && toks[paren].is_punct("(")) {
              p.name = toks[after].text;
              p.kind = BodyKind::Method;
              for (std::size_t r = k + 1; r < close; ++r)
                if (toks[r].kind == TokenKind::Identifier) p.owner = toks[r].text;
            } else {
              p.anonymous = true;
            }
          } else {
            p.name = next_ident(i);
          }
        } else {
          p.name = next_ident(i);
          if (lang == Language::PHP && !p.name.empty()) {
            const std::size_t k = next_sig(toks, i);
            if (k < toks.size() && toks[k].is_punct("&")) p.name = next_ident(k);
          }
          p.anonymous = p.name.empty();
        }
        if (p.anonymous) p.name = context_name(toks, i);
        pending = std::move(p);
      } else if (class_kw) {
        const std::size_t prev = prev_sig(toks, i);
        Pending p;
        p.kind = BodyKind::Class;
        p.header = i;
        p.nesting = t.nesting;
        p.line = t.span.line_end;
        if (!(prev < toks.size() && toks[prev].is_punct("::"))) {
          p.name = (lang == Language::Rust && w == "impl") ? std::string() : next_ident(i);
          pending = std::move(p);
        }
      } else if (w == ";" && pending && pending->nesting == t.nesting) {
        pending.reset();
      }
    }

    if (t.is_punct("{")) {
      Frame f;
      std::optional<Body> body;
      const std::size_t p = prev_sig(toks, i);
      const Token* prev = p < toks.size() ? &toks[p] : nullptr;
      auto make = [&](BodyKind kind, std::string name, std::size_t header) {
        Body b;
        b.kind = kind;
        b.name = std::move(name);
        b.header = header;
        b.first = i + 1;
        b.span = toks[header].span;
        b.parent = parent_body();
        if (const Body* c = enclosing_class()) b.owner = c->name;
        return b;
      };
      if (pending && pending->nesting == t.nesting) {
        Pending pd = std::move(*pending);
        pending.reset();
        if (pd.kind == BodyKind::Class) {
          if (lang == Language::Rust && toks[pd.header].text == "impl") {
            std::size_t k = next_sig(toks, pd.header);
            std::size_t for_at = toks.size();
            for (std::size_t r = k; r < i; ++r)
              if (toks[r].is(TokenKind::Other, "for")) for_at = r;
            if (for_at < toks.size()) {
              k = next_sig(toks, for_at);
            } else if (k < i && toks[k].is_punct("<")) {
              int level = 0;
              for (; k < i; ++k) {
                if (toks[k].is_punct("<")) ++level;
                if (toks[k].is_punct(">")) --level;
                if (toks[k].is_punct(">>")) level -= 2;
                if (level <= 0) break;
              }
              k = next_sig(toks, k);
            }
            while (k < i && toks[k].kind != TokenKind::Identifier) k = next_sig(toks, k);
            if (k < i) pd.name = toks[k].text;
          }
          body = make(BodyKind::Class, pd.name, pd.header);
        } else {
          Body b = make(pd.kind, pd.name, pd.header);
          if (pd.anonymous) {
            b.kind = BodyKind::Anonymous;
          } else if (lang == Language::Go) {
            if (!pd.owner.empty()) b.owner = pd.owner;
            if (pd.name.rfind("New", 0) == 0) b.kind = BodyKind::Constructor;
          } else if (enclosing_class() != nullptr) {
            const std::string& cls = enclosing_class()->name;
            const bool ctor = (lang == Language::PHP &&
                               (pd.name == "__construct" ||
                                (!cls.empty() && text::to_lower(pd.name) == text::to_lower(cls)))) ||
                              (lang == Language::Rust && pd.name == "new") ||
                              (lang == Language::JavaScript && pd.name == "constructor");
            b.kind = ctor ? BodyKind::Constructor : BodyKind::Method;
          }
          body = std::move(b);
        }
      } else if (prev && (prev->is_punct("=>") ||
                          (prev->is_punct("->") && lang == Language::Java))) {
        std::size_t header = prev_sig(toks, p);
        if (header < toks.size() && toks[header].is_punct(")")) header = match_open(toks, header);
        if (header >= toks.size()) header = p;
        body = make(BodyKind::Anonymous, context_name(toks, header), header);
      } else if (prev && lang == Language::Rust && (prev->is_punct("|") || prev->is_punct("||"))) {
        std::size_t header = p;
        if (prev->is_punct("|")) {
          for (std::size_t r = p; r-- > 0;) {
            if (toks[r].is_punct("|")) {
              header = r;
              break;
            }
          }
        }
        body = make(BodyKind::Anonymous, context_name(toks, header), header);
      } else if (prev) {
        std::size_t q = p;
        if (lang == Language::Java && toks[q].kind == TokenKind::Identifier) {
          std::size_t r = q;
          while (r < toks.size() && (toks[r].kind == TokenKind::Identifier ||
                                     toks[r].is_punct(".") || toks[r].is_punct(",")))
            r = prev_sig(toks, r);
          if (r < toks.size() && toks[r].is(TokenKind::Other, "throws")) q = prev_sig(toks, r);
        }
        const Body* cls = enclosing_class();
        const bool direct_class =
            !stack.empty() && stack.back().body >= 0 && bodies[stack.back().body].kind == BodyKind::Class;
        if (q < toks.size() && toks[q].is_punct(")")) {
          const std::size_t open = match_open(toks, q);
          const std::size_t n = open < toks.size() ? prev_sig(toks, open) : toks.size();
          if (n < toks.size() && toks[n].kind == TokenKind::Identifier && !control.count(toks[n].text)) {
            const std::size_t before = prev_sig(toks, n);
            if (lang == Language::Java && before < toks.size() && toks[before].is(TokenKind::Other, "new")) {
              body = make(BodyKind::Class, toks[n].text, before);
            } else if (direct_class && (lang == Language::Java || lang == Language::JavaScript)) {
              const bool ctor = (lang == Language::Java && cls && toks[n].text == cls->name) ||
                                (lang == Language::JavaScript && toks[n].text == "constructor");
              body = make(ctor ? BodyKind::Constructor : BodyKind::Method, toks[n].text, n);
            } else if (lang == Language::JavaScript && toks[n].span.line_start == t.span.line_start &&
                       before < toks.size() &&
                       (toks[before].is_punct(",") || toks[before].is_punct("{") ||
                        toks[before].is(TokenKind::Other, "async") ||
                        toks[before].is(TokenKind::Identifier, "get") ||
                        toks[before].is(TokenKind::Identifier, "set"))) {
              body = make(BodyKind::Function, toks[n].text, n);
            }
          }
        } else if (direct_class && toks[q].is(TokenKind::Other, "static") &&
                   (lang == Language::Java || lang == Language::JavaScript)) {
          body = make(BodyKind::StaticInit, "static", q);
        } else if (direct_class && lang == Language::Java &&
                   (toks[q].is_punct("{") || toks[q].is_punct("}") || toks[q].is_punct(";"))) {
          body = make(BodyKind::InstanceInit, "instance", i);
        }
      }
      if (body) {
        bodies.push_back(std::move(*body));
        f.body = static_cast<int>(bodies.size() - 1);
      }
      stack.push_back(f);
      continue;
    }
    if (t.is_punct("}")) {
      if (stack.empty()) continue;
      const Frame f = stack.back();
      stack.pop_back();
      if (f.body >= 0) {
        Body& b = bodies[f.body];
        b.last = i;
        b.span = join_spans(toks[b.header].span, t.span);
      }
    }
  }
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.body >= 0) {
      Body& b = bodies[f.body];
      b.last = toks.size();
      b.span = join_spans(toks[b.header].span, toks.back().span);
    }
  }
  return bodies;
}

bool only_filler(const std::vector<Token>& toks, std::size_t first, std::size_t last,
                 Language lang) {
  for (std::size_t k = first; k < last && k < toks.size(); ++k) {
    const Token& t = toks[k];
    if (t.kind == TokenKind::Comment) continue;
    if (lang == Language::Python && (t.is(TokenKind::Other, "pass") || t.is_punct("...")))
      continue;
    if (lang == Language::Ruby && t.is(TokenKind::Other, "nil")) continue;
    if (t.is_punct(";")) continue;
    return false;
  }
  return true;
}

CatchShapes brace_catches(const TokenStream& ts) {
  CatchShapes out;
  const auto& toks = ts.tokens;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::TryBlock) continue;
    std::size_t k = next_sig(toks, i);
    if (k < toks.size() && toks[k].is_punct("(")) k = next_sig(toks, matching_close(toks, k));
    if (k >= toks.size() || !toks[k].is_punct("{")) continue;
    const std::size_t try_close = matching_close(toks, k);
    if (try_close >= toks.size()) continue;
    std::size_t c = next_sig(toks, try_close);
    while (c < toks.size() && toks[c].kind == TokenKind::CatchBlock) {
      std::size_t b = next_sig(toks, c);
      if (b < toks.size() && toks[b].is_punct("(")) b = next_sig(toks, matching_close(toks, b));
      if (b >= toks.size() || !toks[b].is_punct("{")) break;
      const std::size_t cb_close = matching_close(toks, b);
      if (cb_close >= toks.size()) break;
      CatchShape s;
      s.try_span = join_spans(toks[i].span, toks[try_close].span);
      s.catch_span = join_spans(toks[c].span, toks[cb_close].span);
      s.try_first = k + 1;
      s.try_last = try_close;
      s.catch_first = b + 1;
      s.catch_last = cb_close;
      s.try_body = range_span(toks, s.try_first, s.try_last, toks[k].span);
      s.catch_body = range_span(toks, s.catch_first, s.catch_last, toks[b].span);
      s.catch_body_is_empty = only_filler(toks, s.catch_first, s.catch_last, ts.language);
      out.shapes.push_back(s);
      c = next_sig(toks, cb_close);
    }
  }
  return out;
}

// Python suite after the header colon: tokens up to the next logical line at <= col.
std::size_t python_suite_end(const std::vector<Token>& toks, std::size_t from, std::uint32_t col) {
  for (std::size_t k = from; k < toks.size(); ++k) {
    if (toks[k].kind == TokenKind::Comment) continue;
    if (py_line_head(toks, k) && toks[k].column <= col && k > from - 1 &&
        toks[k].span.line_start > toks[from - 1].span.line_end)
      return k;
  }
  return toks.size();
}

std::size_t header_colon(const std::vector<Token>& toks, std::size_t i) {
  for (std::size_t k = i + 1; k < toks.size(); ++k) {
    if (toks[k].is_punct(":") && toks[k].nesting == toks[i].nesting) return k;
    if (py_line_head(toks, k)) return toks.size();
  }
  return toks.size();
}

std::size_t trim_comments(const std::vector<Token>& toks, std::size_t first, std::size_t last) {
  while (last > first && toks[last - 1].kind == TokenKind::Comment) --last;
  return last;
}

CatchShapes python_catches(const TokenStream& ts) {
  CatchShapes out;
  const auto& toks = ts.tokens;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::TryBlock) continue;
    const std::uint32_t col = toks[i].column;
    const std::size_t colon = header_colon(toks, i);
    if (colon >= toks.size()) continue;
    const std::size_t try_end = trim_comments(toks, colon + 1, python_suite_end(toks, colon + 1, col));
    std::size_t c = next_sig(toks, try_end == colon + 1 ? colon : try_end - 1);
    while (c < toks.size() && toks[c].kind == TokenKind::CatchBlock && toks[c].column == col) {
      const std::size_t cc = header_colon(toks, c);
      if (cc >= toks.size()) break;
      const std::size_t end = trim_comments(toks, cc + 1, python_suite_end(toks, cc + 1, col));
      CatchShape s;
      s.try_first = colon + 1;
      s.try_last = try_end;
      s.catch_first = cc + 1;
      s.catch_last = end;
      s.try_body = range_span(toks, s.try_first, s.try_last, toks[colon].span);
      s.catch_body = range_span(toks, s.catch_first, s.catch_last, toks[cc].span);
      s.try_span = join_spans(toks[i].span, try_end > colon + 1 ? toks[try_end - 1].span : toks[colon].span);
      s.catch_span = join_spans(toks[c].span, end > cc + 1 ? toks[end - 1].span : toks[cc].span);
      s.catch_body_is_empty = only_filler(toks, s.catch_first, s.catch_last, ts.language);
      out.shapes.push_back(s);
      c = next_sig(toks, end == cc + 1 ? cc : end - 1);
    }
  }
  return out;
}

CatchShapes ruby_catches(const TokenStream& ts) {
  CatchShapes out;
  const auto& toks = ts.tokens;
  const RubyStructure rs = ruby_structure(ts);
  for (const auto& blk : rs.blocks) {
    std::vector<std::size_t> rescues;
    for (std::size_t c : blk.clauses)
      if (toks[c].kind == TokenKind::CatchBlock) rescues.push_back(c);
    if (rescues.empty()) continue;
    const std::size_t try_first = blk.opener + 1;
    const std::size_t try_last = trim_comments(toks, try_first, rescues.front());
    for (std::size_t r : rescues) {
      std::size_t body = r + 1;
      while (body < toks.size() && toks[body].span.line_start == toks[r].span.line_start &&
             !toks[body].is_punct(";"))
        ++body;
      if (body < toks.size() && toks[body].is_punct(";")) ++body;
      std::size_t end = blk.end;
      for (std::size_t c : blk.clauses)
        if (c > r) {
          end = c;
          break;
        }
      end = std::max(end, body);
      CatchShape s;
      s.try_first = try_first;
      s.try_last = try_last;
      s.catch_first = body;
      s.catch_last = trim_comments(toks, body, std::min(end, toks.size()));
      s.try_span = join_spans(toks[blk.opener].span, toks[try_last > try_first ? try_last - 1 : blk.opener].span);
      const std::size_t catch_tail = s.catch_last > body ? s.catch_last - 1 : (body > r + 1 ? body - 1 : r);
      s.catch_span = join_spans(toks[r].span, toks[catch_tail].span);
      s.try_body = range_span(toks, s.try_first, s.try_last, toks[blk.opener].span);
      s.catch_body = range_span(toks, s.catch_first, s.catch_last, toks[r].span);
      s.catch_body_is_empty = only_filler(toks, s.catch_first, s.catch_last, ts.language);
      out.shapes.push_back(s);
    }
  }
  // Modifier form: `expr rescue fallback`.
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::CatchBlock || line_head(toks, i)) continue;
    const std::size_t p = prev_sig(toks, i);
    if (p < toks.size() && toks[p].is_punct(";")) continue;
    std::size_t first = i;
    while (first > 0 && (toks[first - 1].span.line_end == toks[i].span.line_start) &&
           !toks[first - 1].is_punct(";"))
      --first;
    std::size_t last = i + 1;
    while (last < toks.size() && toks[last].span.line_start == toks[i].span.line_start &&
           !toks[last].is_punct(";"))
      ++last;
    CatchShape s;
    s.try_first = first;
    s.try_last = i;
    s.catch_first = i + 1;
    s.catch_last = last;
    s.try_span = range_span(toks, first, i, toks[i].span);
    s.try_body = s.try_span;
    s.catch_body = range_span(toks, i + 1, last, toks[i].span);
    s.catch_span = join_spans(toks[i].span, last > i + 1 ? toks[last - 1].span : toks[i].span);
    s.catch_body_is_empty = only_filler(toks, i + 1, last, ts.language);
    out.shapes.push_back(s);
  }
  std::sort(out.shapes.begin(), out.shapes.end(), [](const CatchShape& a, const CatchShape& b) {
    return a.catch_span.byte_start < b.catch_span.byte_start;
  });
  return out;
}

}  // namespace

std::string_view to_string(BodyKind k) {
  switch (k) {
    case BodyKind::Function: return "function";
    case BodyKind::Method: return "method";
    case BodyKind::Constructor: return "constructor";
    case BodyKind::StaticInit: return "static-initializer";
    case BodyKind::InstanceInit: return "instance-initializer";
    case BodyKind::Class: return "class";
    case BodyKind::Anonymous: return "anonymous";
  }
  return "function";
}

std::vector<Body> find_bodies(const TokenStream& stream) {
  std::vector<Body> bodies;
  switch (stream.language) {
    case Language::Python: bodies = python_bodies(stream); break;
    case Language::Ruby: bodies = ruby_structure(stream).bodies; break;
    default: bodies = brace_bodies(stream); break;
  }
  // Already ordered by header position; parents precede children.
  return bodies;
}

std::vector<int> innermost_bodies(const TokenStream& stream, const std::vector<Body>& bodies) {
  std::vector<int> owner(stream.tokens.size(), -1);
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const std::size_t last = std::min(bodies[b].last, stream.tokens.size());
    for (std::size_t i = bodies[b].first; i < last; ++i) owner[i] = static_cast<int>(b);
  }
  return owner;
}

int enclosing_callable(const std::vector<Body>& bodies, int innermost) {
  int b = innermost;
  while (b >= 0 && bodies[b].kind == BodyKind::Class) b = bodies[b].parent;
  return b;
}

std::vector<Statement> python_statements(const TokenStream& stream) {
  const auto& toks = stream.tokens;
  std::vector<Statement> out;
  std::optional<std::size_t> start;
  std::size_t last_sig = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Comment) continue;
    if (t.is_punct(";") && t.nesting == 0) {
      if (start) out.push_back({*start, i});
      start.reset();
      continue;
    }
    if (start && py_line_head(toks, i)) {
      out.push_back({*start, last_sig + 1});
      start.reset();
    }
    if (!start) start = i;
    last_sig = i;
  }
  if (start) out.push_back({*start, last_sig + 1});
  return out;
}

CatchShapes catch_shapes(const TokenStream& stream) {
  switch (stream.language) {
    case Language::Rust:
    case Language::Go: {
      CatchShapes out;
      out.notes.push_back(std::string(to_string(stream.language)) +
                          " has no try/catch construct; no catch shapes");
      return out;
    }
    case Language::Python: return python_catches(stream);
    case Language::Ruby: return ruby_catches(stream);
    default: return brace_catches(stream);
  }
}

}  // namespace depsentry::lex
