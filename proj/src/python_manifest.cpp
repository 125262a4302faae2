#include <algorithm>
#include <set>

#include "depsentry/manifest.hpp"
#include "depsentry/text.hpp"
#include "depsentry/toml.hpp"
#include "manifest_internal.hpp"

namespace depsentry {

namespace {

using lex::Token;
using lex::TokenKind;

const std::set<std::string, std::less<>> kStandardBackends = {
    "setuptools.build_meta", "setuptools.build_meta:__legacy__", "hatchling.build",
    "flit_core.buildapi",    "poetry.core.masonry.api",          "pdm.backend",
    "pdm.pep517.api",        "maturin",                          "mesonpy",
    "scikit_build_core.build", "flit.buildapi",                   "poetry.masonry.api"};

const std::set<std::string, std::less<>> kCompoundHeads = {"if", "elif", "else", "try", "except",
                                                           "finally", "with", "for", "while", "async"};

std::size_t next_sig(const std::vector<Token>& toks, std::size_t i) {
  ++i;
  while (i < toks.size() && toks[i].kind == TokenKind::Comment) ++i;
  return i;
}

bool is_number(const Token& t) {
  if (t.kind != TokenKind::Other || t.text.empty()) return false;
  const unsigned char c = static_cast<unsigned char>(t.text[0]);
  return std::isdigit(c) || (c == '.' && t.text.size() > 1 && std::isdigit(static_cast<unsigned char>(t.text[1])));
}

bool is_literal_token(const Token& t) {
  if (t.kind == TokenKind::Comment || t.kind == TokenKind::NumberArray) return true;
  if (t.kind == TokenKind::StringLiteral) return t.interpolations.empty();
  if (is_number(t)) return true;
  static const std::set<std::string, std::less<>> ok = {"(", ")", "[", "]", "{", "}", ",", ":",
                                                        "-", "+", "True", "False", "None", "\\"};
  return (t.kind == TokenKind::Other || t.kind == TokenKind::Identifier) && ok.count(t.text);
}

bool has_call(const std::vector<Token>& toks, std::size_t first, std::size_t last) {
  for (std::size_t i = first; i < last; ++i) {
    if (toks[i].kind != TokenKind::Identifier) continue;
    const std::size_t n = next_sig(toks, i);
    if (n < last && toks[n].is_punct("(")) return true;
  }
  return false;
}

/// `setup(...)`, `setuptools.setup(...)` spanning the whole statement.
bool is_setup_call(const std::vector<Token>& toks, std::size_t first, std::size_t last) {
  std::size_t i = first;
  while (i + 1 < last && toks[i].kind == TokenKind::Identifier && toks[i + 1].is_punct(".")) i += 2;
  if (i >= last || toks[i].kind != TokenKind::Identifier || toks[i].text != "setup") return false;
  const std::size_t open = next_sig(toks, i);
  if (open >= last || !toks[open].is_punct("(")) return false;
  return lex::matching_close(toks, open) + 1 >= last;
}

bool is_literal_assignment(const std::vector<Token>& toks, std::size_t first, std::size_t last) {
  std::size_t eq = last;
  for (std::size_t i = first; i < last; ++i) {
    if (toks[i].kind == TokenKind::Assignment && toks[i].nesting == toks[first].nesting) {
      eq = i;
      break;
    }
  }
  if (eq == last || (toks[eq].text != "=" && toks[eq].text != ":")) return false;
  for (std::size_t i = first; i < eq; ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Comment) continue;
    if (t.kind != TokenKind::Identifier && !t.is_punct(",") && !t.is_punct("(") && !t.is_punct(")") &&
        !t.is_punct("[") && !t.is_punct("]"))
      return false;
  }
  for (std::size_t i = eq + 1; i < last; ++i)
    if (!is_literal_token(toks[i]) && toks[i].kind != TokenKind::Assignment) return false;
  return true;
}

std::string chain_text(const std::vector<Token>& toks, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (toks[i].kind == TokenKind::Comment) continue;
    out += toks[i].text;
  }
  return out;
}

bool assigns_here(const Token& t) {
  return (t.kind == TokenKind::Assignment || t.kind == TokenKind::Other) && (t.text == "=" || t.text == ":");
}

void collect_cmdclass(const std::vector<Token>& toks, std::size_t key, std::string_view path,
                      std::string_view src, SetupFacts& out) {
  const std::size_t op = next_sig(toks, key);
  if (op >= toks.size() || !assigns_here(toks[op])) return;
  const std::size_t v = next_sig(toks, op);
  if (v >= toks.size()) return;
  auto add = [&](std::string command, std::string symbol, std::size_t close) {
    CmdclassOverride o;
    o.command = std::move(command);
    o.symbol = std::move(symbol);
    o.at = detail::locate_tokens(path, src, toks[key], toks[close], "cmdclass");
    out.cmdclass_overrides.push_back(std::move(o));
  };
  if (toks[v].is_punct("{")) {
    const std::size_t close = lex::matching_close(toks, v);
    if (close >= toks.size()) return;
    const int inner = toks[v].nesting + 1;
    std::size_t i = next_sig(toks, v);
    while (i < close) {
      if (toks[i].kind != TokenKind::StringLiteral || toks[i].nesting != inner) {
        out.notes.push_back("cmdclass entry with a non-literal key");
        break;
      }
      const std::string command = toks[i].text;
      const std::size_t colon = next_sig(toks, i);
      if (colon >= close || !assigns_here(toks[colon])) break;
      std::size_t e = next_sig(toks, colon);
      const std::size_t s = e;
      while (e < close && !(toks[e].is_punct(",") && toks[e].nesting == inner)) ++e;
      add(command, chain_text(toks, s, e), close);
      i = e < close ? next_sig(toks, e) : close;
    }
    return;
  }
  if (toks[v].kind == TokenKind::Identifier && toks[v].text == "dict") {
    const std::size_t open = next_sig(toks, v);
    if (open >= toks.size() || !toks[open].is_punct("(")) return;
    const std::size_t close = lex::matching_close(toks, open);
    if (close >= toks.size()) return;
    const int inner = toks[open].nesting + 1;
    for (std::size_t i = next_sig(toks, open); i < close;) {
      const std::size_t eq = next_sig(toks, i);
      if (toks[i].kind != TokenKind::Identifier || eq >= close || toks[eq].text != "=") break;
      std::size_t e = next_sig(toks, eq);
      const std::size_t s = e;
      while (e < close && !(toks[e].is_punct(",") && toks[e].nesting == inner)) ++e;
      add(toks[i].text, chain_text(toks, s, e), close);
      i = e < close ? next_sig(toks, e) : close;
    }
    return;
  }
  out.notes.push_back("cmdclass assigned from a non-literal expression");
}

bool imports_command_class(const Token& t) {
  if (t.kind != TokenKind::ImportStmt) return false;
  for (const auto& m : text::split(t.detail, ',')) {
    const std::string mod = text::trim(m);
    for (std::string_view base : {"setuptools.command", "distutils.command", "distutils.core.command"}) {
      if (mod == base || mod.starts_with(std::string(base) + ".")) return true;
    }
  }
  return false;
}

std::vector<std::string> string_list_after(const std::vector<Token>& toks, std::string_view name) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!(toks[i].kind == TokenKind::Identifier || toks[i].kind == TokenKind::StringLiteral) ||
        toks[i].text != name)
      continue;
    const std::size_t op = next_sig(toks, i);
    if (op >= toks.size() || !assigns_here(toks[op])) continue;
    const std::size_t v = next_sig(toks, op);
    if (v >= toks.size() || !(toks[v].is_punct("[") || toks[v].is_punct("("))) continue;
    const std::size_t close = lex::matching_close(toks, v);
    for (std::size_t k = v + 1; k < close && k < toks.size(); ++k)
      if (toks[k].kind == TokenKind::StringLiteral && toks[k].nesting == toks[v].nesting + 1)
        out.push_back(toks[k].text);
  }
  return out;
}

std::optional<std::string> setup_kwarg(const std::vector<Token>& toks, std::string_view name) {
  for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::Identifier || toks[i].text != name || toks[i].nesting == 0) continue;
    const std::size_t op = next_sig(toks, i);
    if (op >= toks.size() || toks[op].text != "=") continue;
    const std::size_t v = next_sig(toks, op);
    if (v < toks.size() && toks[v].kind == TokenKind::StringLiteral) return toks[v].text;
  }
  return std::nullopt;
}

/// "Key: value" header lines of PKG-INFO / METADATA, up to the first blank line.
std::vector<std::pair<std::string, std::string>> rfc822_headers(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& raw : text::split(text, '\n')) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) break;
    if (line[0] == ' ' || line[0] == '\t') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    out.emplace_back(line.substr(0, colon), text::trim(line.substr(colon + 1)));
  }
  return out;
}

std::optional<std::string> metadata_file(const PackageSnapshot& snap) {
  auto dist = detail::files_where(snap, [](std::string_view rel) {
    return text::basename(rel) == "METADATA" && text::dirname(rel).ends_with(".dist-info") &&
           text::path_depth(rel) == 1;
  });
  if (!dist.empty()) return dist.front();
  if (snap.find(snap.root + "PKG-INFO")) return snap.root + "PKG-INFO";
  return std::nullopt;
}

}  // namespace

DeclaredDependency parse_requirement(std::string_view requirement) {
  std::string r = text::trim(requirement.substr(0, requirement.find(';')));
  DeclaredDependency d;
  std::size_t i = 0;
  while (i < r.size() && (std::isalnum(static_cast<unsigned char>(r[i])) || r[i] == '-' || r[i] == '_' || r[i] == '.'))
    ++i;
  d.name = r.substr(0, i);
  std::string rest = text::trim(std::string_view(r).substr(i));
  if (rest.starts_with('[')) {
    const auto close = rest.find(']');
    rest = close == std::string::npos ? "" : text::trim(std::string_view(rest).substr(close + 1));
  }
  if (rest.starts_with('(') && rest.ends_with(')')) rest = text::trim(std::string_view(rest).substr(1, rest.size() - 2));
  d.constraint = rest;
  return d;
}

SetupFacts extract_setup_facts(std::string_view source, std::string_view path) {
  SetupFacts out;
  const lex::TokenStream ts = lex::tokenize(path, source, lex::profile(Language::Python));
  const auto& toks = ts.tokens;
  const auto bodies = lex::find_bodies(ts);
  const auto innermost = lex::innermost_bodies(ts, bodies);
  bool setup_seen = false;
  for (const auto& st : lex::python_statements(ts)) {
    std::size_t first = st.first;
    std::size_t last = st.last;
    while (last > first && toks[last - 1].kind == TokenKind::Comment) --last;
    if (first >= last) continue;
    const Token& head = toks[first];
    if (lex::enclosing_callable(bodies, innermost[first]) != -1) continue;
    if (head.text == "def" || head.text == "class" || head.is_punct("@")) continue;
    if (head.kind == TokenKind::ImportStmt && last == first + 1) {
      out.imports_install_command = out.imports_install_command || imports_command_class(head);
      continue;
    }
    bool all_strings = true;
    for (std::size_t i = first; i < last; ++i)
      all_strings = all_strings && (toks[i].kind == TokenKind::StringLiteral || toks[i].kind == TokenKind::Comment);
    if (all_strings) continue;
    if (last == first + 1 && (head.text == "pass" || head.text == "...")) continue;
    if (is_setup_call(toks, first, last)) {
      setup_seen = true;
      continue;
    }
    if (is_literal_assignment(toks, first, last)) continue;
    const bool compound = kCompoundHeads.count(head.text) || head.kind == TokenKind::TryBlock ||
                          head.kind == TokenKind::CatchBlock;
    if (compound && toks[last - 1].is_punct(":") && !has_call(toks, first, last)) continue;
    out.top_level_statements.push_back(detail::locate_tokens(path, source, head, toks[last - 1]));
  }
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind == TokenKind::ImportStmt && imports_command_class(toks[i])) out.imports_install_command = true;
    if ((toks[i].kind == TokenKind::Identifier || toks[i].kind == TokenKind::StringLiteral) &&
        toks[i].text == "cmdclass")
      collect_cmdclass(toks, i, path, source, out);
    if (toks[i].kind == TokenKind::Identifier && toks[i].text == "setup" && i + 1 < toks.size() &&
        toks[i + 1].is_punct("("))
      setup_seen = true;
  }
  if (!setup_seen) out.notes.push_back(std::string(path) + ": no setup() call recognized");
  return out;
}

namespace detail {

void python_facts(const PackageSnapshot& snap, ManifestFacts& facts) {
  const bool wheel = !files_where(snap, [](std::string_view rel) {
                        return text::dirname(rel).ends_with(".dist-info") && text::path_depth(rel) == 1;
                      }).empty();
  const std::string setup_path = snap.root + "setup.py";
  const auto setup_src = snap.text(setup_path);
  bool build_input = false;
  if (setup_src && !wheel) {
    build_input = true;
    const std::string_view first_line = line_at(*setup_src, 0);
    facts.build_script = ScriptRef{setup_path, locate(setup_path, *setup_src, 0, first_line.size())};
    SetupFacts sf = extract_setup_facts(*setup_src, setup_path);
    facts.cmdclass_overrides = sf.cmdclass_overrides;
    for (const auto& n : sf.notes) facts.notes.push_back(n);
    const lex::TokenStream ts = lex::tokenize(setup_path, *setup_src, lex::profile(Language::Python));
    for (const auto& req : string_list_after(ts.tokens, "install_requires"))
      facts.declared_dependencies.push_back(parse_requirement(req));
    facts.setup = std::move(sf);
  }
  const std::string pyproject = snap.root + "pyproject.toml";
  if (const auto src = snap.text(pyproject)) {
    build_input = true;
    try {
      const auto doc = toml::parse(*src);
      if (doc.contains("build-system") && doc["build-system"].contains("build-backend")) {
        const std::string backend = doc["build-system"]["build-backend"].get<std::string>();
        if (!kStandardBackends.count(backend))
          facts.notes.push_back("pyproject.toml: non-standard build-backend \"" + backend + "\"");
      }
      if (facts.declared_dependencies.empty() && doc.contains("project") && doc["project"].contains("dependencies"))
        for (const auto& d : doc["project"]["dependencies"])
          if (d.is_string()) facts.declared_dependencies.push_back(parse_requirement(d.get<std::string>()));
    } catch (const std::exception& e) {
      facts.notes.push_back("ManifestUnparseable: " + pyproject + ": " + e.what());
    }
  }
  if (snap.find(snap.root + "setup.cfg") || snap.find(snap.root + "PKG-INFO")) build_input = true;
  if (wheel) {
    if (const auto meta = metadata_file(snap); meta && facts.declared_dependencies.empty())
      if (const auto t = snap.text(*meta))
        for (const auto& [k, v] : rfc822_headers(*t))
          if (k == "Requires-Dist" && v.find("extra ==") == std::string::npos)
            facts.declared_dependencies.push_back(parse_requirement(v));
  }
  facts.distribution_kind = wheel ? DistributionKind::Prebuilt
                            : build_input ? DistributionKind::Source
                                          : DistributionKind::Unknown;
  for (const auto& p : files_where(snap, [](std::string_view rel) {
         return text::basename(rel) == "__init__.py" && !in_test_tree(rel) &&
                text::dirname(rel).find(".dist-info") == std::string_view::npos;
       }))
    facts.entry_points.push_back(ScriptRef{p, locate(p, snap.text(p).value_or(""), 0, 0)});
}

void python_coordinates(const PackageSnapshot& snap, PackageCoordinates& coords) {
  if (const auto meta = metadata_file(snap)) {
    if (const auto t = snap.text(*meta)) {
      for (const auto& [k, v] : rfc822_headers(*t)) {
        if (k == "Name" && coords.name.empty()) coords.name = v;
        if (k == "Version" && coords.version.empty()) coords.version = v;
      }
    }
  }
  if (const auto src = snap.text(snap.root + "pyproject.toml"); src && (coords.name.empty() || coords.version.empty())) {
    try {
      const auto doc = toml::parse(*src);
      if (doc.contains("project")) {
        if (coords.name.empty()) coords.name = doc["project"].value("name", "");
        if (coords.version.empty() && doc["project"].contains("version") && doc["project"]["version"].is_string())
          coords.version = doc["project"]["version"].get<std::string>();
      }
    } catch (const std::exception&) {
    }
  }
  if (const auto src = snap.text(snap.root + "setup.py"); src && (coords.name.empty() || coords.version.empty())) {
    const auto ts = lex::tokenize("setup.py", *src, lex::profile(Language::Python));
    if (coords.name.empty()) coords.name = setup_kwarg(ts.tokens, "name").value_or("");
    if (coords.version.empty()) coords.version = setup_kwarg(ts.tokens, "version").value_or("");
  }
  if (const auto src = snap.text(snap.root + "setup.cfg"); src && coords.name.empty()) {
    bool in_meta = false;
    for (const auto& line : text::split(*src, '\n')) {
      const std::string t = text::trim(line);
      if (t.starts_with('[')) in_meta = t == "[metadata]";
      const auto eq = t.find('=');
      if (!in_meta || eq == std::string::npos) continue;
      const std::string key = text::trim(std::string_view(t).substr(0, eq));
      const std::string val = text::trim(std::string_view(t).substr(eq + 1));
      if (key == "name" && coords.name.empty()) coords.name = val;
      if (key == "version" && coords.version.empty() && !val.starts_with("attr:")) coords.version = val;
    }
  }
}

}  // namespace detail

}  // namespace depsentry
