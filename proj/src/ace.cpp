#include "depsentry/ace.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "depsentry/manifest.hpp"
#include "depsentry/text.hpp"
#include "manifest_internal.hpp"

namespace depsentry {

namespace {

using lex::Token;
using lex::TokenKind;
using text::split;
using text::trim;

bool is_separator(const Token& t) {
  return t.kind == TokenKind::Other &&
         (t.text == "." || t.text == "::" || t.text == "->" || t.text == "?." || t.text == "?->");
}

std::string fold(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.compare(i, 2, "::") == 0) {
      out += '.';
      ++i;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::size_t opener_of(const std::vector<Token>& toks, std::size_t close) {
  const std::string_view want = toks[close].text == ")" ? "(" : toks[close].text == "]" ? "[" : "{";
  for (std::size_t k = close; k-- > 0;) {
    if (toks[k].nesting == toks[close].nesting && toks[k].is_punct(want)) return k;
    if (toks[k].nesting < toks[close].nesting) break;
  }
  return toks.size();
}

bool is_loader(std::string_view name) {
  return name == "require" || name == "__import__" || name == "import_module" ||
         name == "importlib.import_module";
}

/// `require("x")`-shaped call closing at `close`: the module string, or empty.
std::string loader_module(const std::vector<Token>& toks, std::size_t close) {
  const std::size_t open = opener_of(toks, close);
  if (open >= toks.size() || open == 0 || close != open + 2) return {};
  if (toks[open + 1].kind != TokenKind::StringLiteral) return {};
  const Token& callee = toks[open - 1];
  if (callee.kind != TokenKind::Identifier || !is_loader(callee.text)) return {};
  return toks[open + 1].text;
}

struct Chain {
  std::vector<std::string> segments;
  std::size_t first = 0;
};

/// Dotted chain ending at `end` (an identifier or a loader call's ')'), eliding call groups.
Chain chain_at(const std::vector<Token>& toks, std::size_t end) {
  Chain c;
  std::size_t j = end;
  if (toks[j].kind != TokenKind::Identifier) {
    std::string mod = loader_module(toks, j);
    if (mod.empty()) return c;
    c.segments.push_back(fold(mod));
    c.first = opener_of(toks, j) - 1;
    return c;
  }
  c.segments.push_back(toks[j].text);
  c.first = j;
  while (j >= 2 && is_separator(toks[j - 1])) {
    std::size_t m = j - 2;
    if (toks[m].is_punct(")")) {
      std::string mod = loader_module(toks, m);
      if (!mod.empty()) {
        c.segments.push_back(fold(mod));
        c.first = opener_of(toks, m) - 1;
        break;
      }
      const std::size_t open = opener_of(toks, m);
      if (open >= toks.size() || open == 0) break;
      m = open - 1;
    }
    if (toks[m].kind != TokenKind::Identifier) break;
    c.segments.push_back(toks[m].text);
    c.first = m;
    j = m;
  }
  std::reverse(c.segments.begin(), c.segments.end());
  return c;
}

std::string join_chain(const std::vector<std::string>& segs) {
  std::string out;
  for (const auto& s : segs) {
    if (!out.empty()) out += '.';
    out += s;
  }
  return out;
}

std::string trim_sigil(std::string s) {
  if (!s.empty() && s.front() == '$') s.erase(0, 1);
  return s;
}

using AliasMap = std::map<std::string, std::string>;

void js_import_aliases(const Token& t, AliasMap& aliases) {
  std::string_view text = t.text;
  if (!text.starts_with("import")) return;
  const std::string& mod = t.detail;
  const std::size_t from = text.rfind("from");
  if (from == std::string_view::npos) return;
  std::string_view clause = text.substr(6, from - 6);
  const std::size_t lb = clause.find('{');
  const std::size_t rb = clause.find('}');
  if (lb != std::string_view::npos && rb != std::string_view::npos && rb > lb) {
    for (const auto& raw : split(clause.substr(lb + 1, rb - lb - 1), ',')) {
      std::string entry = trim(raw);
      if (entry.empty()) continue;
      const std::size_t as = entry.find(" as ");
      if (as != std::string::npos)
        aliases[trim(entry.substr(as + 4))] = mod + "." + trim(entry.substr(0, as));
      else
        aliases[entry] = mod + "." + entry;
    }
  }
  const std::size_t star = clause.find('*');
  if (star != std::string_view::npos) {
    const std::size_t as = clause.find(" as ", star);
    if (as != std::string_view::npos) {
      std::string name = trim(clause.substr(as + 4));
      name = name.substr(0, name.find_first_of(", {"));
      if (!name.empty()) aliases[name] = mod;
    }
  }
  std::string head = trim(lb != std::string_view::npos ? clause.substr(0, lb) : clause);
  head = trim(head.substr(0, head.find(',')));
  if (head.starts_with("type ")) head = trim(head.substr(5));
  if (!head.empty() && head.find_first_of("*{ ") == std::string::npos) aliases[head] = mod;
}

void import_aliases(const lex::TokenStream& stream, AliasMap& aliases) {
  for (const auto& t : stream.tokens) {
    if (t.kind != TokenKind::ImportStmt) continue;
    switch (stream.language) {
      case Language::Python: {
        const bool from = t.text.starts_with("from");
        for (const auto& p : t.parts) {
          const std::size_t eq = p.find('=');
          const std::string local = eq == std::string::npos ? p : p.substr(0, eq);
          const std::string target = eq == std::string::npos ? p : p.substr(eq + 1);
          if (from)
            aliases[local] = t.detail + "." + target;
          else if (local != target)
            aliases[local] = target;
        }
        break;
      }
      case Language::JavaScript:
        js_import_aliases(t, aliases);
        break;
      case Language::Go:
        if (!t.parts.empty() && t.parts[0] != "_" && t.parts[0] != ".") {
          const std::size_t slash = t.detail.rfind('/');
          aliases[t.parts[0]] = slash == std::string::npos ? t.detail : t.detail.substr(slash + 1);
        }
        break;
      case Language::Rust: {
        const std::string path = fold(t.detail);
        for (const auto& p : t.parts)
          if (path.ends_with("." + p)) aliases[p] = path;
        break;
      }
      default:
        break;
    }
  }
}

/// Aliases from `x = a.b.c` and `{a, b: c} = require("m")` assignments.
void assignment_aliases(const std::vector<Token>& toks, AliasMap& aliases) {
  for (std::size_t a = 0; a < toks.size(); ++a) {
    if (toks[a].kind != TokenKind::Assignment || toks[a].text != "=") continue;
    const std::string& lhs = toks[a].detail;
    std::size_t k = a + 1;
    std::size_t last = toks.size();
    while (k < toks.size() && toks[k].span.line_start == toks[a].span.line_end) {
      if (toks[k].kind == TokenKind::Identifier) {
        last = k++;
      } else if (toks[k].is_punct("(")) {
        const std::size_t close = lex::matching_close(toks, k);
        if (close >= toks.size()) break;
        last = close;
        k = close + 1;
      } else if (is_separator(toks[k])) {
        ++k;
      } else {
        break;
      }
    }
    if (last >= toks.size()) continue;
    if (k < toks.size() && !toks[k].is_punct(";") && !toks[k].is_punct(",") &&
        toks[k].span.line_start == toks[a].span.line_end && toks[k].kind != TokenKind::Comment)
      continue;
    if (toks[last].is_punct(")") && loader_module(toks, last).empty()) continue;
    const Chain c = chain_at(toks, last);
    if (c.segments.empty() || c.first != a + 1) continue;
    const std::string rhs = join_chain(c.segments);
    if (lhs.starts_with("{") && lhs.ends_with("}")) {
      for (const auto& raw : split(std::string_view(lhs).substr(1, lhs.size() - 2), ',')) {
        const std::string entry = trim(raw);
        const std::size_t colon = entry.find(':');
        if (colon == std::string::npos) {
          if (!entry.empty()) aliases[entry] = rhs + "." + entry;
        } else {
          aliases[trim(entry.substr(colon + 1))] = rhs + "." + trim(entry.substr(0, colon));
        }
      }
    } else if (!lhs.empty() && lhs.find_first_of(".[({") == std::string::npos) {
      const std::string name = trim_sigil(lhs);
      if (name != rhs) aliases[name] = rhs;
    }
  }
}

std::string expand(std::string chain, const AliasMap& aliases) {
  for (int round = 0; round < 4; ++round) {
    const std::size_t dot = chain.find('.');
    const std::string head = chain.substr(0, dot);
    const auto it = aliases.find(head);
    if (it == aliases.end()) break;
    std::string next = it->second + (dot == std::string::npos ? "" : chain.substr(dot));
    if (next == chain) break;
    chain = std::move(next);
  }
  return chain;
}

bool package_qualified(std::string_view prefix) {
  for (const auto& seg : split(prefix, '.'))
    if (seg.empty() || !std::islower(static_cast<unsigned char>(seg.front()))) return false;
  return true;
}

bool matches(const ApiPattern& p, std::string_view chain, Language lang) {
  if (chain == p.pattern) return true;
  if (chain.size() <= p.pattern.size()) return false;
  if (!chain.ends_with(p.pattern) || chain[chain.size() - p.pattern.size() - 1] != '.') return false;
  // Java allows an exact name to carry its package ("java.net.Socket").
  return !p.exact || (lang == Language::Java && package_qualified(chain.substr(0, chain.size() - p.pattern.size() - 1)));
}

bool is_definition_site(const lex::TokenStream& stream, std::size_t i, std::size_t close) {
  const auto& toks = stream.tokens;
  if (i > 0) {
    const Token& prev = toks[i - 1];
    if (prev.kind == TokenKind::Other &&
        (prev.text == "def" || prev.text == "function" || prev.text == "fn" || prev.text == "func" ||
         prev.text == "sub"))
      return true;
    if (stream.language == Language::Go && prev.is_punct(")")) {
      const std::size_t open = opener_of(toks, i - 1);
      if (open > 0 && open < toks.size() && toks[open - 1].is(TokenKind::Other, "func")) return true;
    }
  }
  switch (stream.language) {
    case Language::JavaScript:
    case Language::Java:
    case Language::PHP: {
      if (close + 1 >= toks.size()) return false;
      const Token& next = toks[close + 1];
      if (next.is_punct("{")) return !(i > 0 && toks[i - 1].is(TokenKind::Other, "new"));
      return next.is(TokenKind::Other, "throws") || (next.is_punct(":") && stream.language == Language::PHP);
    }
    default:
      return false;
  }
}

}  // namespace

DangerousApiCatalog::DangerousApiCatalog(const Config& config) {
  for (Language l : {Language::JavaScript, Language::Python, Language::Ruby, Language::PHP,
                     Language::Rust, Language::Go, Language::Java})
    patterns_[l] = config.api_patterns(l);
}

bool DangerousApiCatalog::is_dangerous(ApiClass c) {
  return c == ApiClass::ProcessSpawn || c == ApiClass::CodeEval || c == ApiClass::Network ||
         c == ApiClass::FilesystemSensitive;
}

std::vector<ApiCall> DangerousApiCatalog::find_calls(const lex::TokenStream& stream) const {
  std::vector<ApiCall> out;
  const auto& toks = stream.tokens;
  const auto pit = patterns_.find(stream.language);
  if (pit == patterns_.end()) return out;
  const auto& patterns = pit->second;

  AliasMap aliases;
  import_aliases(stream, aliases);
  assignment_aliases(toks, aliases);

  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::StringLiteral && t.detail == "command") {
      out.push_back(ApiCall{i, i, "`", ApiClass::ProcessSpawn, "`", true, i, i});
      continue;
    }
    if (t.kind != TokenKind::Identifier) continue;
    if (i + 1 < toks.size() && is_separator(toks[i + 1]) && i + 2 < toks.size() &&
        toks[i + 2].kind == TokenKind::Identifier) {
      // Not the last segment; only property-style patterns may end here.
      bool any_property = false;
      for (const auto& p : patterns) any_property = any_property || !p.call;
      if (!any_property) continue;
    }

    const Chain c = chain_at(toks, i);
    if (c.segments.empty()) continue;
    std::string raw = join_chain(c.segments);
    raw = trim_sigil(raw);
    const std::string expanded = expand(raw, aliases);

    bool is_call = false;
    std::size_t open = i, close = i;
    if (i + 1 < toks.size() && toks[i + 1].is_punct("(")) {
      is_call = true;
      open = i + 1;
      close = lex::matching_close(toks, open);
      if (close >= toks.size()) close = open;
    } else if (stream.language == Language::Ruby && i + 1 < toks.size() &&
               toks[i + 1].span.line_start == t.span.line_end &&
               (toks[i + 1].kind == TokenKind::StringLiteral ||
                toks[i + 1].kind == TokenKind::Identifier) &&
               !(i > 0 && is_separator(toks[i - 1]) && c.segments.size() == 1)) {
      is_call = true;
      open = i + 1;
      close = open;
      while (close + 1 < toks.size() && toks[close + 1].span.line_start == t.span.line_end &&
             !toks[close + 1].is_punct(";") && toks[close + 1].kind != TokenKind::Comment &&
             !toks[close + 1].is(TokenKind::Other, "if") && !toks[close + 1].is(TokenKind::Other, "unless"))
        ++close;
    }

    const ApiPattern* best = nullptr;
    for (const auto& p : patterns) {
      if (p.call && !is_call) continue;
      if (!matches(p, raw, stream.language) && !matches(p, expanded, stream.language)) continue;
      if (!best || p.pattern.size() > best->pattern.size()) best = &p;
    }
    if (!best) continue;
    if (is_call && is_definition_site(stream, i, close)) continue;
    out.push_back(ApiCall{i, c.first, expanded, best->api_class, best->pattern, is_call, open, close});
  }
  return out;
}

int AnalyzedFile::callable_of(std::size_t token) const {
  if (token >= innermost.size()) return -1;
  return lex::enclosing_callable(bodies, innermost[token]);
}

bool AnalyzedFile::has_dangerous_call() const { return first_dangerous() != nullptr; }

const ApiCall* AnalyzedFile::first_dangerous() const {
  for (const auto& c : calls)
    if (DangerousApiCatalog::is_dangerous(c.api_class)) return &c;
  return nullptr;
}

std::string_view AnalyzedFile::call_text(const ApiCall& call) const {
  const auto& toks = stream.tokens;
  const std::size_t b = toks[call.first].span.byte_start;
  const std::size_t e = toks[std::max(call.args_close, call.token)].span.byte_end;
  return content.substr(b, e - b);
}

SourceSpan AnalyzedFile::call_span(const ApiCall& call) const {
  const auto& toks = stream.tokens;
  const Token& a = toks[call.first];
  const Token& z = toks[std::max(call.args_close, call.token)];
  return lex::to_source_span(path, lex::Span{a.span.byte_start, z.span.byte_end, a.span.line_start,
                                             z.span.line_end});
}

PackageAnalysis::PackageAnalysis(const PackageSnapshot& snapshot, const DangerousApiCatalog& catalog)
    : snap_(snapshot), catalog_(catalog) {}

const AnalyzedFile* PackageAnalysis::file(const std::string& path) {
  if (auto it = cache_.find(path); it != cache_.end()) return it->second.get();
  std::unique_ptr<AnalyzedFile> af;
  const auto* prof = lex::profile_for_path(path);
  const auto text = snap_.text(path);
  if (prof && text) {
    af = std::make_unique<AnalyzedFile>();
    af->path = path;
    af->content = *text;
    af->stream = lex::tokenize(path, *text, *prof);
    if (af->stream.binary) {
      af.reset();
    } else {
      af->bodies = lex::find_bodies(af->stream);
      af->innermost = lex::innermost_bodies(af->stream, af->bodies);
      af->calls = catalog_.find_calls(af->stream);
    }
  }
  return cache_.emplace(path, std::move(af)).first->second.get();
}

std::vector<const AnalyzedFile*> PackageAnalysis::all() {
  std::vector<const AnalyzedFile*> out;
  for (const auto& [path, f] : snap_.files)
    if (const auto* af = file(path)) out.push_back(af);
  return out;
}

namespace {

/// Snapshot paths a hook command names ("node scripts/x.js", "./run.sh").
std::vector<std::string> hook_targets(const PackageSnapshot& snap, std::string_view command) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    std::string w = word;
    word.clear();
    while (!w.empty() && (w.front() == '"' || w.front() == '\'')) w.erase(0, 1);
    while (!w.empty() && (w.back() == '"' || w.back() == '\'')) w.pop_back();
    if (w.starts_with("./")) w.erase(0, 2);
    if (w.empty()) return;
    const std::string p = snap.root + w;
    const auto* f = snap.find(p);
    if (f && !f->symlink && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  };
  for (char ch : command) {
    if (ch == ' ' || ch == '\t' || ch == ';' || ch == '&' || ch == '|' || ch == '(' || ch == ')')
      flush();
    else
      word += ch;
  }
  flush();
  return out;
}

bool command_is_sensitive(std::string_view command) {
  static const std::vector<std::string_view> words = {"curl", "wget", "bash", "sh", "powershell",
                                                      "pwsh", "nc", "ncat", "eval", "base64"};
  std::string w;
  auto check = [&] {
    const bool hit = std::find(words.begin(), words.end(), w) != words.end();
    w.clear();
    return hit;
  };
  for (char ch : command) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
      w += ch;
    } else if (check()) {
      return true;
    }
  }
  return check();
}

Finding from_located(TechniqueId id, const Located& at, std::string message) {
  Finding f = make_finding(id, at.location, at.evidence, std::move(message));
  f.manifest_key = at.manifest_key;
  return f;
}

Finding from_call(TechniqueId id, const AnalyzedFile& af, const ApiCall& call, std::string message) {
  Finding f = make_finding(id, af.call_span(call), af.call_text(call), std::move(message));
  f.properties.emplace_back("api", call.chain);
  f.properties.emplace_back("api_class", std::string(to_string(call.api_class)));
  return f;
}

bool is_test_path(const PackageSnapshot& snap, std::string_view path) {
  std::string_view rel = path;
  if (rel.starts_with(snap.root)) rel.remove_prefix(snap.root.size());
  return detail::in_test_tree(rel);
}

}  // namespace

std::vector<std::string> install_time_carriers(const PackageSnapshot& snap) {
  std::set<std::string> out;
  const auto& facts = snap.facts;
  if (facts.build_script) out.insert(facts.build_script->path);
  for (const auto& e : facts.build_extensions) out.insert(e.path);
  for (const auto& h : facts.install_hooks)
    for (auto& p : hook_targets(snap, h.command)) out.insert(p);
  for (const auto& [path, f] : snap.files) {
    std::string_view rel = path;
    if (!rel.starts_with(snap.root)) continue;
    rel.remove_prefix(snap.root.size());
    if (rel == "setup.py" || (rel.find('/') == std::string_view::npos && rel.ends_with(".gemspec")))
      out.insert(path);
  }
  return {out.begin(), out.end()};
}

std::vector<Finding> detect_install_time(PackageAnalysis& analysis) {
  std::vector<Finding> out;
  const auto& snap = analysis.snapshot();
  const auto& facts = snap.facts;
  const Ecosystem eco = snap.coords.ecosystem;

  for (const auto& hook : facts.install_hooks) {
    const ApiCall* danger = nullptr;
    const AnalyzedFile* carrier = nullptr;
    for (const auto& p : hook_targets(snap, hook.command)) {
      if (const auto* af = analysis.file(p); af && af->first_dangerous()) {
        danger = af->first_dangerous();
        carrier = af;
        break;
      }
    }
    const bool strong = danger || command_is_sensitive(hook.command);
    Finding f = from_located(TechniqueId::I1, hook.at,
                             "install hook \"" + hook.name + "\" runs: " + hook.command);
    f.confidence = strong ? Confidence::Strong : Confidence::Moderate;
    f.severity = strong ? Severity::High : Severity::Medium;
    f.properties.emplace_back("hook", hook.name);
    if (carrier) {
      f.properties.emplace_back("script", carrier->path);
      f.properties.emplace_back("api", danger->chain);
    }
    out.push_back(std::move(f));
  }

  if (eco == Ecosystem::PyPI && facts.build_script && facts.setup) {
    const SetupFacts& setup = *facts.setup;
    const auto* af = analysis.file(facts.build_script->path);
    if (!setup.top_level_statements.empty() || !setup.cmdclass_overrides.empty()) {
      const Located* dangerous_stmt = nullptr;
      const ApiCall* danger = af ? af->first_dangerous() : nullptr;
      if (af) {
        for (const auto& st : setup.top_level_statements) {
          for (const auto& c : af->calls) {
            if (!DangerousApiCatalog::is_dangerous(c.api_class)) continue;
            const auto b = af->stream.tokens[c.token].span.byte_start;
            if (b >= st.location.byte_start && b < st.location.byte_end) {
              dangerous_stmt = &st;
              break;
            }
          }
          if (dangerous_stmt) break;
        }
      }
      Finding f;
      if (dangerous_stmt) {
        f = from_located(TechniqueId::I2, *dangerous_stmt, "setup.py runs code at module level");
      } else if (!setup.cmdclass_overrides.empty()) {
        const auto& o = setup.cmdclass_overrides.front();
        f = from_located(TechniqueId::I2, o.at,
                         "setup.py overrides the \"" + o.command + "\" command with " + o.symbol);
      } else {
        f = from_located(TechniqueId::I2, setup.top_level_statements.front(),
                         "setup.py runs code at module level");
      }
      if (danger) {
        f.confidence = Confidence::Strong;
      } else if (!setup.cmdclass_overrides.empty() || setup.imports_install_command) {
        f.confidence = Confidence::Moderate;
      } else {
        f.confidence = Confidence::Weak;
        f.severity = Severity::Medium;
      }
      f.properties.emplace_back("statements", std::to_string(setup.top_level_statements.size()));
      for (const auto& o : setup.cmdclass_overrides)
        f.properties.emplace_back("cmdclass", o.command + "=" + o.symbol);
      out.push_back(std::move(f));
    }
  }

  if (eco == Ecosystem::Cargo && facts.build_script) {
    const auto& script = *facts.build_script;
    const auto* af = analysis.file(script.path);
    const ApiCall* danger = af ? af->first_dangerous() : nullptr;
    Finding f;
    if (danger) {
      f = from_call(TechniqueId::I2, *af, *danger, "build script " + script.path + " calls " + danger->chain);
      f.confidence = Confidence::Strong;
    } else {
      f = from_located(TechniqueId::I2, script.at, "build script " + script.path + " runs at build time");
    }
    f.properties.emplace_back("script", script.path);
    out.push_back(std::move(f));
  }

  for (const auto& ext : facts.build_extensions) {
    const auto* af = analysis.file(ext.path);
    const ApiCall* danger = af ? af->first_dangerous() : nullptr;
    Finding f = from_located(TechniqueId::I3, ext.at, "build extension " + ext.path + " runs at install time");
    f.confidence = danger ? Confidence::Strong : Confidence::Moderate;
    f.properties.emplace_back("extension", ext.path);
    if (danger) f.properties.emplace_back("api", danger->chain);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Finding> detect_import_side_effects(PackageAnalysis& analysis) {
  std::vector<Finding> out;
  const auto& snap = analysis.snapshot();
  const auto& facts = snap.facts;
  const auto carriers = install_time_carriers(snap);
  auto skipped = [&](const std::string& p) {
    return is_test_path(snap, p) || std::binary_search(carriers.begin(), carriers.end(), p);
  };

  for (const auto& entry : facts.entry_points) {
    if (skipped(entry.path)) continue;
    const auto* af = analysis.file(entry.path);
    if (!af) continue;
    const ApiCall* top = nullptr;
    for (const auto& c : af->calls)
      if (DangerousApiCatalog::is_dangerous(c.api_class) && af->callable_of(c.token) == -1) {
        top = &c;
        break;
      }
    if (af->stream.language == Language::Python) {
      const SetupFacts st = extract_setup_facts(af->content, af->path);
      if (top) {
        Finding f = from_call(TechniqueId::R1, *af, *top, entry.path + " calls " + top->chain + " on import");
        f.confidence = Confidence::Strong;
        out.push_back(std::move(f));
      } else if (!st.top_level_statements.empty()) {
        out.push_back(from_located(TechniqueId::R1, st.top_level_statements.front(),
                                   entry.path + " runs statements on import"));
      }
    } else if (top) {
      Finding f = from_call(TechniqueId::R1, *af, *top, entry.path + " calls " + top->chain + " when loaded");
      f.confidence = Confidence::Strong;
      out.push_back(std::move(f));
    }
  }

  auto dangerous_between = [&](const AnalyzedFile* af, std::uint64_t b, std::uint64_t e) -> const ApiCall* {
    if (!af) return nullptr;
    for (const auto& c : af->calls) {
      const auto at = af->stream.tokens[c.token].span.byte_start;
      if (DangerousApiCatalog::is_dangerous(c.api_class) && at >= b && at < e) return &c;
    }
    return nullptr;
  };

  for (const auto& init : facts.go.init_functions) {
    if (skipped(init.location.path)) continue;
    const auto* af = analysis.file(init.location.path);
    const ApiCall* danger = nullptr;
    if (af) {
      for (const auto& body : af->bodies) {
        if (af->stream.tokens[body.header].span.byte_start != init.location.byte_start) continue;
        danger = dangerous_between(af, body.span.byte_start, body.span.byte_end);
        break;
      }
    }
    Finding f = from_located(TechniqueId::R1, init, "init() in " + init.location.path + " runs on import");
    if (danger) {
      f.confidence = Confidence::Moderate;
      f.properties.emplace_back("api", danger->chain);
    }
    out.push_back(std::move(f));
  }
  for (const auto& [path, at] : facts.go.blank_imports) {
    if (skipped(at.location.path)) continue;
    const std::string first = path.substr(0, path.find('/'));
    if (first.find('.') == std::string::npos) continue;
    Finding f = from_located(TechniqueId::R1, at, "blank import of " + path + " runs its init code");
    f.properties.emplace_back("import", path);
    out.push_back(std::move(f));
  }
  for (const auto& at : facts.go.var_anon_initializers) {
    if (skipped(at.location.path)) continue;
    const auto* danger =
        dangerous_between(analysis.file(at.location.path), at.location.byte_start, at.location.byte_end);
    Finding f = from_located(TechniqueId::R1, at, "package variable initialized by a function call on import");
    if (danger) {
      f.confidence = Confidence::Moderate;
      f.properties.emplace_back("api", danger->chain);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Finding> detect_hot_method_payloads(PackageAnalysis& analysis) {
  std::vector<Finding> out;
  const auto& snap = analysis.snapshot();
  const auto carriers = install_time_carriers(snap);
  for (const auto* af : analysis.all()) {
    if (af->path.find("!/") != std::string::npos) continue;
    if (is_test_path(snap, af->path) || std::binary_search(carriers.begin(), carriers.end(), af->path))
      continue;
    std::set<int> reported;
    for (const auto& c : af->calls) {
      if (!DangerousApiCatalog::is_dangerous(c.api_class)) continue;
      const int b = af->callable_of(c.token);
      if (b < 0 || !reported.insert(b).second) continue;
      const lex::Body& body = af->bodies[static_cast<std::size_t>(b)];
      if (af->stream.language == Language::Go && body.kind == lex::BodyKind::Function &&
          body.name == "init" && body.owner.empty())
        continue;
      const bool ctor = body.kind == lex::BodyKind::Constructor || body.kind == lex::BodyKind::StaticInit ||
                        body.kind == lex::BodyKind::InstanceInit;
      std::string where = body.name.empty() ? std::string("anonymous function") : body.name;
      if (!body.owner.empty()) where = body.owner + "." + where;
      Finding f = from_call(ctor ? TechniqueId::R3 : TechniqueId::R2, *af, c,
                            std::string(ctor ? "constructor " : "method ") + where + " calls " + c.chain);
      f.properties.emplace_back("symbol", where);
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<Finding> detect_build_plugin(const ManifestFacts& facts, const MavenPolicy& policy) {
  std::vector<Finding> out;
  for (const auto& p : facts.plugins) {
    if (std::find(policy.allowlist.begin(), policy.allowlist.end(), p.group) != policy.allowlist.end())
      continue;
    const bool shadows = std::find(policy.well_known_plugins.begin(), policy.well_known_plugins.end(),
                                   p.artifact) != policy.well_known_plugins.end();
    std::string phases;
    for (const auto& ph : p.phases) phases += (phases.empty() ? "" : ", ") + ph;
    std::string msg = "build plugin " + p.group + ":" + p.artifact + " from a third-party group";
    if (!phases.empty()) msg += " runs in phase(s) " + phases;
    if (shadows) msg += "; its artifactId shadows a well-known plugin";
    Finding f = from_located(TechniqueId::R4, p.at, std::move(msg));
    f.confidence = shadows ? Confidence::Strong : Confidence::Weak;
    f.properties.emplace_back("plugin", p.group + ":" + p.artifact);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Finding> detect_ace(PackageAnalysis& analysis, const MavenPolicy& policy) {
  std::vector<Finding> all = detect_install_time(analysis);
  for (auto& f : detect_import_side_effects(analysis)) all.push_back(std::move(f));
  for (auto& f : detect_hot_method_payloads(analysis)) all.push_back(std::move(f));
  for (auto& f : detect_build_plugin(analysis.snapshot().facts, policy)) all.push_back(std::move(f));
  const Ecosystem eco = analysis.snapshot().coords.ecosystem;
  std::erase_if(all, [&](const Finding& f) { return !applicability(eco, f.id); });
  return all;
}

}  // namespace depsentry
