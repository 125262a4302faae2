#include "depsentry/manifest.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "depsentry/archive.hpp"
#include "depsentry/errors.hpp"
#include "depsentry/text.hpp"
#include "depsentry/toml.hpp"
#include "manifest_internal.hpp"

namespace depsentry {

namespace {

using detail::JsonMember;
using lex::Token;
using lex::TokenKind;
namespace pt = boost::property_tree;

constexpr std::array<std::string_view, 7> kNpmHooks = {
    "pre-install", "install", "post-install", "preprepare", "prepare", "postprepare", "prepublish"};
constexpr std::array<std::string_view, 6> kComposerHooks = {
    "pre-install-cmd",    "post-install-cmd", "pre-autoload-dump",
    "post-autoload-dump", "pre-update-cmd",   "post-update-cmd"};

constexpr std::array<std::string_view, 2> kNpmLocks = {"package-lock.json", "npm-shrinkwrap.json"};
constexpr std::array<std::string_view, 1> kComposerLocks = {"composer.lock"};
constexpr std::array<std::string_view, 1> kGemLocks = {"Gemfile.lock"};
constexpr std::array<std::string_view, 1> kCargoLocks = {"Cargo.lock"};
constexpr std::array<std::string_view, 1> kGoLocks = {"go.sum"};
constexpr std::array<std::string_view, 4> kPyLocks = {"requirements.txt", "poetry.lock", "Pipfile.lock", "pdm.lock"};

constexpr std::string_view kGemMetadata = ".gem/metadata.yaml";

bool in_list(std::span<const std::string_view> list, std::string_view s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

std::size_t next_sig(const std::vector<Token>& toks, std::size_t i) {
  ++i;
  while (i < toks.size() && toks[i].kind == TokenKind::Comment) ++i;
  return i;
}

/// Joins `base` and a manifest-relative path, dropping "./" and resolving "..".
std::optional<std::string> resolve_relative(std::string_view root, std::string_view rel) {
  try {
    const std::string n = archive::normalize_path(std::string(root) + std::string(rel));
    if (n.empty()) return std::nullopt;
    return n;
  } catch (const Error&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------- npm / composer

std::string json_command(const JsonMember& m, std::string_view raw) {
  if (m.string_value) return *m.string_value;
  const auto v = nlohmann::json::parse(raw.substr(m.value_start, m.value_end - m.value_start), nullptr, false);
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v)
      if (e.is_string()) out += (out.empty() ? "" : "; ") + e.get<std::string>();
    return out;
  }
  return std::string(raw.substr(m.value_start, m.value_end - m.value_start));
}

std::string canonical_npm_hook(std::string_view key) {
  if (key == "preinstall") return "pre-install";
  if (key == "postinstall") return "post-install";
  return std::string(key);
}

void json_hooks(const std::string& path, std::string_view raw, const std::vector<JsonMember>& members,
                Ecosystem eco, ManifestFacts& facts) {
  std::vector<std::string> unrecognized;
  for (const auto& m : members) {
    if (m.path.size() != 2 || m.path[0] != "scripts") continue;
    const std::string name = eco == Ecosystem::Npm ? canonical_npm_hook(m.path[1]) : m.path[1];
    if (!in_list(hook_whitelist(eco), name)) {
      unrecognized.push_back(m.path[1]);
      continue;
    }
    InstallHook h;
    h.name = name;
    h.command = json_command(m, raw);
    h.at = detail::locate(path, raw, m.key_start, m.value_end, "scripts." + m.path[1]);
    facts.install_hooks.push_back(std::move(h));
  }
  if (!unrecognized.empty()) {
    std::string list;
    for (const auto& u : unrecognized) list += (list.empty() ? "" : ", ") + u;
    facts.notes.push_back("unrecognized scripts (not install hooks): " + list);
  }
}

std::vector<std::pair<std::string, std::string>> json_string_map(const std::vector<JsonMember>& members,
                                                                 std::string_view section) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& m : members)
    if (m.path.size() == 2 && m.path[0] == section && m.string_value) out.emplace_back(m.path[1], *m.string_value);
  return out;
}

void npm_facts(const PackageSnapshot& snap, ManifestFacts& facts) {
  const std::string path = snap.root + "package.json";
  const auto raw = snap.text(path);
  if (!raw) return;
  const auto lenient = detail::parse_json_lenient(*raw, path);
  for (const auto& n : lenient.notes) facts.notes.push_back(n);
  const auto members = detail::json_members(*raw);
  json_hooks(path, *raw, members, Ecosystem::Npm, facts);

  std::optional<std::string> main;
  Located main_at;
  for (const auto& m : members) {
    if (m.path.size() == 1 && m.path[0] == "main" && m.string_value) {
      main = *m.string_value;
      main_at = detail::locate(path, *raw, m.key_start, m.value_end, "main");
    }
  }
  if (main) {
    std::optional<std::string> found;
    if (const auto base = resolve_relative(snap.root, *main)) {
      for (const std::string& cand : {*base, *base + ".js", *base + ".cjs", *base + ".mjs", *base + "/index.js"}) {
        const SnapshotFile* f = snap.find(cand);
        if (f && !f->symlink) {
          found = cand;
          break;
        }
      }
    }
    if (found) {
      facts.entry_points.push_back(ScriptRef{*found, main_at});
    } else {
      facts.notes.push_back("package.json main \"" + *main + "\" does not name a file in the package");
    }
  } else if (snap.find(snap.root + "index.js")) {
    facts.entry_points.push_back(ScriptRef{snap.root + "index.js", {}});
  }

  for (std::string_view section : {"dependencies", "optionalDependencies"}) {
    for (auto [name, constraint] : json_string_map(members, section)) {
      if (constraint.starts_with("npm:")) {
        const std::string spec = constraint.substr(4);
        const auto at = spec.find('@', spec.starts_with('@') ? 1 : 0);
        name = spec.substr(0, at);
        constraint = at == std::string::npos ? "" : spec.substr(at + 1);
      }
      facts.declared_dependencies.push_back({name, constraint, true});
    }
  }
  facts.distribution_kind = DistributionKind::Source;
}

void composer_facts(const PackageSnapshot& snap, ManifestFacts& facts) {
  const std::string path = snap.root + "composer.json";
  const auto raw = snap.text(path);
  if (!raw) return;
  const auto lenient = detail::parse_json_lenient(*raw, path);
  for (const auto& n : lenient.notes) facts.notes.push_back(n);
  const auto members = detail::json_members(*raw);
  json_hooks(path, *raw, members, Ecosystem::Composer, facts);
  for (const auto& [name, constraint] : json_string_map(members, "require")) {
    if (name == "php" || name.starts_with("ext-") || name.starts_with("lib-") || name == "composer-plugin-api")
      continue;
    facts.declared_dependencies.push_back({name, constraint, true});
  }
  facts.distribution_kind = snap.origin == "zip" ? DistributionKind::Prebuilt : DistributionKind::Source;
}

// ---------------------------------------------------------------- rubygems

/// Offset of the first non-blank byte on the line holding `offset`.
std::size_t line_head(std::string_view src, std::size_t offset) {
  const std::string_view line = detail::line_at(src, offset);
  const std::size_t start = static_cast<std::size_t>(line.data() - src.data());
  std::size_t p = start;
  while (p < src.size() && (src[p] == ' ' || src[p] == '\t')) ++p;
  return p;
}

struct RubyList {
  std::vector<std::string> values;
  std::size_t end = 0;
  bool literal = false;
};

/// String literals of the right-hand side starting at token `v` (array, %w, single string).
RubyList ruby_string_list(const std::vector<Token>& toks, std::size_t v) {
  RubyList out;
  if (v >= toks.size()) return out;
  if (toks[v].is_punct("[")) {
    const std::size_t close = lex::matching_close(toks, v);
    if (close >= toks.size()) return out;
    out.literal = true;
    for (std::size_t k = v + 1; k < close; ++k) {
      if (toks[k].kind == TokenKind::StringLiteral && toks[k].interpolations.empty()) {
        out.values.push_back(toks[k].text);
      } else if (toks[k].kind != TokenKind::Comment && !toks[k].is_punct(",")) {
        out.literal = false;
      }
    }
    out.end = toks[close].span.byte_end;
    return out;
  }
  if (toks[v].kind == TokenKind::StringLiteral) {
    const std::uint32_t line = toks[v].span.line_start;
    std::size_t k = v;
    out.literal = true;
    while (k < toks.size() && toks[k].kind == TokenKind::StringLiteral && toks[k].span.line_start == line) {
      out.values.push_back(toks[k].text);
      out.end = toks[k].span.byte_end;
      ++k;
    }
  }
  return out;
}

bool ruby_target_is(const Token& t, std::string_view attr) {
  return t.detail == attr || t.detail.ends_with("." + std::string(attr));
}

void gemspec_facts(const PackageSnapshot& snap, const std::string& path, std::string_view src,
                   ManifestFacts& facts) {
  const auto ts = lex::tokenize(path, src, lex::profile(Language::Ruby));
  const auto& toks = ts.tokens;
  const std::string dir = std::string(text::dirname(path)).empty() ? "" : std::string(text::dirname(path)) + "/";
  std::optional<std::vector<std::string>> files;
  auto add_extensions = [&](const RubyList& list, std::size_t at_byte) {
    const std::size_t begin = line_head(src, at_byte);
    for (const auto& v : list.values) {
      const auto p = resolve_relative(dir, v);
      if (!p) {
        facts.notes.push_back("gemspec extension path escapes the package: " + v);
        continue;
      }
      facts.build_extensions.push_back(ScriptRef{*p, detail::locate(path, src, begin, list.end, "extensions")});
    }
  };
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Assignment && t.text == "=" && ruby_target_is(t, "extensions")) {
      const RubyList list = ruby_string_list(toks, next_sig(toks, i));
      if (!list.literal) facts.notes.push_back(path + ": extensions assigned from a non-literal expression");
      add_extensions(list, t.span.byte_start);
    } else if (t.kind == TokenKind::Identifier && t.text == "extensions" && i > 0 && toks[i - 1].is_punct(".")) {
      const std::size_t op = next_sig(toks, i);
      if (op < toks.size() && (toks[op].text == "<<" || toks[op].text == "push" || toks[op].text == "concat")) {
        std::size_t v = next_sig(toks, op);
        if (v < toks.size() && toks[v].is_punct("(")) v = next_sig(toks, v);
        const RubyList list = ruby_string_list(toks, v);
        if (list.values.empty()) facts.notes.push_back(path + ": extensions extended with a non-literal expression");
        add_extensions(list, t.span.byte_start);
      }
    } else if (t.kind == TokenKind::Assignment && t.text == "=" && ruby_target_is(t, "files")) {
      const RubyList list = ruby_string_list(toks, next_sig(toks, i));
      if (list.literal) files = list.values;
    } else if (t.kind == TokenKind::Identifier &&
               (t.text == "add_dependency" || t.text == "add_runtime_dependency")) {
      std::size_t v = next_sig(toks, i);
      if (v < toks.size() && toks[v].is_punct("(")) v = next_sig(toks, v);
      if (v >= toks.size() || toks[v].kind != TokenKind::StringLiteral) continue;
      DeclaredDependency d{toks[v].text, "", true};
      for (std::size_t k = next_sig(toks, v); k < toks.size() && toks[k].span.line_start == toks[v].span.line_start;
           k = next_sig(toks, k))
        if (toks[k].kind == TokenKind::StringLiteral) d.constraint += (d.constraint.empty() ? "" : ", ") + toks[k].text;
      facts.declared_dependencies.push_back(std::move(d));
    }
  }
  std::vector<std::string> targets;
  if (files) {
    for (const auto& f : *files)
      if (f.starts_with("lib/") && f.ends_with(".rb"))
        if (const auto p = resolve_relative(dir, f); p && snap.find(*p)) targets.push_back(*p);
  } else {
    targets = detail::files_where(snap, [](std::string_view rel) {
      return rel.starts_with("lib/") && rel.ends_with(".rb");
    });
    if (!targets.empty()) facts.notes.push_back(path + ": files list is not a literal; using lib/**/*.rb as require targets");
  }
  for (const auto& p : targets) facts.entry_points.push_back(ScriptRef{p, {}});
}

/// Extensions, files and dependencies from the YAML metadata of a packed .gem.
void gem_metadata_facts(const PackageSnapshot& snap, std::string_view yaml, ManifestFacts& facts) {
  const std::string path(kGemMetadata);
  std::string section;
  std::size_t offset = 0;
  std::vector<std::string> files;
  for (const auto& line : text::split(yaml, '\n')) {
    const std::size_t here = offset;
    offset += line.size() + 1;
    if (!line.empty() && line[0] != ' ' && line[0] != '-') {
      section = line.substr(0, line.find(':'));
      continue;
    }
    if (!line.starts_with("- ")) continue;
    std::string v = text::trim(std::string_view(line).substr(2));
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
    if (section == "extensions") {
      if (const auto p = resolve_relative(snap.root, v))
        facts.build_extensions.push_back(ScriptRef{*p, detail::locate(path, yaml, here, here + line.size(), "extensions")});
    } else if (section == "files") {
      files.push_back(v);
    }
  }
  for (const auto& f : files)
    if (f.starts_with("lib/") && f.ends_with(".rb") && snap.find(snap.root + f))
      facts.entry_points.push_back(ScriptRef{snap.root + f, {}});
}

std::vector<std::string> gemspecs(const PackageSnapshot& snap) {
  auto specs = detail::files_where(snap, [](std::string_view rel) {
    return text::ends_with_icase(rel, ".gemspec") && text::path_depth(rel) == 0;
  });
  return specs;
}

void gem_facts(const PackageSnapshot& snap, ManifestFacts& facts) {
  const auto specs = gemspecs(snap);
  if (!specs.empty()) {
    if (specs.size() > 1) facts.notes.push_back("several gemspecs at the package root; using " + specs.front());
    if (const auto src = snap.text(specs.front())) gemspec_facts(snap, specs.front(), *src, facts);
    facts.distribution_kind = DistributionKind::Source;
  } else if (const auto yaml = snap.text(kGemMetadata)) {
    gem_metadata_facts(snap, *yaml, facts);
    facts.distribution_kind = DistributionKind::Source;
  }
}

// ---------------------------------------------------------------- cargo

std::optional<std::size_t> toml_key_offset(std::string_view src, std::string_view table, std::string_view key) {
  std::string current;
  std::size_t offset = 0;
  for (const auto& line : text::split(src, '\n')) {
    const std::size_t here = offset;
    offset += line.size() + 1;
    const std::string t = text::trim(line);
    if (t.starts_with('[')) {
      current = text::trim(std::string_view(t).substr(t.starts_with("[[") ? 2 : 1,
                                                          t.find(']') - (t.starts_with("[[") ? 2 : 1)));
      continue;
    }
    if (current != table || !t.starts_with(key)) continue;
    const std::string rest = text::trim(std::string_view(t).substr(key.size()));
    if (rest.starts_with('=')) return here + line.find_first_not_of(" \t");
  }
  return std::nullopt;
}

void cargo_facts(const PackageSnapshot& snap, ManifestFacts& facts) {
  const std::string path = snap.root + "Cargo.toml";
  const auto src = snap.text(path);
  if (!src) return;
  nlohmann::json doc;
  bool parsed = false;
  try {
    doc = toml::parse(*src);
    parsed = true;
  } catch (const std::exception& e) {
    facts.notes.push_back("ManifestUnparseable: " + path + ": " + e.what());
  }
  const nlohmann::json* build = nullptr;
  if (parsed && doc.contains("package") && doc["package"].contains("build")) build = &doc["package"]["build"];
  if (build && build->is_boolean() && !build->get<bool>()) {
    facts.notes.push_back(path + ": build script disabled (build = false)");
  } else if (build && build->is_string()) {
    const auto p = resolve_relative(snap.root, build->get<std::string>());
    const auto off = toml_key_offset(*src, "package", "build");
    if (p) {
      const std::size_t b = off.value_or(0);
      const std::size_t e = off ? b + text::trim(detail::line_at(*src, b)).size() : 0;
      facts.build_script = ScriptRef{*p, detail::locate(path, *src, b, e, "package.build")};
      if (!snap.find(*p)) facts.notes.push_back(path + ": build script " + *p + " is not in the package");
    }
  } else if (const auto b = snap.text(snap.root + "build.rs")) {
    facts.build_script = ScriptRef{snap.root + "build.rs", detail::locate(snap.root + "build.rs", *b, 0, 0)};
  }
  if (parsed && doc.contains("dependencies") && doc["dependencies"].is_object()) {
    for (const auto& [name, spec] : doc["dependencies"].items()) {
      std::string constraint;
      if (spec.is_string()) constraint = spec.get<std::string>();
      else if (spec.is_object() && spec.contains("version") && spec["version"].is_string())
        constraint = spec["version"].get<std::string>();
      std::string real = name;
      if (spec.is_object() && spec.contains("package") && spec["package"].is_string()) real = spec["package"].get<std::string>();
      facts.declared_dependencies.push_back({real, constraint, true});
    }
  }
  facts.distribution_kind = DistributionKind::Source;
}

// ---------------------------------------------------------------- go

void go_file_facts(const std::string& path, std::string_view src, ManifestFacts& facts) {
  const auto ts = lex::tokenize(path, src, lex::profile(Language::Go));
  const auto& toks = ts.tokens;
  for (const auto& b : lex::find_bodies(ts)) {
    if (b.kind == lex::BodyKind::Function && b.name == "init" && b.owner.empty() && b.parent == -1) {
      const std::size_t begin = toks[b.header].span.byte_start;
      const std::string_view line = detail::line_at(src, begin);
      const std::size_t end = static_cast<std::size_t>(line.data() - src.data()) + line.size();
      facts.go.init_functions.push_back(detail::locate(path, src, begin, end));
    }
  }
  for (const auto& t : toks) {
    if (t.kind == TokenKind::ImportStmt && t.parts.size() == 1 && t.parts[0] == "_")
      facts.go.blank_imports.emplace_back(t.detail, detail::locate(path, src, t.span.byte_start, t.span.byte_end));
  }
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!(toks[i].text == "var" && toks[i].nesting == 0 && toks[i].kind != TokenKind::StringLiteral)) continue;
    std::size_t end;
    const std::size_t nx = next_sig(toks, i);
    if (nx < toks.size() && toks[nx].is_punct("(")) {
      end = lex::matching_close(toks, nx);
    } else {
      end = nx;
      while (end < toks.size() && toks[end].span.line_start == toks[i].span.line_start) ++end;
      // a func literal spans lines; extend to its invocation
    }
    for (std::size_t k = nx; k < toks.size() && k <= end; ++k) {
      if (!(toks[k].text == "func" && toks[k].kind != TokenKind::StringLiteral)) continue;
      const std::size_t prev = k > 0 ? k - 1 : k;
      if (!(toks[prev].kind == TokenKind::Assignment || toks[prev].is_punct("="))) continue;
      std::size_t open = k + 1;
      while (open < toks.size() && !(toks[open].is_punct("{") && toks[open].nesting == toks[k].nesting)) ++open;
      const std::size_t close = lex::matching_close(toks, open);
      if (close >= toks.size()) break;
      const std::size_t call = next_sig(toks, close);
      if (call < toks.size() && toks[call].is_punct("(")) {
        const std::size_t call_end = lex::matching_close(toks, call);
        const std::size_t stop = call_end < toks.size() ? toks[call_end].span.byte_end : toks[close].span.byte_end;
        facts.go.var_anon_initializers.push_back(
            detail::locate(path, src, line_head(src, toks[prev].span.byte_start), stop));
      }
      if (close > end) end = close;
      k = close;
    }
    i = std::max(i, std::min(end, toks.size() - 1));
  }
}

void go_facts(const PackageSnapshot& snap, ManifestFacts& facts) {
  for (const auto& p : detail::files_where(snap, [](std::string_view rel) {
         return rel.ends_with(".go") && !detail::in_test_tree(rel) && !rel.starts_with("vendor/");
       }))
    if (const auto src = snap.text(p)) go_file_facts(p, *src, facts);
  if (const auto mod = snap.text(snap.root + "go.mod")) {
    bool block = false;
    for (const auto& raw : text::split(*mod, '\n')) {
      std::string line = text::trim(raw);
      const bool indirect = line.find("// indirect") != std::string::npos;
      line = text::trim(std::string_view(line).substr(0, line.find("//")));
      if (line == "require (") {
        block = true;
        continue;
      }
      if (block && line == ")") {
        block = false;
        continue;
      }
      if (line.starts_with("require ")) line = text::trim(std::string_view(line).substr(8));
      else if (!block) continue;
      const auto sp = line.find(' ');
      if (sp == std::string::npos) continue;
      facts.declared_dependencies.push_back({line.substr(0, sp), text::trim(std::string_view(line).substr(sp)), !indirect});
    }
  }
  facts.distribution_kind = DistributionKind::Source;
}

// ---------------------------------------------------------------- maven

std::optional<pt::ptree> read_pom(std::string_view src, std::vector<std::string>& notes, const std::string& path) {
  try {
    std::istringstream in{std::string(src)};
    pt::ptree tree;
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
    return tree;
  } catch (const pt::xml_parser_error& e) {
    notes.push_back("ManifestUnparseable: " + path + ": " + e.message() + " at line " + std::to_string(e.line()));
    return std::nullopt;
  }
}

void maven_facts(const PackageSnapshot& snap, ManifestFacts& facts) {
  const std::string path = snap.root + "pom.xml";
  const auto src = snap.text(path);
  if (!src) return;
  const auto tree = read_pom(*src, facts.notes, path);
  if (!tree) return;
  const auto project = tree->get_child_optional("project");
  if (!project) {
    facts.notes.push_back("ManifestUnparseable: " + path + ": no <project> element");
    return;
  }
  std::size_t cursor = src->find("<build");
  if (cursor == std::string_view::npos) cursor = 0;
  if (const auto plugins = project->get_child_optional("build.plugins")) {
    for (const auto& [tag, node] : *plugins) {
      if (tag != "plugin") continue;
      MavenPlugin p;
      p.artifact = node.get<std::string>("artifactId", "");
      p.version = node.get<std::string>("version", "");
      const auto group = node.get_optional<std::string>("groupId");
      p.group_defaulted = !group;
      p.group = group.value_or("org.apache.maven.plugins");
      if (const auto execs = node.get_child_optional("executions")) {
        for (const auto& [etag, exec] : *execs) {
          if (etag != "execution") continue;
          if (const auto phase = exec.get_optional<std::string>("phase")) {
            if (std::find(p.phases.begin(), p.phases.end(), *phase) == p.phases.end()) p.phases.push_back(*phase);
          }
        }
      }
      const std::string needle = "<artifactId>" + p.artifact + "</artifactId>";
      std::size_t at = src->find(needle, cursor);
      if (at == std::string_view::npos) at = src->find(needle);
      if (at != std::string_view::npos) {
        const std::size_t begin = line_head(*src, at);
        p.at = detail::locate(path, *src, begin, at + needle.size(), "build.plugins.plugin");
        cursor = at + needle.size();
      } else {
        p.at.location.path = path;
        p.at.manifest_key = "build.plugins.plugin";
      }
      facts.plugins.push_back(std::move(p));
    }
  }
  if (const auto deps = project->get_child_optional("dependencies")) {
    for (const auto& [tag, node] : *deps) {
      if (tag != "dependency") continue;
      const std::string scope = node.get<std::string>("scope", "compile");
      if (scope == "test" || scope == "provided" || scope == "system") continue;
      facts.declared_dependencies.push_back({node.get<std::string>("groupId", "") + ":" + node.get<std::string>("artifactId", ""),
                                             node.get<std::string>("version", ""), true});
    }
  }
  facts.distribution_kind = DistributionKind::Source;
}

}  // namespace

std::span<const std::string_view> hook_whitelist(Ecosystem eco) {
  switch (eco) {
    case Ecosystem::Npm: return kNpmHooks;
    case Ecosystem::Composer: return kComposerHooks;
    default: return {};
  }
}

std::span<const std::string_view> lockfile_names(Ecosystem eco) {
  switch (eco) {
    case Ecosystem::Npm: return kNpmLocks;
    case Ecosystem::PyPI: return kPyLocks;
    case Ecosystem::Composer: return kComposerLocks;
    case Ecosystem::RubyGems: return kGemLocks;
    case Ecosystem::Cargo: return kCargoLocks;
    case Ecosystem::Go: return kGoLocks;
    case Ecosystem::Maven: return {};
  }
  return {};
}

ManifestFacts extract_facts(const PackageSnapshot& snap) {
  ManifestFacts facts;
  switch (snap.coords.ecosystem) {
    case Ecosystem::Npm: npm_facts(snap, facts); break;
    case Ecosystem::PyPI: detail::python_facts(snap, facts); break;
    case Ecosystem::Composer: composer_facts(snap, facts); break;
    case Ecosystem::RubyGems: gem_facts(snap, facts); break;
    case Ecosystem::Cargo: cargo_facts(snap, facts); break;
    case Ecosystem::Go: go_facts(snap, facts); break;
    case Ecosystem::Maven: maven_facts(snap, facts); break;
  }
  for (const auto name : lockfile_names(snap.coords.ecosystem))
    if (snap.find(snap.root + std::string(name))) facts.lockfile_present = true;
  return facts;
}

PackageCoordinates read_coordinates(const PackageSnapshot& snap) {
  PackageCoordinates c;
  c.ecosystem = snap.coords.ecosystem;
  switch (c.ecosystem) {
    case Ecosystem::Npm:
    case Ecosystem::Composer: {
      const auto raw = snap.text(snap.root + (c.ecosystem == Ecosystem::Npm ? "package.json" : "composer.json"));
      if (!raw) break;
      for (const auto& m : detail::json_members(*raw)) {
        if (m.path.size() != 1 || !m.string_value) continue;
        if (m.path[0] == "name" && c.name.empty()) c.name = *m.string_value;
        if (m.path[0] == "version" && c.version.empty()) c.version = *m.string_value;
      }
      break;
    }
    case Ecosystem::PyPI: detail::python_coordinates(snap, c); break;
    case Ecosystem::RubyGems: {
      const auto specs = gemspecs(snap);
      if (!specs.empty()) {
        const auto src = snap.text(specs.front());
        if (!src) break;
        const auto ts = lex::tokenize(specs.front(), *src, lex::profile(Language::Ruby));
        for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
          const Token& t = ts.tokens[i];
          if (t.kind != TokenKind::Assignment || t.text != "=") continue;
          const std::size_t v = next_sig(ts.tokens, i);
          if (v >= ts.tokens.size() || ts.tokens[v].kind != TokenKind::StringLiteral) continue;
          if (ruby_target_is(t, "name") && c.name.empty()) c.name = ts.tokens[v].text;
          if (ruby_target_is(t, "version") && c.version.empty()) c.version = ts.tokens[v].text;
        }
      } else if (const auto yaml = snap.text(kGemMetadata)) {
        bool in_version = false;
        for (const auto& line : text::split(*yaml, '\n')) {
          if (line.starts_with("name:")) c.name = text::trim(std::string_view(line).substr(5));
          if (line.starts_with("version:")) in_version = true;
          else if (in_version && text::trim(line).starts_with("version:")) {
            c.version = text::trim(std::string_view(text::trim(line)).substr(8));
            in_version = false;
          }
        }
      }
      break;
    }
    case Ecosystem::Cargo: {
      const auto src = snap.text(snap.root + "Cargo.toml");
      if (!src) break;
      try {
        const auto doc = toml::parse(*src);
        if (doc.contains("package")) {
          c.name = doc["package"].value("name", "");
          if (doc["package"].contains("version") && doc["package"]["version"].is_string())
            c.version = doc["package"]["version"].get<std::string>();
        }
      } catch (const std::exception&) {
      }
      break;
    }
    case Ecosystem::Go: {
      const auto mod = snap.text(snap.root + "go.mod");
      if (!mod) break;
      for (const auto& line : text::split(*mod, '\n')) {
        const std::string t = text::trim(line);
        if (t.starts_with("module ")) {
          c.name = text::trim(std::string_view(t).substr(7));
          if (c.name.size() >= 2 && c.name.front() == '"') c.name = c.name.substr(1, c.name.size() - 2);
          break;
        }
      }
      break;
    }
    case Ecosystem::Maven: {
      const auto src = snap.text(snap.root + "pom.xml");
      if (!src) break;
      std::vector<std::string> ignored;
      const auto tree = read_pom(*src, ignored, "pom.xml");
      if (!tree || !tree->get_child_optional("project")) break;
      const auto& p = tree->get_child("project");
      const std::string group = p.get<std::string>("groupId", p.get<std::string>("parent.groupId", ""));
      const std::string artifact = p.get<std::string>("artifactId", "");
      c.name = group.empty() ? artifact : group + ":" + artifact;
      c.version = p.get<std::string>("version", p.get<std::string>("parent.version", ""));
      break;
    }
  }
  return c;
}

void populate(PackageSnapshot& snapshot) {
  const PackageCoordinates declared = read_coordinates(snapshot);
  if (snapshot.coords.name.empty()) snapshot.coords.name = declared.name;
  if (snapshot.coords.version.empty()) snapshot.coords.version = declared.version;
  snapshot.facts = extract_facts(snapshot);
}

}  // namespace depsentry
