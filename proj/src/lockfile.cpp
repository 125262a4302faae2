#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "depsentry/errors.hpp"
#include "depsentry/manifest.hpp"
#include "depsentry/text.hpp"
#include "depsentry/toml.hpp"

namespace depsentry {

namespace {

using nlohmann::json;

[[noreturn]] void unparseable(const std::string& why) { throw Error(ErrorCode::LockfileUnparseable, why); }

PackageCoordinates coords(Ecosystem eco, std::string name, std::string version) {
  return PackageCoordinates{eco, std::move(name), std::move(version)};
}

PackageCoordinates root_or(const PackageCoordinates& root, Ecosystem eco) {
  PackageCoordinates r = root;
  r.ecosystem = eco;
  if (r.name.empty()) r.name = "<root>";
  return r;
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    unparseable(std::string(what) + ": " + e.what());
  }
}

void add_edge(LockGraph& g, PackageCoordinates from, PackageCoordinates to, EdgeKind kind) {
  if (from == to) return;
  DependencyEdge e{std::move(from), std::move(to), kind};
  if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end()) g.edges.push_back(std::move(e));
}

std::vector<std::string> dep_names(const json& pkg, bool with_dev) {
  std::vector<std::string> out;
  for (const char* section : {"dependencies", "optionalDependencies", "peerDependencies", "devDependencies"}) {
    if (std::string_view(section) == "devDependencies" && !with_dev) continue;
    if (std::string_view(section) == "peerDependencies") continue;
    if (!pkg.contains(section) || !pkg[section].is_object()) continue;
    for (const auto& [k, v] : pkg[section].items()) out.push_back(k);
  }
  return out;
}

/// Name installed at a node_modules path ("node_modules/a/node_modules/@s/b" -> "@s/b").
std::string name_from_install_path(std::string_view path) {
  const auto at = path.rfind("node_modules/");
  return std::string(at == std::string_view::npos ? path : path.substr(at + 13));
}

LockGraph npm_lock(std::string_view text, const PackageCoordinates& root_in) {
  const json doc = parse_json(text, "package-lock.json");
  if (!doc.is_object()) unparseable("package-lock.json: not an object");
  LockGraph g;
  const int version = doc.value("lockfileVersion", 1);
  PackageCoordinates root = root_in;
  root.ecosystem = Ecosystem::Npm;
  if (root.name.empty()) root.name = doc.value("name", "<root>");
  if (root.version.empty()) root.version = doc.value("version", "");

  if (version >= 2 && doc.contains("packages") && doc["packages"].is_object()) {
    const json& pkgs = doc["packages"];
    auto node = [&](const std::string& path) {
      const json& p = pkgs.at(path);
      if (path.empty()) return root;
      return coords(Ecosystem::Npm, p.value("name", name_from_install_path(path)), p.value("version", ""));
    };
    auto resolve = [&](const std::string& from, const std::string& dep) -> std::optional<std::string> {
      std::string base = from;
      while (true) {
        const std::string cand = (base.empty() ? "" : base + "/") + "node_modules/" + dep;
        if (pkgs.contains(cand)) return cand;
        if (base.empty()) return std::nullopt;
        const auto cut = base.rfind("/node_modules/");
        base = cut == std::string::npos ? "" : base.substr(0, cut);
      }
    };
    for (const auto& [path, pkg] : pkgs.items()) {
      if (!pkg.is_object() || pkg.value("link", false)) continue;
      for (const auto& dep : dep_names(pkg, path.empty())) {
        const auto target = resolve(path, dep);
        if (!target) {
          if (!pkgs.contains(path) || !pkg.contains("optionalDependencies") || !pkg["optionalDependencies"].contains(dep))
            g.notes.push_back("package-lock.json: dependency " + dep + " of " + (path.empty() ? root.name : path) +
                              " is not installed in the lockfile");
          continue;
        }
        add_edge(g, node(path), node(*target), path.empty() ? EdgeKind::Direct : EdgeKind::Transitive);
      }
    }
    return g;
  }

  if (!doc.contains("dependencies") || !doc["dependencies"].is_object()) {
    if (doc.contains("packages")) return g;
    unparseable("package-lock.json: neither packages nor dependencies present");
  }
  g.notes.push_back("package-lock.json v1 does not record the root's direct dependencies; top-level entries marked direct");
  // v1: nested "dependencies" trees with "requires" maps
  struct Frame {
    const json* deps;
    const Frame* parent;
  };
  std::function<void(const json&, const Frame&)> walk = [&](const json& deps, const Frame& frame) {
    for (const auto& [name, entry] : deps.items()) {
      const PackageCoordinates me = coords(Ecosystem::Npm, name, entry.value("version", ""));
      if (frame.parent == nullptr) add_edge(g, root, me, EdgeKind::Direct);
      Frame inner{entry.contains("dependencies") ? &entry["dependencies"] : nullptr, &frame};
      if (entry.contains("requires") && entry["requires"].is_object()) {
        for (const auto& [req, range] : entry["requires"].items()) {
          const json* found = nullptr;
          for (const Frame* f = &inner; f != nullptr; f = f->parent)
            if (f->deps && f->deps->contains(req)) {
              found = &(*f->deps)[req];
              break;
            }
          if (found) add_edge(g, me, coords(Ecosystem::Npm, req, found->value("version", "")), EdgeKind::Transitive);
        }
      }
      if (inner.deps) walk(*inner.deps, inner);
    }
  };
  const Frame top{&doc["dependencies"], nullptr};
  walk(doc["dependencies"], top);
  return g;
}

LockGraph composer_lock(std::string_view text, const PackageCoordinates& root_in) {
  const json doc = parse_json(text, "composer.lock");
  if (!doc.is_object() || !doc.contains("packages")) unparseable("composer.lock: packages missing");
  LockGraph g;
  const PackageCoordinates root = root_or(root_in, Ecosystem::Composer);
  for (const char* section : {"packages", "packages-dev"}) {
    if (!doc.contains(section) || !doc[section].is_array()) continue;
    for (const auto& p : doc[section])
      if (p.contains("name")) add_edge(g, root, coords(Ecosystem::Composer, p["name"], p.value("version", "")), EdgeKind::Direct);
  }
  g.notes.push_back("composer.lock does not distinguish direct dependencies; all marked direct");
  return g;
}

LockGraph gem_lock(std::string_view text, const PackageCoordinates& root_in) {
  LockGraph g;
  const PackageCoordinates root = root_or(root_in, Ecosystem::RubyGems);
  std::map<std::string, std::string> versions;
  std::vector<std::pair<std::string, std::string>> sub;  // parent, child
  std::vector<std::string> direct;
  std::string section;
  std::string current;
  bool any = false;
  for (const auto& raw : text::split(text, '\n')) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] != ' ') {
      section = line;
      any = true;
      continue;
    }
    const std::size_t indent = line.find_first_not_of(' ');
    const std::string body = line.substr(indent);
    const std::string name = body.substr(0, body.find(' '));
    if (section == "DEPENDENCIES" && indent == 2) {
      direct.push_back(name.back() == '!' ? name.substr(0, name.size() - 1) : name);
    } else if ((section == "GEM" || section == "PATH" || section == "GIT") && indent == 4) {
      const auto open = body.find('(');
      const auto close = body.find(')');
      current = name;
      if (open != std::string::npos && close != std::string::npos) versions[name] = body.substr(open + 1, close - open - 1);
    } else if ((section == "GEM" || section == "PATH" || section == "GIT") && indent == 6 && !current.empty()) {
      sub.emplace_back(current, name);
    }
  }
  if (!any || (versions.empty() && direct.empty())) unparseable("Gemfile.lock: no GEM specs or DEPENDENCIES");
  auto node = [&](const std::string& n) { return coords(Ecosystem::RubyGems, n, versions.count(n) ? versions[n] : ""); };
  for (const auto& d : direct) add_edge(g, root, node(d), EdgeKind::Direct);
  for (const auto& [p, c] : sub) add_edge(g, node(p), node(c), EdgeKind::Transitive);
  return g;
}

LockGraph cargo_lock(std::string_view text, const PackageCoordinates& root_in) {
  json doc;
  try {
    doc = toml::parse(text);
  } catch (const std::exception& e) {
    unparseable(std::string("Cargo.lock: ") + e.what());
  }
  if (!doc.contains("package") || !doc["package"].is_array()) unparseable("Cargo.lock: no [[package]] entries");
  LockGraph g;
  std::multimap<std::string, std::string> by_name;
  std::set<std::string> local;  // entries without a registry source
  for (const auto& p : doc["package"]) {
    by_name.emplace(p.value("name", ""), p.value("version", ""));
    if (!p.contains("source")) local.insert(p.value("name", "") + " " + p.value("version", ""));
  }
  PackageCoordinates root = root_in;
  root.ecosystem = Ecosystem::Cargo;
  if (root.name.empty()) {
    if (local.size() == 1) {
      const std::string only = *local.begin();
      root.name = only.substr(0, only.find(' '));
      root.version = only.substr(only.find(' ') + 1);
    } else {
      root.name = "<root>";
    }
  }
  for (const auto& p : doc["package"]) {
    if (!p.contains("dependencies")) continue;
    const std::string name = p.value("name", "");
    const std::string version = p.value("version", "");
    const bool is_root = name == root.name && (root.version.empty() || version == root.version);
    const bool is_local = local.count(name + " " + version) > 0;
    const PackageCoordinates from = is_root ? root : coords(Ecosystem::Cargo, name, version);
    for (const auto& d : p["dependencies"]) {
      const auto parts = text::split(d.get<std::string>(), ' ');
      std::string dv = parts.size() > 1 ? parts[1] : "";
      if (dv.empty() && by_name.count(parts[0]) == 1) dv = by_name.find(parts[0])->second;
      add_edge(g, from, coords(Ecosystem::Cargo, parts[0], dv),
               is_root || (is_local && root.name == "<root>") ? EdgeKind::Direct : EdgeKind::Transitive);
    }
  }
  return g;
}

LockGraph go_sum(std::string_view text, const PackageCoordinates& root_in) {
  LockGraph g;
  const PackageCoordinates root = root_or(root_in, Ecosystem::Go);
  std::set<std::pair<std::string, std::string>> seen;
  bool any = false;
  for (const auto& raw : text::split(text, '\n')) {
    const auto parts = text::split(text::trim(raw), ' ');
    if (parts.size() < 2 || parts[0].empty()) continue;
    if (parts.size() != 3 || !parts[2].starts_with("h1:")) unparseable("go.sum: malformed line: " + raw);
    any = true;
    if (parts[1].ends_with("/go.mod")) continue;
    if (seen.emplace(parts[0], parts[1]).second)
      add_edge(g, root, coords(Ecosystem::Go, parts[0], parts[1]), EdgeKind::Direct);
  }
  if (!any) unparseable("go.sum: no entries");
  g.notes.push_back("go.sum does not distinguish direct dependencies; all marked direct");
  return g;
}

LockGraph requirements(std::string_view text, const PackageCoordinates& root_in) {
  LockGraph g;
  const PackageCoordinates root = root_or(root_in, Ecosystem::PyPI);
  bool any = false;
  for (const auto& raw : text::split(text, '\n')) {
    std::string line = text::trim(std::string_view(raw).substr(0, raw.find(" #")));
    if (line.starts_with('#') || line.empty()) continue;
    any = true;
    if (line.starts_with('-')) continue;
    if (line.ends_with('\\')) line = text::trim(std::string_view(line).substr(0, line.size() - 1));
    const DeclaredDependency d = parse_requirement(line);
    if (d.name.empty()) unparseable("requirements.txt: unrecognized line: " + line);
    std::string version = d.constraint;
    if (version.starts_with("==")) version = text::trim(std::string_view(version).substr(2));
    add_edge(g, root, coords(Ecosystem::PyPI, d.name, version), EdgeKind::Direct);
  }
  if (!any) unparseable("requirements.txt: no requirements");
  g.notes.push_back("requirements.txt is flat; all entries marked direct");
  return g;
}

}  // namespace

LockGraph parse_lockfile(Ecosystem eco, std::string_view text, const PackageCoordinates& root) {
  if (text::trim(text).empty()) throw Error(ErrorCode::LockfileUnparseable, "empty lockfile");
  switch (eco) {
    case Ecosystem::Npm: return npm_lock(text, root);
    case Ecosystem::Composer: return composer_lock(text, root);
    case Ecosystem::RubyGems: return gem_lock(text, root);
    case Ecosystem::Cargo: return cargo_lock(text, root);
    case Ecosystem::Go: return go_sum(text, root);
    case Ecosystem::PyPI: return requirements(text, root);
    case Ecosystem::Maven: break;
  }
  throw Error(ErrorCode::LockfileUnparseable, "no lockfile format for " + std::string(to_string(eco)));
}

}  // namespace depsentry
