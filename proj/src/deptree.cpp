#include "depsentry/deptree.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <tuple>

#include "depsentry/errors.hpp"
#include "depsentry/ingest.hpp"
#include "depsentry/manifest.hpp"

namespace depsentry {

namespace fs = std::filesystem;

namespace {

std::string strip_constraint(std::string_view c) {
  std::size_t b = 0;
  while (b < c.size() && (c[b] == '^' || c[b] == '~' || c[b] == '=' || c[b] == '>' || c[b] == '<' ||
                          c[b] == 'v' || c[b] == ' '))
    ++b;
  std::string_view rest = c.substr(b);
  const std::size_t e = rest.find_first_of(" ,;|");
  return std::string(rest.substr(0, e));
}

Resolution load(const fs::path& dir, const PackageCoordinates& coords, const IngestLimits& limits,
                std::string note) {
  auto snap = std::make_shared<PackageSnapshot>(open_package(dir, limits));
  populate(*snap);
  if (snap->coords.name.empty()) snap->coords.name = coords.name;
  if (snap->coords.version.empty()) snap->coords.version = coords.version;
  return {std::move(snap), std::move(note)};
}

}  // namespace

StoreResolver::StoreResolver(fs::path store, IngestLimits limits)
    : store_(std::move(store)), limits_(limits) {}

Resolution StoreResolver::operator()(const PackageCoordinates& coords) const {
  const fs::path base = store_ / std::string(to_string(coords.ecosystem)) / coords.name;
  std::error_code ec;
  try {
    if (!coords.version.empty() && fs::is_directory(base / coords.version, ec))
      return load(base / coords.version, coords, limits_, {});
    const std::string stripped = strip_constraint(coords.version);
    if (!stripped.empty() && fs::is_directory(base / stripped, ec))
      return load(base / stripped, coords, limits_, {});
    if (!fs::is_directory(base, ec)) return {nullptr, "not in store: " + coords.display()};
    std::vector<fs::path> versions;
    for (const auto& e : fs::directory_iterator(base, ec))
      if (e.is_directory()) versions.push_back(e.path());
    if (versions.size() == 1)
      return load(versions.front(), coords, limits_,
                  "resolved " + coords.display() + " to the only stored version " +
                      versions.front().filename().string());
    return {nullptr, "no stored version of " + coords.name + " matches \"" + coords.version + "\""};
  } catch (const Error& e) {
    return {nullptr, "unreadable store entry for " + coords.display() + ": " + e.what()};
  }
}

RegistryResolver::RegistryResolver(Config config) : config_(std::move(config)) {}

Resolution RegistryResolver::operator()(const PackageCoordinates& coords) const {
  try {
    const RegistrySource source = RegistrySource::from_config(config_, coords.ecosystem);
    PackageCoordinates exact = coords;
    exact.version = strip_constraint(coords.version);
    const FetchedArchive fetched = fetch_package(exact, source);
    auto snap = std::make_shared<PackageSnapshot>(open_archive(fetched.bytes, fetched.format, config_.ingest()));
    populate(*snap);
    if (snap->coords.name.empty()) snap->coords.name = exact.name;
    if (snap->coords.version.empty()) snap->coords.version = exact.version;
    for (const auto& n : fetched.notes) snap->notes.push_back(n);
    return {std::move(snap), {}};
  } catch (const Error& e) {
    return {nullptr, "fetch failed for " + coords.display() + ": " + e.what()};
  }
}

Resolver chain_resolvers(std::vector<Resolver> resolvers) {
  return [rs = std::move(resolvers)](const PackageCoordinates& c) {
    std::string notes;
    for (const auto& r : rs) {
      Resolution res = r(c);
      if (res.snapshot) return res;
      if (!res.note.empty()) notes += (notes.empty() ? "" : "; ") + res.note;
    }
    return Resolution{nullptr, notes};
  };
}

const TreeNode* DependencyTree::find(const PackageCoordinates& coords) const {
  for (const auto& n : nodes)
    if (n.coords == coords) return &n;
  return nullptr;
}

DependencyTree build_tree(std::shared_ptr<const PackageSnapshot> root, const Resolver& resolver) {
  DependencyTree tree;
  tree.root = root->coords;
  const Ecosystem eco = root->coords.ecosystem;

  std::optional<std::multimap<PackageCoordinates, DependencyEdge>> lock_edges;
  for (const auto name : lockfile_names(eco)) {
    const auto text = root->text(root->root + std::string(name));
    if (!text) continue;
    try {
      LockGraph g = parse_lockfile(eco, *text, root->coords);
      lock_edges.emplace();
      for (auto& e : g.edges) {
        if (e.from.name == root->coords.name) e.from = root->coords;
        lock_edges->emplace(e.from, e);
      }
      for (auto& n : g.notes) tree.notes.push_back(std::move(n));
      tree.notes.push_back("dependency edges from " + root->root + std::string(name));
    } catch (const Error& e) {
      tree.notes.push_back(std::string(name) + ": " + e.what() + "; falling back to declared dependencies");
    }
    break;
  }

  std::map<PackageCoordinates, std::size_t> index;
  std::set<DependencyEdge> edges;
  tree.nodes.push_back(TreeNode{root->coords, 0, root, {}});
  index.emplace(root->coords, 0);
  std::deque<std::size_t> queue{0};

  while (!queue.empty()) {
    const std::size_t at = queue.front();
    queue.pop_front();
    const TreeNode node = tree.nodes[at];
    std::vector<DependencyEdge> out;
    if (lock_edges) {
      auto [b, e] = lock_edges->equal_range(node.coords);
      for (auto it = b; it != e; ++it) out.push_back(it->second);
    } else if (node.snapshot) {
      for (const auto& d : node.snapshot->facts.declared_dependencies) {
        DependencyEdge edge;
        edge.from = node.coords;
        edge.to = PackageCoordinates{eco, d.name, d.constraint};
        edge.kind = at == 0 ? EdgeKind::Direct : EdgeKind::Transitive;
        out.push_back(std::move(edge));
      }
    }
    for (auto& edge : out) {
      edges.insert(edge);
      if (index.contains(edge.to)) continue;
      Resolution res = resolver(edge.to);
      index.emplace(edge.to, tree.nodes.size());
      tree.nodes.push_back(TreeNode{edge.to, node.depth + 1, std::move(res.snapshot), std::move(res.note)});
      queue.push_back(tree.nodes.size() - 1);
    }
  }
  tree.edges.assign(edges.begin(), edges.end());
  for (const auto& n : tree.nodes)
    if (!n.note.empty()) tree.notes.push_back(n.note);
  return tree;
}

std::optional<RollUp> rollup_for(const std::string& package, int depth, const std::vector<Finding>& findings) {
  if (depth < 1) return std::nullopt;
  std::set<TechniqueId> ids;
  for (const auto& f : findings)
    if (is_ace_technique(f.id)) ids.insert(f.id);
  if (ids.empty()) return std::nullopt;
  RollUp r;
  r.package = package;
  r.depth = depth;
  r.techniques.assign(ids.begin(), ids.end());
  r.confidence = depth >= 2 ? Confidence::Moderate : Confidence::Weak;
  r.severity = lookup(TechniqueId::EvStDeptree).severity;
  std::string list;
  for (auto id : ids) list += (list.empty() ? "" : ", ") + std::string(to_string(id));
  r.message = "code execution technique(s) " + list + " in " + package + " at dependency depth " +
              std::to_string(depth);
  return r;
}

TreeScan scan_tree(const DependencyTree& tree, const Scanner& scanner, unsigned jobs) {
  std::vector<const PackageSnapshot*> snapshots;
  for (const auto& n : tree.nodes) snapshots.push_back(n.snapshot.get());
  auto results = scan_all(snapshots, scanner, jobs);

  TreeScan out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& node = tree.nodes[i];
    if (!results[i]) continue;
    const std::string package = node.coords.display();
    std::vector<Finding> findings = std::move(results[i]->findings);
    for (auto& f : findings) {
      f.package = package;
      f.depth = node.depth;
    }
    if (auto r = rollup_for(package, node.depth, findings)) out.rollups.push_back(std::move(*r));
    for (auto& f : findings) out.findings.push_back(std::move(f));
    for (auto& note : results[i]->notes) out.notes.push_back(package + ": " + note);
    out.files += results[i]->files;
    out.bytes += results[i]->bytes;
  }
  sort_findings(out.findings);
  std::sort(out.rollups.begin(), out.rollups.end(), [](const RollUp& a, const RollUp& b) {
    return std::tie(a.depth, a.package) < std::tie(b.depth, b.package);
  });
  return out;
}

}  // namespace depsentry
