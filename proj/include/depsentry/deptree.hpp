#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "depsentry/config.hpp"
#include "depsentry/model.hpp"
#include "depsentry/scanner.hpp"
#include "depsentry/snapshot.hpp"

namespace depsentry {

struct Resolution {
  std::shared_ptr<const PackageSnapshot> snapshot;
  /// Why resolution failed, or how it deviated from the request.
  std::string note;
};

using Resolver = std::function<Resolution(const PackageCoordinates&)>;

/// Local store laid out as <store>/<ecosystem>/<name>/<version>/ with extracted contents.
/// An exact version directory wins; otherwise a constraint ("^1.2.0") is stripped to its
/// version, and a name with a single stored version resolves to it.
class StoreResolver {
 public:
  StoreResolver(std::filesystem::path store, IngestLimits limits);
  Resolution operator()(const PackageCoordinates& coords) const;

 private:
  std::filesystem::path store_;
  IngestLimits limits_;
};

/// Downloads from the configured registry. Never used unless fetching was requested.
class RegistryResolver {
 public:
  explicit RegistryResolver(Config config);
  Resolution operator()(const PackageCoordinates& coords) const;

 private:
  Config config_;
};

/// Tries each resolver in order and keeps the first snapshot.
Resolver chain_resolvers(std::vector<Resolver> resolvers);

struct TreeNode {
  PackageCoordinates coords;
  /// Minimum hop count from the root.
  int depth = 0;
  /// Null when unresolved.
  std::shared_ptr<const PackageSnapshot> snapshot;
  std::string note;
};

struct DependencyTree {
  PackageCoordinates root;
  /// Breadth-first order, root first.
  std::vector<TreeNode> nodes;
  std::vector<DependencyEdge> edges;
  std::vector<std::string> notes;

  const TreeNode* find(const PackageCoordinates& coords) const;
};

/// Breadth-first expansion over lockfile edges when the root has a lockfile, declared
/// dependencies otherwise. Cycles close on already-visited nodes.
DependencyTree build_tree(std::shared_ptr<const PackageSnapshot> root, const Resolver& resolver);

/// Dependency-tree roll-up: I*/R* findings below the root.
struct RollUp {
  TechniqueId id = TechniqueId::EvStDeptree;
  Severity severity = Severity::Medium;
  Confidence confidence = Confidence::Weak;
  std::string package;
  int depth = 0;
  std::vector<TechniqueId> techniques;
  std::string message;

  friend bool operator==(const RollUp&, const RollUp&) = default;
};

struct TreeScan {
  std::vector<Finding> findings;
  std::vector<RollUp> rollups;
  std::vector<std::string> notes;
  std::size_t files = 0;
  std::uint64_t bytes = 0;
};

/// Scans every resolved node on `jobs` threads; output does not depend on `jobs`.
TreeScan scan_tree(const DependencyTree& tree, const Scanner& scanner, unsigned jobs = 1);

/// Roll-up for the findings of one node at `depth`, or nullopt when none applies.
std::optional<RollUp> rollup_for(const std::string& package, int depth, const std::vector<Finding>& findings);

}  // namespace depsentry
