#include <gtest/gtest.h>

#include "depsentry/deptree.hpp"
#include "depsentry/ingest.hpp"
#include "depsentry/manifest.hpp"
#include "depsentry/report.hpp"
#include "support/scan.hpp"
#include "support/tempdir.hpp"

namespace depsentry {
namespace {

using testing::TempDir;

std::string npm_manifest(const std::string& name, const std::map<std::string, std::string>& deps,
                         const std::string& scripts = "") {
  std::string out = R"({"name":")" + name + R"(","version":"1.0.0")";
  if (!scripts.empty()) out += R"(,"scripts":)" + scripts;
  out += R"(,"dependencies":{)";
  bool first = true;
  for (const auto& [n, v] : deps) {
    out += (first ? "" : ",") + ("\"" + n + "\":\"" + v + "\"");
    first = false;
  }
  return out + "}}";
}

/// Root a -> b -> c in a store, with c optionally carrying an install hook.
struct Chain {
  TempDir dir;
  std::shared_ptr<const PackageSnapshot> root;

  explicit Chain(bool hook_in_c, bool cycle = false) {
    dir.write("root/package.json", npm_manifest("a", {{"b", "^1.0.0"}}));
    dir.write("root/index.js", "module.exports = 1;\n");
    dir.write("store/npm/b/1.0.0/package.json",
              npm_manifest("b", cycle ? std::map<std::string, std::string>{{"a", "1.0.0"}}
                                      : std::map<std::string, std::string>{{"c", "~1.0.0"}}));
    dir.write("store/npm/b/1.0.0/index.js", "module.exports = 2;\n");
    dir.write("store/npm/c/1.0.0/package.json",
              npm_manifest("c", {}, hook_in_c ? R"({"preinstall":"echo depsentry-fixture"})" : ""));
    dir.write("store/npm/c/1.0.0/index.js", "module.exports = 3;\n");
    auto snap = std::make_shared<PackageSnapshot>(open_package(dir.path() / "root", IngestLimits{}));
    populate(*snap);
    root = std::move(snap);
  }

  DependencyTree tree() const { return build_tree(root, StoreResolver(dir.path() / "store", IngestLimits{})); }
};

int depth_of(const DependencyTree& t, const std::string& name) {
  for (const auto& n : t.nodes)
    if (n.coords.name == name) return n.depth;
  return -1;
}

TEST(DependencyTree, DepthsFollowDeclaredChain) {
  const Chain c(false);
  const auto t = c.tree();
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_EQ(depth_of(t, "a"), 0);
  EXPECT_EQ(depth_of(t, "b"), 1);
  EXPECT_EQ(depth_of(t, "c"), 2);
  for (const auto& n : t.nodes) EXPECT_NE(n.snapshot, nullptr) << n.coords.name;
  ASSERT_EQ(t.edges.size(), 2u);
}

TEST(DependencyTree, NoDependenciesIsSingleNode) {
  TempDir d;
  d.write("p/package.json", R"({"name":"solo","version":"1.0.0"})");
  auto snap = std::make_shared<PackageSnapshot>(open_package(d.path() / "p", IngestLimits{}));
  populate(*snap);
  const auto t = build_tree(snap, StoreResolver(d.path() / "store", IngestLimits{}));
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_TRUE(t.edges.empty());
}

TEST(DependencyTree, CycleTerminates) {
  const Chain c(false, true);
  const auto t = c.tree();
  EXPECT_EQ(t.nodes.size(), 2u);
  EXPECT_EQ(t.edges.size(), 2u);
}

TEST(DependencyTree, UnresolvedNodeCarriesNote) {
  TempDir d;
  d.write("p/package.json", npm_manifest("a", {{"missing", "1.0.0"}}));
  auto snap = std::make_shared<PackageSnapshot>(open_package(d.path() / "p", IngestLimits{}));
  populate(*snap);
  const auto t = build_tree(snap, StoreResolver(d.path() / "store", IngestLimits{}));
  ASSERT_EQ(t.nodes.size(), 2u);
  EXPECT_EQ(t.nodes[1].snapshot, nullptr);
  EXPECT_FALSE(t.notes.empty());
}

TEST(DependencyTree, LockfileEdgesWin) {
  TempDir d;
  d.write("p/package.json", npm_manifest("a", {{"b", "1.0.0"}}));
  d.write("p/package-lock.json", R"({"name":"a","version":"1.0.0","lockfileVersion":3,"packages":{
    "":{"name":"a","version":"1.0.0","dependencies":{"c":"1.0.0"}},
    "node_modules/c":{"version":"1.0.0"}}})");
  auto snap = std::make_shared<PackageSnapshot>(open_package(d.path() / "p", IngestLimits{}));
  populate(*snap);
  const auto t = build_tree(snap, [](const PackageCoordinates&) { return Resolution{nullptr, "offline"}; });
  ASSERT_EQ(t.nodes.size(), 2u);
  EXPECT_EQ(t.nodes[1].coords.name, "c");
}

TEST(TreeScan, DeepHookRollsUp) {
  const Chain c(true);
  const auto scan = scan_tree(c.tree(), testing::default_scanner());
  const auto i1 = testing::only(scan.findings, TechniqueId::I1);
  ASSERT_EQ(i1.size(), 1u);
  EXPECT_EQ(i1[0].depth, 2);
  EXPECT_EQ(i1[0].package, "c@~1.0.0");
  ASSERT_EQ(scan.rollups.size(), 1u);
  EXPECT_EQ(scan.rollups[0].depth, 2);
  EXPECT_EQ(scan.rollups[0].confidence, Confidence::Moderate);
  EXPECT_EQ(scan.rollups[0].techniques, std::vector<TechniqueId>{TechniqueId::I1});
}

TEST(TreeScan, CleanTreeIsEmpty) {
  const Chain c(false);
  const auto scan = scan_tree(c.tree(), testing::default_scanner());
  EXPECT_TRUE(scan.findings.empty());
  EXPECT_TRUE(scan.rollups.empty());
}

TEST(TreeScan, ParallelMatchesSerial) {
  const Chain c(true);
  const auto tree = c.tree();
  const auto serial = scan_tree(tree, testing::default_scanner(), 1);
  for (unsigned jobs : {2u, 4u, 8u}) {
    const auto parallel = scan_tree(tree, testing::default_scanner(), jobs);
    EXPECT_EQ(parallel.findings, serial.findings);
    EXPECT_EQ(parallel.rollups, serial.rollups);
    EXPECT_EQ(parallel.notes, serial.notes);
  }
}

TEST(RollUp, DepthRules) {
  Finding f;
  f.id = TechniqueId::R3;
  EXPECT_FALSE(rollup_for("root", 0, {f}));
  EXPECT_EQ(rollup_for("x", 1, {f})->confidence, Confidence::Weak);
  EXPECT_EQ(rollup_for("x", 3, {f})->confidence, Confidence::Moderate);
  Finding e;
  e.id = TechniqueId::EvDoEnc;
  EXPECT_FALSE(rollup_for("x", 2, {e}));
}

}  // namespace
}  // namespace depsentry
