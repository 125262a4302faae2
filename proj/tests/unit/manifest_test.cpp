#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "depsentry/errors.hpp"
#include "depsentry/manifest.hpp"
#include "support/samples.hpp"
#include "support/snapshots.hpp"

namespace depsentry {
namespace {

using testing::make_snapshot;

TEST(ExtractFacts, HookPackageJson) {
  const auto snap = make_snapshot({{"package.json", std::string(testing::kHookPackageJson)}});
  ASSERT_EQ(snap.facts.install_hooks.size(), 1u);
  EXPECT_EQ(snap.facts.install_hooks[0].name, "pre-install");
  EXPECT_EQ(snap.facts.install_hooks[0].command, "** COMMANDS **");
  EXPECT_EQ(snap.facts.install_hooks[0].at.manifest_key, "scripts.pre-install");
  EXPECT_EQ(snap.facts.install_hooks[0].at.location.line_start, 6u);
}

TEST(ExtractFacts, GemspecExtensions) {
  const auto snap = make_snapshot({{"example.gemspec", std::string(testing::kExtensionGemspec)},
                                   {"extconf.rb", std::string(testing::kExecExtconf)}});
  ASSERT_EQ(snap.facts.build_extensions.size(), 1u);
  EXPECT_EQ(snap.facts.build_extensions[0].path, "extconf.rb");
  EXPECT_EQ(snap.facts.build_extensions[0].at.location.line_start, 5u);
}

TEST(ExtractFacts, CargoBuildScriptByConvention) {
  const auto snap = make_snapshot({{"Cargo.toml", std::string(testing::kPlainCargoToml)},
                                   {"build.rs", std::string(testing::kShellBuildRs)}});
  ASSERT_TRUE(snap.facts.build_script);
  EXPECT_EQ(snap.facts.build_script->path, "build.rs");
}

TEST(ExtractFacts, BareNpmManifest) {
  const auto snap = make_snapshot({{"package.json", R"({"name":"a","version":"1.0.0"})"}});
  EXPECT_TRUE(snap.facts.install_hooks.empty());
  EXPECT_FALSE(snap.facts.build_script);
  EXPECT_TRUE(snap.facts.build_extensions.empty());
  EXPECT_TRUE(snap.facts.cmdclass_overrides.empty());
  EXPECT_EQ(snap.facts.distribution_kind, DistributionKind::Source);
  EXPECT_EQ(snap.coords.name, "a");
  EXPECT_EQ(snap.coords.version, "1.0.0");
}

TEST(ExtractFacts, GoInitAndBlankImport) {
  const auto snap = make_snapshot({{"go.mod", "module example.com/a\n"},
                                   {"a.go", "package a\n\nimport _ \"foo\"\n\nfunc init() {\n}\n"}});
  EXPECT_EQ(snap.facts.go.init_functions.size(), 1u);
  ASSERT_EQ(snap.facts.go.blank_imports.size(), 1u);
  EXPECT_EQ(snap.facts.go.blank_imports[0].first, "foo");
}

TEST(ExtractFacts, MalformedManifestGivesNoteNotFailure) {
  const auto snap = make_snapshot({{"package.json", R"({"name": "a", "scripts": {"preinstall": "x")"}});
  bool noted = false;
  for (const auto& n : snap.facts.notes) noted |= n.find("ManifestUnparseable") != std::string::npos;
  EXPECT_TRUE(noted);
}

TEST(ExtractFacts, MavenPlugins) {
  const auto snap = make_snapshot({{"pom.xml", R"(<project>
  <build><plugins>
    <plugin>
      <groupId>com.example</groupId>
      <artifactId>my-plugin</artifactId>
      <executions><execution><phase>compile</phase></execution></executions>
    </plugin>
    <plugin><artifactId>maven-jar-plugin</artifactId></plugin>
  </plugins></build>
</project>
)"}});
  ASSERT_EQ(snap.facts.plugins.size(), 2u);
  EXPECT_EQ(snap.facts.plugins[0].group, "com.example");
  EXPECT_EQ(snap.facts.plugins[0].phases, std::vector<std::string>{"compile"});
  EXPECT_EQ(snap.facts.plugins[1].group, "org.apache.maven.plugins");
  EXPECT_TRUE(snap.facts.plugins[1].group_defaulted);
}

TEST(SetupFacts, TopLevelStatement) {
  const auto f = extract_setup_facts(testing::kTopLevelSetupPy);
  bool found = false;
  for (const auto& s : f.top_level_statements)
    found |= s.location.line_start == 4 && s.evidence.find("os.system") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(SetupFacts, CmdclassOverride) {
  const auto f = extract_setup_facts(testing::kCmdclassSetupPy);
  ASSERT_EQ(f.cmdclass_overrides.size(), 1u);
  EXPECT_EQ(f.cmdclass_overrides[0].command, "install");
  EXPECT_EQ(f.cmdclass_overrides[0].symbol, "ExampleClass");
  EXPECT_TRUE(f.imports_install_command);
}

TEST(SetupFacts, BenignSetupIsEmpty) {
  const auto f = extract_setup_facts("from setuptools import setup\nsetup(name=\"x\")\n");
  EXPECT_TRUE(f.cmdclass_overrides.empty());
  EXPECT_TRUE(f.top_level_statements.empty());
  EXPECT_FALSE(f.imports_install_command);
}

TEST(Lockfile, ComposerTwoPackages) {
  const auto g = parse_lockfile(Ecosystem::Composer, R"({
  "packages": [
    {"name": "acme/a", "version": "1.0.0"},
    {"name": "acme/b", "version": "2.0.0"}
  ]
})",
                                {Ecosystem::Composer, "root/app", "1.0.0"});
  EXPECT_EQ(g.edges.size(), 2u);
}

TEST(Lockfile, PackageLockThreeNodes) {
  const PackageCoordinates root{Ecosystem::Npm, "root", "1.0.0"};
  const auto g = parse_lockfile(Ecosystem::Npm, R"({
  "name": "root", "version": "1.0.0", "lockfileVersion": 3,
  "packages": {
    "": {"name": "root", "version": "1.0.0", "dependencies": {"a": "^1.0.0"}},
    "node_modules/a": {"version": "1.0.0", "dependencies": {"b": "^2.0.0"}},
    "node_modules/b": {"version": "2.0.0", "dependencies": {"c": "^3.0.0"}},
    "node_modules/c": {"version": "3.0.0"}
  }
})",
                                root);
  // Enumerated by hand: root->a direct, a->b and b->c transitive.
  const PackageCoordinates a{Ecosystem::Npm, "a", "1.0.0"}, b{Ecosystem::Npm, "b", "2.0.0"},
      c{Ecosystem::Npm, "c", "3.0.0"};
  std::set<DependencyEdge> want{{root, a, EdgeKind::Direct}, {a, b, EdgeKind::Transitive},
                                {b, c, EdgeKind::Transitive}};
  std::set<DependencyEdge> got(g.edges.begin(), g.edges.end());
  EXPECT_EQ(got, want);
}

TEST(Lockfile, NestedNodeModulesResolveToInnermostCopy) {
  const PackageCoordinates root{Ecosystem::Npm, "root", "1.0.0"};
  const auto g = parse_lockfile(Ecosystem::Npm, R"({
  "lockfileVersion": 3,
  "packages": {
    "": {"dependencies": {"a": "1", "b": "1"}},
    "node_modules/a": {"version": "1.0.0", "dependencies": {"b": "2"}},
    "node_modules/a/node_modules/b": {"version": "2.0.0"},
    "node_modules/b": {"version": "1.0.0"}
  }
})",
                                root);
  const DependencyEdge nested{{Ecosystem::Npm, "a", "1.0.0"}, {Ecosystem::Npm, "b", "2.0.0"}, EdgeKind::Transitive};
  EXPECT_NE(std::find(g.edges.begin(), g.edges.end(), nested), g.edges.end());
}

TEST(Lockfile, EmptyIsUnparseable) {
  for (auto eco : {Ecosystem::Npm, Ecosystem::Composer, Ecosystem::Cargo}) {
    try {
      parse_lockfile(eco, "");
      ADD_FAILURE() << to_string(eco);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::LockfileUnparseable);
    }
  }
}

TEST(HookWhitelist, RandomScriptKeysNeverLeakIntoFacts) {
  std::mt19937 rng(7);
  const auto npm = hook_whitelist(Ecosystem::Npm);
  const std::vector<std::string> extra = {"test", "build", "lint", "pre-installx", "postinstall2", "start", "prepack"};
  for (int round = 0; round < 200; ++round) {
    std::string scripts;
    const int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      std::string key = rng() % 2 ? std::string(npm[rng() % npm.size()]) : extra[rng() % extra.size()];
      if (rng() % 4 == 0) key += std::to_string(rng() % 10);
      scripts += (scripts.empty() ? "" : ",") + ("\"" + key + "\": \"echo x\"");
    }
    const auto snap = make_snapshot({{"package.json", "{\"name\":\"a\",\"scripts\":{" + scripts + "}}"}});
    for (const auto& h : snap.facts.install_hooks)
      EXPECT_NE(std::find(npm.begin(), npm.end(), h.name), npm.end()) << h.name;
  }
}

TEST(Requirements, Pep508Split) {
  const auto d = parse_requirement("requests[socks]>=2.0; python_version>'3'");
  EXPECT_EQ(d.name, "requests");
  EXPECT_EQ(d.constraint, ">=2.0");
}

}  // namespace
}  // namespace depsentry
