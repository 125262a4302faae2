#include "depsentry/fixtures.hpp"

#include <fstream>

#include "depsentry/errors.hpp"

namespace depsentry {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(FixtureKind k) {
  switch (k) {
    case FixtureKind::Technique: return "technique";
    case FixtureKind::Control: return "control";
    case FixtureKind::Evasion: return "evasion";
  }
  return "technique";
}

namespace {

struct Anchor {
  TechniqueId id;
  std::string path;
  std::string needle;
};

class Builder {
 public:
  Builder(std::string dir, Ecosystem eco, FixtureKind kind) {
    pkg_.dir = std::move(dir);
    pkg_.ecosystem = eco;
    pkg_.kind = kind;
  }

  Builder& file(std::string path, std::string content) {
    pkg_.files[std::move(path)] = std::move(content);
    return *this;
  }

  /// Expects `id` on the first line of `path` containing `needle`.
  Builder& expect(TechniqueId id, std::string path, std::string needle) {
    anchors_.push_back({id, std::move(path), std::move(needle)});
    return *this;
  }

  FixturePackage done() {
    for (const auto& a : anchors_) {
      const std::string& content = pkg_.files.at(a.path);
      const std::size_t at = content.find(a.needle);
      if (at == std::string::npos) throw Error(ErrorCode::IoError, "fixture anchor missing: " + a.needle);
      std::uint32_t line = 1;
      for (std::size_t i = 0; i < at; ++i) line += content[i] == '\n' ? 1 : 0;
      pkg_.expected.push_back({a.id, a.path, line});
    }
    return std::move(pkg_);
  }

 private:
  FixturePackage pkg_;
  std::vector<Anchor> anchors_;
};

std::string sub(std::string text) {
  for (std::size_t at = text.find("@CMD@"); at != std::string::npos; at = text.find("@CMD@"))
    text.replace(at, 5, kFixturePayload);
  for (std::size_t at = text.find("@MARK@"); at != std::string::npos; at = text.find("@MARK@"))
    text.replace(at, 6, kFixtureMarker);
  return text;
}

std::string npm_manifest(std::string_view name, bool main) {
  std::string out = "{\n  \"name\": \"depsentry-fixture-" + std::string(name) + "\",\n  \"version\": \"1.0.0\"";
  if (main) out += ",\n  \"main\": \"index.js\"";
  return out + "\n}\n";
}

std::string setup_py(std::string_view name) {
  return "from setuptools import setup\n\nsetup(name='depsentry-fixture-" + std::string(name) +
         "', version='1.0.0', packages=['fixture'])\n";
}

std::string composer_json(std::string_view name) {
  return "{\n  \"name\": \"depsentry/fixture-" + std::string(name) +
         "\",\n  \"version\": \"1.0.0\",\n  \"autoload\": {\n    \"psr-4\": {\"Fixture\\\\\": \"src/\"}\n  }\n}\n";
}

std::string gemspec(std::string_view name) {
  return "Gem::Specification.new do |s|\n"
         "s.name        = \"depsentry-fixture-" + std::string(name) + "\"\n"
         "s.version     = \"1.0.0\"\n"
         "s.files       = [\"lib/fixture.rb\"]\n"
         "end\n";
}

std::string cargo_toml(std::string_view name) {
  return "[package]\nname = \"depsentry-fixture-" + std::string(name) +
         "\"\nversion = \"1.0.0\"\nedition = \"2021\"\n";
}

std::string go_mod(std::string_view name) {
  return "module example.com/depsentry-fixture/" + std::string(name) + "\n\ngo 1.21\n";
}

std::string pom(std::string_view name, std::string_view build = {}) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<project xmlns=\"http://maven.apache.org/POM/4.0.0\">\n"
         "  <modelVersion>4.0.0</modelVersion>\n"
         "  <groupId>com.example.fixture</groupId>\n"
         "  <artifactId>depsentry-fixture-" + std::string(name) + "</artifactId>\n"
         "  <version>1.0.0</version>\n" + std::string(build) + "</project>\n";
}

constexpr std::string_view kJavaPath = "src/main/java/com/example/fixture/Greeter.java";

void npm(std::vector<FixturePackage>& out) {
  out.push_back(Builder("npm/I1", Ecosystem::Npm, FixtureKind::Technique)
                    .file("package.json", sub(R"({
	"name": "depsentry-fixture-npm-i1",
	"version": "1.0.0",
	"description": "inert fixture",
	"scripts": {
		"pre-install": "@CMD@"
	}
}
)"))
                    .expect(TechniqueId::I1, "package.json", "\"pre-install\"")
                    .done());
  out.push_back(Builder("npm/R1", Ecosystem::Npm, FixtureKind::Technique)
                    .file("package.json", npm_manifest("npm-r1", true))
                    .file("index.js", sub(R"(const { execSync } = require("child_process");

execSync("@CMD@");
)"))
                    .expect(TechniqueId::R1, "index.js", "execSync(\"")
                    .done());
  out.push_back(Builder("npm/R2", Ecosystem::Npm, FixtureKind::Technique)
                    .file("package.json", npm_manifest("npm-r2", true))
                    .file("index.js", sub(R"(const { execSync } = require("child_process");

function greet() {
  execSync("@CMD@");
}

module.exports = { greet };
)"))
                    .expect(TechniqueId::R2, "index.js", "  execSync(")
                    .done());
  out.push_back(Builder("npm/R3", Ecosystem::Npm, FixtureKind::Technique)
                    .file("package.json", npm_manifest("npm-r3", true))
                    .file("index.js", sub(R"(const { execSync } = require("child_process");

class Greeter {
  constructor() {
    execSync("@CMD@");
  }
}

module.exports = { Greeter };
)"))
                    .expect(TechniqueId::R3, "index.js", "    execSync(")
                    .done());
}

void pip(std::vector<FixturePackage>& out) {
  out.push_back(Builder("pip/I2", Ecosystem::PyPI, FixtureKind::Technique)
                    .file("setup.py", sub(R"(from setuptools import setup

# Runs while the package is installed.
import os; os.system("@CMD@")
setup(name='depsentry-fixture-pip-i2', version='1.0.0')
)"))
                    .expect(TechniqueId::I2, "setup.py", "import os;")
                    .done());
  out.push_back(Builder("pip/R1", Ecosystem::PyPI, FixtureKind::Technique)
                    .file("setup.py", setup_py("pip-r1"))
                    .file("fixture/__init__.py", sub(R"(import os

os.system("@CMD@")
)"))
                    .expect(TechniqueId::R1, "fixture/__init__.py", "os.system")
                    .done());
  out.push_back(Builder("pip/R2", Ecosystem::PyPI, FixtureKind::Technique)
                    .file("setup.py", setup_py("pip-r2"))
                    .file("fixture/__init__.py", "")
                    .file("fixture/greet.py", sub(R"(import os


def greet():
    os.system("@CMD@")
)"))
                    .expect(TechniqueId::R2, "fixture/greet.py", "os.system")
                    .done());
  out.push_back(Builder("pip/R3", Ecosystem::PyPI, FixtureKind::Technique)
                    .file("setup.py", setup_py("pip-r3"))
                    .file("fixture/__init__.py", "")
                    .file("fixture/greeter.py", sub(R"(import os


class Greeter:
    def __init__(self):
        os.system("@CMD@")
)"))
                    .expect(TechniqueId::R3, "fixture/greeter.py", "os.system")
                    .done());
}

void composer(std::vector<FixturePackage>& out) {
  out.push_back(Builder("composer/I1", Ecosystem::Composer, FixtureKind::Technique)
                    .file("composer.json", sub(R"({
  "name": "depsentry/fixture-composer-i1",
  "version": "1.0.0",
  "scripts": {
    "post-install-cmd": "@CMD@"
  }
}
)"))
                    .expect(TechniqueId::I1, "composer.json", "\"post-install-cmd\"")
                    .done());
  out.push_back(Builder("composer/R2", Ecosystem::Composer, FixtureKind::Technique)
                    .file("composer.json", composer_json("composer-r2"))
                    .file("src/greet.php", sub(R"(<?php

namespace Fixture;

function greet()
{
    shell_exec('@CMD@');
}
)"))
                    .expect(TechniqueId::R2, "src/greet.php", "shell_exec")
                    .done());
  out.push_back(Builder("composer/R3", Ecosystem::Composer, FixtureKind::Technique)
                    .file("composer.json", composer_json("composer-r3"))
                    .file("src/Greeter.php", sub(R"(<?php

namespace Fixture;

class Greeter
{
    public function __construct()
    {
        shell_exec('@CMD@');
    }
}
)"))
                    .expect(TechniqueId::R3, "src/Greeter.php", "shell_exec")
                    .done());
}

void gem(std::vector<FixturePackage>& out) {
  out.push_back(Builder("gem/I3", Ecosystem::RubyGems, FixtureKind::Technique)
                    .file("fixture.gemspec", R"(Gem::Specification.new do |s|
s.name        = "depsentry-fixture-gem-i3"
s.version     = "1.0.0"
s.files       = ["ext/extconf.rb"]
s.extensions  = ["ext/extconf.rb"]
end
)")
                    .file("ext/extconf.rb", sub(R"(require "mkmf"

# Runs while the extension is built.
exec("@CMD@")

# Needed to finish the extension without errors
create_makefile("")
)"))
                    .expect(TechniqueId::I3, "fixture.gemspec", "s.extensions")
                    .done());
  out.push_back(Builder("gem/R1", Ecosystem::RubyGems, FixtureKind::Technique)
                    .file("fixture.gemspec", gemspec("gem-r1"))
                    .file("lib/fixture.rb", sub("system(\"@CMD@\")\n"))
                    .expect(TechniqueId::R1, "lib/fixture.rb", "system")
                    .done());
  out.push_back(Builder("gem/R2", Ecosystem::RubyGems, FixtureKind::Technique)
                    .file("fixture.gemspec", gemspec("gem-r2"))
                    .file("lib/fixture.rb", sub(R"(module Fixture
  def self.greet
    system("@CMD@")
  end
end
)"))
                    .expect(TechniqueId::R2, "lib/fixture.rb", "system")
                    .done());
  out.push_back(Builder("gem/R3", Ecosystem::RubyGems, FixtureKind::Technique)
                    .file("fixture.gemspec", gemspec("gem-r3"))
                    .file("lib/fixture.rb", sub(R"(class Greeter
  def initialize
    system("@CMD@")
  end
end
)"))
                    .expect(TechniqueId::R3, "lib/fixture.rb", "system")
                    .done());
}

void cargo(std::vector<FixturePackage>& out) {
  out.push_back(Builder("cargo/I2", Ecosystem::Cargo, FixtureKind::Technique)
                    .file("Cargo.toml", cargo_toml("cargo-i2"))
                    .file("build.rs", sub(R"(use std::process::Command;

fn main() {
	// Runs while the crate is built.
	let output =  Command::new("sh")
		.arg("-c")
		.arg("@CMD@")
		.output();
}
)"))
                    .file("src/lib.rs", "pub fn answer() -> u32 {\n    42\n}\n")
                    .expect(TechniqueId::I2, "build.rs", "Command::new")
                    .done());
  out.push_back(Builder("cargo/R2", Ecosystem::Cargo, FixtureKind::Technique)
                    .file("Cargo.toml", cargo_toml("cargo-r2"))
                    .file("src/lib.rs", sub(R"(use std::process::Command;

pub fn greet() {
    let _ = Command::new("sh").arg("-c").arg("@CMD@").status();
}
)"))
                    .expect(TechniqueId::R2, "src/lib.rs", "Command::new")
                    .done());
  out.push_back(Builder("cargo/R3", Ecosystem::Cargo, FixtureKind::Technique)
                    .file("Cargo.toml", cargo_toml("cargo-r3"))
                    .file("src/lib.rs", sub(R"(use std::process::Command;

pub struct Greeter;

impl Greeter {
    pub fn new() -> Self {
        let _ = Command::new("sh").arg("-c").arg("@CMD@").status();
        Greeter
    }
}
)"))
                    .expect(TechniqueId::R3, "src/lib.rs", "Command::new")
                    .done());
}

void go(std::vector<FixturePackage>& out) {
  out.push_back(Builder("go/R1", Ecosystem::Go, FixtureKind::Technique)
                    .file("go.mod", go_mod("r1"))
                    .file("fixture.go", sub(R"(package fixture

import "os/exec"

func init() {
	_ = exec.Command("echo", "@MARK@").Run()
}
)"))
                    .expect(TechniqueId::R1, "fixture.go", "func init")
                    .done());
  out.push_back(Builder("go/R2", Ecosystem::Go, FixtureKind::Technique)
                    .file("go.mod", go_mod("r2"))
                    .file("fixture.go", sub(R"(package fixture

import "os/exec"

func Greet() error {
	return exec.Command("echo", "@MARK@").Run()
}
)"))
                    .expect(TechniqueId::R2, "fixture.go", "exec.Command")
                    .done());
  out.push_back(Builder("go/R3", Ecosystem::Go, FixtureKind::Technique)
                    .file("go.mod", go_mod("r3"))
                    .file("fixture.go", sub(R"(package fixture

import "os/exec"

type Greeter struct{}

func NewGreeter() *Greeter {
	_ = exec.Command("echo", "@MARK@").Run()
	return &Greeter{}
}
)"))
                    .expect(TechniqueId::R3, "fixture.go", "exec.Command")
                    .done());
}

void mvn(std::vector<FixturePackage>& out) {
  out.push_back(Builder("mvn/R2", Ecosystem::Maven, FixtureKind::Technique)
                    .file("pom.xml", pom("mvn-r2"))
                    .file(std::string(kJavaPath), sub(R"(package com.example.fixture;

public class Greeter {
    public void greet() throws java.io.IOException {
        Runtime.getRuntime().exec(new String[] {"echo", "@MARK@"});
    }
}
)"))
                    .expect(TechniqueId::R2, std::string(kJavaPath), "Runtime")
                    .done());
  out.push_back(Builder("mvn/R3", Ecosystem::Maven, FixtureKind::Technique)
                    .file("pom.xml", pom("mvn-r3"))
                    .file(std::string(kJavaPath), sub(R"(package com.example.fixture;

public class Greeter {
    public Greeter() throws java.io.IOException {
        Runtime.getRuntime().exec(new String[] {"echo", "@MARK@"});
    }
}
)"))
                    .expect(TechniqueId::R3, std::string(kJavaPath), "Runtime")
                    .done());
  out.push_back(Builder("mvn/R4", Ecosystem::Maven, FixtureKind::Technique)
                    .file("pom.xml", pom("mvn-r4", R"(  <build>
    <plugins>
      <plugin>
        <groupId>com.example.fixture</groupId>
        <artifactId>fixture-maven-plugin</artifactId>
        <version>1.0.0</version>
        <executions>
          <execution>
            <phase>compile</phase>
            <goals>
              <goal>run</goal>
            </goals>
          </execution>
        </executions>
      </plugin>
    </plugins>
  </build>
)"))
                    .expect(TechniqueId::R4, "pom.xml", "<artifactId>fixture-maven-plugin")
                    .done());
}

void controls(std::vector<FixturePackage>& out) {
  out.push_back(Builder("npm/control", Ecosystem::Npm, FixtureKind::Control)
                    .file("package.json", R"({
  "name": "depsentry-fixture-npm-control",
  "version": "1.0.0",
  "main": "index.js",
  "scripts": {
    "test": "node test.js"
  }
}
)")
                    .file("index.js", R"(function greet(name) {
  return "hello, " + name;
}

module.exports = { greet };
)")
                    .done());
  out.push_back(Builder("pip/control", Ecosystem::PyPI, FixtureKind::Control)
                    .file("setup.py", setup_py("pip-control"))
                    .file("fixture/__init__.py", R"(def greet(name):
    return "hello, " + name
)")
                    .done());
  out.push_back(Builder("composer/control", Ecosystem::Composer, FixtureKind::Control)
                    .file("composer.json", composer_json("composer-control"))
                    .file("src/Greeter.php", R"(<?php

namespace Fixture;

class Greeter
{
    public function greet(string $name): string
    {
        return 'hello, ' . $name;
    }
}
)")
                    .done());
  out.push_back(Builder("gem/control", Ecosystem::RubyGems, FixtureKind::Control)
                    .file("fixture.gemspec", gemspec("gem-control"))
                    .file("lib/fixture.rb", R"(module Fixture
  def self.greet(name)
    "hello, #{name}"
  end
end
)")
                    .done());
  out.push_back(Builder("cargo/control", Ecosystem::Cargo, FixtureKind::Control)
                    .file("Cargo.toml", cargo_toml("cargo-control"))
                    .file("src/lib.rs", R"(pub fn greet(name: &str) -> String {
    format!("hello, {}", name)
}
)")
                    .done());
  out.push_back(Builder("go/control", Ecosystem::Go, FixtureKind::Control)
                    .file("go.mod", go_mod("control"))
                    .file("fixture.go", R"(package fixture

import "fmt"

func Greet(name string) string {
	return fmt.Sprintf("hello, %s", name)
}
)")
                    .done());
  out.push_back(Builder("mvn/control", Ecosystem::Maven, FixtureKind::Control)
                    .file("pom.xml", pom("mvn-control", R"(  <build>
    <plugins>
      <plugin>
        <groupId>org.apache.maven.plugins</groupId>
        <artifactId>maven-compiler-plugin</artifactId>
        <version>3.11.0</version>
      </plugin>
    </plugins>
  </build>
)"))
                    .file(std::string(kJavaPath), R"(package com.example.fixture;

public class Greeter {
    public String greet(String name) {
        return "hello, " + name;
    }
}
)")
                    .done());
}

void evasion(std::vector<FixturePackage>& out) {
  out.push_back(Builder("evasion/renamed-identifiers", Ecosystem::PyPI, FixtureKind::Evasion)
                    .file("setup.py", sub(R"(import sys
l1l_cringe_ = sys.version_info [0] == 2
l1l1l_cringe_ = 2048
l11_cringe_ = 7
def l111_cringe_ (l1ll_cringe_):
	global l11l1_cringe_
	l11l_cringe_ = ord (l1ll_cringe_ [-1])
	ll_cringe_ = l1ll_cringe_ [:-1]
	l1l1_cringe_ = l11l_cringe_
	l1_cringe_ = ll_cringe_ [:l1l1_cringe_] + ll_cringe_ [l1l1_cringe_:]
# @MARK@
)"))
                    .expect(TechniqueId::I2, "setup.py", "l1l_cringe_")
                    .expect(TechniqueId::EvStId, "setup.py", "l1l_cringe_")
                    .done());
  out.push_back(Builder("evasion/builtin-patch", Ecosystem::PyPI, FixtureKind::Evasion)
                    .file("setup.py", setup_py("builtin-patch"))
                    .file("fixture/__init__.py", "")
                    .file("fixture/patcher.py", sub(R"(import os, builtins

original_print = print
def hacked_print(self):
	original_print(self)
	os.system("@CMD@")
builtins.print = hacked_print
)"))
                    .expect(TechniqueId::R2, "fixture/patcher.py", "os.system")
                    .expect(TechniqueId::EvDyMod, "fixture/patcher.py", "builtins.print =")
                    .done());
}

constexpr std::string_view kCorpusReadme = R"(# depsentry fixture corpus

Every package in this directory is a minimal, inert test input for the depsentry scanner.
Wherever a technique would run a command, the command is `echo depsentry-fixture`; no
fixture downloads, deletes, reads credentials or contacts the network.

manifest.json maps each fixture directory to the finding ids the scanner must report for it
and the file and line of each finding. Control packages are benign and must report nothing.

Do not publish these packages to a registry.
)";

}  // namespace

std::vector<FixturePackage> fixture_packages() {
  std::vector<FixturePackage> out;
  npm(out);
  pip(out);
  composer(out);
  gem(out);
  cargo(out);
  go(out);
  mvn(out);
  controls(out);
  evasion(out);
  return out;
}

json fixture_manifest(const std::vector<FixturePackage>& packages) {
  json entries = json::array();
  for (const auto& p : packages) {
    json expected = json::array();
    for (const auto& e : p.expected)
      expected.push_back(json{{"id", to_string(e.id)}, {"path", e.path}, {"line", e.line}});
    entries.push_back(json{{"path", p.dir},
                           {"ecosystem", to_string(p.ecosystem)},
                           {"kind", to_string(p.kind)},
                           {"expected", expected}});
  }
  return json{{"payload", kFixturePayload}, {"fixtures", entries}};
}

json generate_fixtures(const fs::path& outdir) {
  const auto packages = fixture_packages();
  auto write = [](const fs::path& path, std::string_view content) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  };
  for (const auto& p : packages)
    for (const auto& [path, content] : p.files) write(outdir / p.dir / path, content);
  json manifest = fixture_manifest(packages);
  write(outdir / "manifest.json", manifest.dump(2) + "\n");
  write(outdir / "README.md", kCorpusReadme);
  return manifest;
}

}  // namespace depsentry
