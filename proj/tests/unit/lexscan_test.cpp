#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "depsentry/lexscan.hpp"
#include "support/samples.hpp"

namespace depsentry::lex {
namespace {

TokenStream lex(std::string_view path, std::string_view src) {
  const LanguageProfile* p = profile_for_path(path);
  EXPECT_NE(p, nullptr) << path;
  return tokenize(path, src, *p);
}

std::vector<TokenKind> kinds(const TokenStream& s) {
  std::vector<TokenKind> out;
  for (const auto& t : s.tokens) out.push_back(t.kind);
  return out;
}

TEST(Tokenize, PythonAssignmentWithTrailingComment) {
  const auto s = lex("a.py", "x = \"abc\" # hi\n");
  ASSERT_EQ(kinds(s), (std::vector<TokenKind>{TokenKind::Identifier, TokenKind::Assignment,
                                              TokenKind::StringLiteral, TokenKind::Comment}));
  EXPECT_EQ(s.tokens[0].text, "x");
  EXPECT_EQ(s.tokens[1].detail, "x");
  EXPECT_EQ(s.tokens[2].text, "abc");
  EXPECT_EQ(s.tokens[3].text, "# hi");
  // Spans by hand: "x" [0,1), "abc" literal [4,9), comment [10,14).
  EXPECT_EQ(s.tokens[0].span.byte_start, 0u);
  EXPECT_EQ(s.tokens[0].span.byte_end, 1u);
  EXPECT_EQ(s.tokens[2].span.byte_start, 4u);
  EXPECT_EQ(s.tokens[2].span.byte_end, 9u);
  EXPECT_EQ(s.tokens[3].span.byte_start, 10u);
  EXPECT_EQ(s.tokens[3].span.byte_end, 14u);
}

TEST(Tokenize, PrintPatchImportsAndAssignments) {
  const auto s = lex("patcher.py", testing::kPrintPatch);
  bool import_seen = false, patch_seen = false;
  for (const auto& t : s.tokens) {
    if (t.kind == TokenKind::ImportStmt && t.detail == "os, builtins") {
      import_seen = true;
      EXPECT_EQ(t.parts, (std::vector<std::string>{"os", "builtins"}));
    }
    if (t.kind == TokenKind::Assignment && t.detail == "builtins.print") {
      patch_seen = true;
      EXPECT_EQ(t.span.line_start, 7u);
    }
  }
  EXPECT_TRUE(import_seen);
  EXPECT_TRUE(patch_seen);
}

TEST(Tokenize, TemplateLiteralRecordsInterpolation) {
  //                      0123456789012345678
  const auto s = lex("a.js", "let u = `a${b}c`;\n");
  const Token* lit = nullptr;
  for (const auto& t : s.tokens)
    if (t.kind == TokenKind::StringLiteral) {
      ASSERT_EQ(lit, nullptr) << "exactly one literal";
      lit = &t;
    }
  ASSERT_NE(lit, nullptr);
  EXPECT_EQ(lit->span.byte_start, 8u);
  EXPECT_EQ(lit->span.byte_end, 16u);
  ASSERT_EQ(lit->interpolations.size(), 1u);
  // "${b}" occupies bytes 10..13.
  EXPECT_EQ(lit->interpolations[0].byte_start, 10u);
  EXPECT_EQ(lit->interpolations[0].byte_end, 14u);
}

TEST(Tokenize, NumberArraysCarryValues) {
  const auto s = lex("a.js", "var k = [104, 116, -1, 0x10];\n");
  bool found = false;
  for (const auto& t : s.tokens)
    if (t.kind == TokenKind::NumberArray) {
      found = true;
      EXPECT_EQ(t.values, (std::vector<std::int64_t>{104, 116, -1, 16}));
    }
  EXPECT_TRUE(found);
}

TEST(Tokenize, BinaryContentYieldsNoTokens) {
  std::string bin = "abc";
  bin.push_back('\0');
  bin += "def";
  const auto s = lex("a.py", bin);
  EXPECT_TRUE(s.binary);
  EXPECT_TRUE(s.tokens.empty());
  EXPECT_FALSE(s.notes.empty());
}

TEST(Tokenize, IsTotalOverArbitraryBytes) {
  std::string junk;
  for (int i = 1; i < 256; ++i) junk.push_back(static_cast<char>(i));
  junk += "\"unterminated `also ${ /* open";
  for (auto path : {"a.py", "a.js", "a.rb", "a.php", "a.rs", "a.go", "A.java"}) {
    const auto s = lex(path, junk);
    for (const auto& t : s.tokens) EXPECT_LE(t.span.byte_end, junk.size());
  }
}

TEST(Tokenize, RustUsePathKeepsSeparator) {
  const auto s = lex("build.rs", testing::kShellBuildRs);
  ASSERT_FALSE(s.tokens.empty());
  EXPECT_EQ(s.tokens[0].kind, TokenKind::ImportStmt);
  EXPECT_EQ(s.tokens[0].detail, "std::process::Command");
}

TEST(CatchShapes, PythonBareExceptPassIsEmpty) {
  const auto s = lex("a.py", "try:\n f()\nexcept:\n pass\n");
  const auto shapes = catch_shapes(s);
  ASSERT_EQ(shapes.shapes.size(), 1u);
  EXPECT_TRUE(shapes.shapes[0].catch_body_is_empty);
}

TEST(CatchShapes, JavaCatchWithLoggingIsNotEmpty) {
  const auto s = lex("A.java",
                     "class A { void f() { try { g(); } catch (Exception e) { log.warn(\"x\", e); } } }\n");
  const auto shapes = catch_shapes(s);
  ASSERT_EQ(shapes.shapes.size(), 1u);
  EXPECT_FALSE(shapes.shapes[0].catch_body_is_empty);
}

TEST(CatchShapes, RustHasNoneAndSaysSo) {
  const auto s = lex("lib.rs", "fn f() -> Result<(), E> { g()?; Ok(()) }\n");
  const auto shapes = catch_shapes(s);
  EXPECT_TRUE(shapes.shapes.empty());
  EXPECT_FALSE(shapes.notes.empty());
}

TEST(Bodies, ConstructorKindsPerLanguage) {
  struct Case {
    const char* path;
    const char* src;
    const char* name;
  };
  const Case cases[] = {
      {"a.py", "class Dataframe:\n    def __init__(self):\n        pass\n", "__init__"},
      {"a.js", "class A {\n  constructor() {\n  }\n}\n", "constructor"},
      {"a.rb", "class A\n  def initialize\n  end\nend\n", "initialize"},
      {"a.php", "<?php\nclass A {\n  public function __construct() {}\n}\n", "__construct"},
      {"lib.rs", "struct A;\nimpl A {\n  fn new() -> Self { A }\n}\n", "new"},
      {"a.go", "package a\nfunc NewA() *A {\n\treturn nil\n}\n", "NewA"},
      {"A.java", "class A {\n  A() {\n  }\n}\n", "A"},
  };
  for (const auto& c : cases) {
    const auto s = lex(c.path, c.src);
    bool ctor = false;
    for (const auto& b : find_bodies(s))
      if (b.kind == BodyKind::Constructor && b.name == c.name) ctor = true;
    EXPECT_TRUE(ctor) << c.path;
  }
}

TEST(Bodies, JavaStaticInitializer) {
  const auto s = lex("A.java", "class A {\n  static {\n    x();\n  }\n}\n");
  bool found = false;
  for (const auto& b : find_bodies(s)) found |= b.kind == BodyKind::StaticInit;
  EXPECT_TRUE(found);
}

TEST(Statements, PythonSplitsOnSemicolonsAndLines) {
  const auto s = lex("setup.py", "import os; os.system('x')\nsetup(name='a',\n  version='1')\n");
  EXPECT_EQ(python_statements(s).size(), 3u);
}

}  // namespace
}  // namespace depsentry::lex
