#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "depsentry/fixtures.hpp"
#include "depsentry/pipeline.hpp"
#include "support/scan.hpp"
#include "support/tempdir.hpp"

namespace depsentry {
namespace {

const std::vector<FixturePackage>& corpus() {
  static const auto packages = fixture_packages();
  return packages;
}

TEST(Corpus, CountsPerKind) {
  std::size_t technique = 0, control = 0, evasion = 0;
  for (const auto& p : corpus()) {
    technique += p.kind == FixtureKind::Technique;
    control += p.kind == FixtureKind::Control;
    evasion += p.kind == FixtureKind::Evasion;
  }
  EXPECT_EQ(technique, 24u);
  EXPECT_EQ(control, 7u);
  EXPECT_EQ(evasion, 2u);
}

TEST(Corpus, OneTechniqueFixturePerApplicableCell) {
  std::set<std::pair<Ecosystem, TechniqueId>> seen;
  for (const auto& p : corpus())
    if (p.kind == FixtureKind::Technique) {
      ASSERT_EQ(p.expected.size(), 1u) << p.dir;
      EXPECT_TRUE(applicability(p.ecosystem, p.expected[0].id)) << p.dir;
      seen.emplace(p.ecosystem, p.expected[0].id);
    }
  EXPECT_EQ(seen.size(), 24u);
}

TEST(Corpus, GoHasOnlyRuntimeFixtures) {
  std::set<TechniqueId> ids;
  for (const auto& p : corpus())
    if (p.ecosystem == Ecosystem::Go && p.kind == FixtureKind::Technique) ids.insert(p.expected[0].id);
  EXPECT_EQ(ids, (std::set<TechniqueId>{TechniqueId::R1, TechniqueId::R2, TechniqueId::R3}));
}

TEST(Corpus, NpmHookShape) {
  for (const auto& p : corpus())
    if (p.dir == "npm/I1") {
      const auto j = nlohmann::json::parse(p.files.at("package.json"));
      ASSERT_TRUE(j["scripts"].is_object());
      bool has_payload = false;
      for (const auto& [k, v] : j["scripts"].items()) has_payload |= v == kFixturePayload;
      EXPECT_TRUE(has_payload);
      return;
    }
  FAIL() << "npm/I1 missing";
}

TEST(Corpus, PayloadsAreInert) {
  const std::vector<std::string> forbidden = {"curl", "wget", "rm -", "/etc/passwd", "https://"};
  for (const auto& p : corpus()) {
    bool marked = p.kind == FixtureKind::Control;
    for (const auto& [path, content] : p.files) {
      marked |= content.find(kFixtureMarker) != std::string::npos;
      // XML namespace declarations are the only URLs allowed.
      std::string scrubbed = content;
      for (std::string_view ns : {"http://maven.apache.org/", "http://www.w3.org/"})
        for (auto at = scrubbed.find(ns); at != std::string::npos; at = scrubbed.find(ns))
          scrubbed.erase(at, 4);
      EXPECT_EQ(scrubbed.find("http://"), std::string::npos) << p.dir << "/" << path;
      for (const auto& bad : forbidden)
        EXPECT_EQ(scrubbed.find(bad), std::string::npos) << p.dir << "/" << path << " contains " << bad;
    }
    EXPECT_TRUE(marked) << p.dir;
  }
}

TEST(Corpus, ScansMatchExpectations) {
  for (const auto& p : corpus()) {
    const auto findings = testing::scan_files(p.files);
    std::vector<std::tuple<TechniqueId, std::string, std::uint32_t>> got, want;
    for (const auto& f : findings) got.emplace_back(f.id, f.location.path, f.location.line_start);
    for (const auto& e : p.expected) want.emplace_back(e.id, e.path, e.line);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    EXPECT_EQ(got, want) << p.dir;
  }
}

TEST(Corpus, GeneratedTreeScansLikeMemory) {
  testing::TempDir dir;
  const auto manifest = generate_fixtures(dir.path());
  ASSERT_EQ(manifest["fixtures"].size(), corpus().size());
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "README.md"));
  for (const auto& entry : manifest["fixtures"]) {
    const Report r = scan_target((dir.path() / entry["path"].get<std::string>()).string(), Config::defaults(), {});
    EXPECT_EQ(r.findings.size(), entry["expected"].size()) << entry["path"];
  }
}

}  // namespace
}  // namespace depsentry
