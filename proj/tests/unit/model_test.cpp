#include <gtest/gtest.h>

#include <set>
#include <string>

#include "depsentry/model.hpp"

namespace depsentry {
namespace {

// Rows in ecosystem order, columns I1 I2 I3 R1 R2 R3 R4.
constexpr const char* kMatrix[] = {
    "X..XXX.",  // npm
    ".X.XXX.",  // pypi
    "X...XX.",  // composer
    "..XXXX.",  // rubygems
    ".X..XX.",  // cargo
    "...XXX.",  // go
    "....XXX",  // maven
};

TEST(Applicability, MatchesHandTranscribedMatrix) {
  int true_cells = 0, cells = 0;
  for (std::size_t e = 0; e < kAllEcosystems.size(); ++e) {
    for (std::size_t t = 0; t < kAceTechniques.size(); ++t) {
      const bool want = kMatrix[e][t] == 'X';
      EXPECT_EQ(applicability(kAllEcosystems[e], kAceTechniques[t]), want)
          << to_string(kAllEcosystems[e]) << " " << to_string(kAceTechniques[t]);
      true_cells += want;
      ++cells;
    }
  }
  EXPECT_EQ(cells, 49);
  EXPECT_EQ(true_cells, 24);
}

TEST(Applicability, NamedCells) {
  EXPECT_TRUE(applicability(Ecosystem::Npm, TechniqueId::I1));
  EXPECT_FALSE(applicability(Ecosystem::Go, TechniqueId::I1));
  EXPECT_TRUE(applicability(Ecosystem::Maven, TechniqueId::R4));
}

TEST(Catalog, HasTwentyThreeDistinctEntries) {
  const auto cat = technique_catalog();
  EXPECT_EQ(cat.size(), 23u);
  std::set<std::string> ids;
  for (const auto& info : cat) ids.insert(std::string(to_string(info.id)));
  EXPECT_EQ(ids.size(), 23u);
}

TEST(Catalog, TitlesOfInstallAndPluginTechniques) {
  EXPECT_EQ(lookup(TechniqueId::I1).title, "Run command/scripts leveraging install-hooks");
  EXPECT_EQ(lookup(TechniqueId::R4).title, "Run code of 3rd-party dependency as build plugin");
}

TEST(Catalog, IdsRoundTripThroughStrings) {
  for (const auto& info : technique_catalog()) {
    const auto back = technique_from_string(to_string(info.id));
    ASSERT_TRUE(back);
    EXPECT_EQ(*back, info.id);
  }
  EXPECT_FALSE(technique_from_string("I9"));
}

TEST(Model, EnumStringsRoundTrip) {
  for (auto e : kAllEcosystems) EXPECT_EQ(ecosystem_from_string(to_string(e)), e);
  EXPECT_EQ(ecosystem_from_string("pip"), Ecosystem::PyPI);
  EXPECT_EQ(ecosystem_from_string("gem"), Ecosystem::RubyGems);
  EXPECT_EQ(ecosystem_from_string("mvn"), Ecosystem::Maven);
  for (auto s : {Severity::Info, Severity::Low, Severity::Medium, Severity::High, Severity::Critical})
    EXPECT_EQ(severity_from_string(to_string(s)), s);
  for (auto c : {Confidence::Weak, Confidence::Moderate, Confidence::Strong})
    EXPECT_EQ(confidence_from_string(to_string(c)), c);
  EXPECT_LT(Severity::Medium, Severity::High);
}

TEST(Model, EvidenceClipKeepsUtf8Intact) {
  std::string s(kMaxEvidence - 1, 'a');
  s += "\xc3\xa9tail";
  const std::string clipped = clip_evidence(s);
  EXPECT_LE(clipped.size(), kMaxEvidence);
  EXPECT_EQ(clipped, std::string(kMaxEvidence - 1, 'a'));
  EXPECT_EQ(clip_evidence("short"), "short");
}

}  // namespace
}  // namespace depsentry
