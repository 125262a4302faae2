#include <gtest/gtest.h>

#include "depsentry/errors.hpp"
#include "depsentry/report.hpp"
#include "depsentry/trigger.hpp"
#include "support/samples.hpp"
#include "support/scan.hpp"
#include "support/snapshots.hpp"

namespace depsentry {
namespace {

using nlohmann::json;

Report hook_report() {
  Report r;
  r.target = PackageCoordinates{Ecosystem::Npm, "hooked", "1.0.0"};
  r.findings = testing::scan_files({{"package.json", std::string(testing::kHookPackageJson)}});
  r.notes = {"a note"};
  r.stats = {1, 42, 7};
  r.finalize();
  return r;
}

TEST(Sarif, OneHookFinding) {
  const Report r = hook_report();
  ASSERT_EQ(r.findings.size(), 1u);
  const json s = to_sarif(r);
  EXPECT_EQ(s["version"], "2.1.0");
  const auto& run = s["runs"][0];
  const auto& results = run["results"];
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0]["ruleId"], "I1");
  const auto& rules = run["tool"]["driver"]["rules"];
  const int idx = results[0]["ruleIndex"];
  EXPECT_EQ(rules[idx]["id"], "I1");
  EXPECT_EQ(rules[idx]["shortDescription"]["text"], std::string(lookup(TechniqueId::I1).title));
  EXPECT_EQ(results[0]["level"], "warning");
  EXPECT_EQ(results[0]["locations"][0]["physicalLocation"]["artifactLocation"]["uri"], "package.json");
}

TEST(Sarif, EmptyReportListsAllRules) {
  const json s = to_sarif(Report{});
  EXPECT_TRUE(s["runs"][0]["results"].empty());
  EXPECT_EQ(s["runs"][0]["tool"]["driver"]["rules"].size(), 23u);
  EXPECT_EQ(s["runs"][0]["tool"]["driver"]["name"], "depsentry");
}

TEST(Json, RoundTripIsStructural) {
  Report r = hook_report();
  r.timestamp = "2026-01-01T00:00:00Z";
  r.edges.push_back({r.target, PackageCoordinates{Ecosystem::Npm, "dep", "2.0.0"}, EdgeKind::Direct});
  r.findings[0].package = "npm:hooked@1.0.0";
  r.findings[0].depth = 0;
  RollUp up;
  up.package = "npm:dep@2.0.0";
  up.depth = 1;
  up.techniques = {TechniqueId::I1};
  up.message = "m";
  r.rollups.push_back(up);
  const auto snap = testing::make_snapshot({{"package.json", std::string(testing::kHookPackageJson)}});
  r.simulation = simulate_report(snap, InstallContext{});

  const Report back = report_from_json(json::parse(to_json(r).dump()));
  EXPECT_EQ(back.findings, r.findings);
  EXPECT_EQ(back.edges, r.edges);
  EXPECT_EQ(back.rollups, r.rollups);
  EXPECT_EQ(back.notes, r.notes);
  EXPECT_EQ(back.stats, r.stats);
  EXPECT_EQ(back.target, r.target);
  EXPECT_EQ(back.timestamp, r.timestamp);
  ASSERT_TRUE(back.simulation);
  EXPECT_EQ(to_json(*back.simulation), to_json(*r.simulation));
  EXPECT_EQ(to_json(back), to_json(r));
}

TEST(Json, MalformedDocumentThrows) {
  EXPECT_THROW(report_from_json(json::parse(R"({"findings": 3})")), Error);
  EXPECT_THROW(report_from_json(json::array()), Error);
}

TEST(Json, DeterministicApartFromTimestamp) {
  Report a = hook_report();
  Report b = hook_report();
  a.timestamp = current_timestamp();
  b.timestamp = "1970-01-01T00:00:00Z";
  json ja = to_json(a), jb = to_json(b);
  ja["timestamp"] = jb["timestamp"] = "";
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(ExitCode, ThresholdIsInclusive) {
  Report r;
  EXPECT_EQ(exit_code(r, Severity::Info), 0);
  Finding low;
  low.id = TechniqueId::EvStFiles;
  low.severity = Severity::Low;
  r.findings = {low};
  EXPECT_EQ(exit_code(r, Severity::Medium), 0);
  EXPECT_EQ(exit_code(r, Severity::Low), 1);
  Finding high;
  high.id = TechniqueId::I2;
  high.severity = Severity::High;
  r.findings.push_back(high);
  EXPECT_EQ(exit_code(r, Severity::Medium), 1);
  EXPECT_EQ(exit_code(r, Severity::Critical), 0);
}

TEST(Text, GroupsBySeverity) {
  Report r;
  Finding a;
  a.id = TechniqueId::EvStUni;
  a.severity = Severity::Critical;
  a.location.path = "a.js";
  Finding b;
  b.id = TechniqueId::I1;
  b.severity = Severity::Medium;
  b.location.path = "package.json";
  r.findings = {b, a};
  r.finalize();
  const std::string text = render(r, ReportFormat::Text);
  const auto crit = text.find("CRITICAL (1)");
  const auto med = text.find("MEDIUM (1)");
  ASSERT_NE(crit, std::string::npos);
  ASSERT_NE(med, std::string::npos);
  EXPECT_LT(crit, med);
  EXPECT_EQ(text.find("HIGH ("), std::string::npos);
}

TEST(Formats, NamesRoundTrip) {
  for (auto f : {ReportFormat::Text, ReportFormat::Json, ReportFormat::Sarif})
    EXPECT_EQ(report_format_from_string(to_string(f)), f);
  EXPECT_FALSE(report_format_from_string("xml"));
}

TEST(Catalog, ListsEveryTechnique) {
  const json c = catalog_json();
  ASSERT_EQ(c.size(), 23u);
  EXPECT_EQ(c[0]["id"], "I1");
  EXPECT_EQ(c[0]["ecosystems"], json::array({"npm", "composer"}));
}

}  // namespace
}  // namespace depsentry
