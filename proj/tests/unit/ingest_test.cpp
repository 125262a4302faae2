#include <gtest/gtest.h>

#include "depsentry/archive.hpp"
#include "depsentry/errors.hpp"
#include "depsentry/ingest.hpp"
#include "support/archives.hpp"
#include "support/tempdir.hpp"

namespace depsentry {
namespace {

using testing::gzip;
using testing::make_tar;
using testing::make_zip;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

TEST(DetectEcosystem, SingleMarkers) {
  EXPECT_EQ(detect_ecosystem({"package.json"}), Ecosystem::Npm);
  EXPECT_EQ(detect_ecosystem({"Cargo.toml", "build.rs"}), Ecosystem::Cargo);
  EXPECT_EQ(detect_ecosystem({"setup.py"}), Ecosystem::PyPI);
  EXPECT_EQ(detect_ecosystem({"composer.json"}), Ecosystem::Composer);
  EXPECT_EQ(detect_ecosystem({"x.gemspec"}), Ecosystem::RubyGems);
  EXPECT_EQ(detect_ecosystem({"go.mod"}), Ecosystem::Go);
  EXPECT_EQ(detect_ecosystem({"pom.xml"}), Ecosystem::Maven);
}

TEST(DetectEcosystem, NoMarkerIsAnError) {
  EXPECT_EQ(code_of([] { detect_ecosystem({"README.md"}); }), ErrorCode::NoEcosystemDetected);
}

TEST(DetectEcosystem, ShallowestMarkerWinsAndTiesAreNoted) {
  const auto d = detect({"pkg/package.json", "pkg/sub/setup.py"});
  EXPECT_EQ(d.ecosystem, Ecosystem::Npm);
  EXPECT_EQ(d.root, "pkg/");
  const auto tie = detect({"package.json", "setup.py"});
  EXPECT_EQ(tie.ecosystem, Ecosystem::Npm);
  EXPECT_FALSE(tie.notes.empty());
}

TEST(OpenArchive, NpmTarballStripsPackagePrefix) {
  const std::string tgz = gzip(make_tar({{"package/package.json", R"({"name":"a","version":"1.0.0"})"}}));
  const auto snap = open_archive(tgz, std::nullopt, IngestLimits{});
  EXPECT_EQ(snap.coords.ecosystem, Ecosystem::Npm);
  EXPECT_EQ(snap.files.size(), 1u);
}

TEST(OpenArchive, ZipTraversalIsRejected) {
  const std::string zip = make_zip({{"../../etc/x", "boom"}});
  EXPECT_EQ(code_of([&] { open_archive(zip, archive::Format::Zip, IngestLimits{}); }),
            ErrorCode::PathTraversalRejected);
}

TEST(OpenArchive, ZipWithSetupPy) {
  const std::string zip = make_zip({{"demo-1.0/setup.py", "from setuptools import setup\nsetup(name='demo')\n"},
                                    {"demo-1.0/demo/__init__.py", ""}});
  const auto snap = open_archive(zip, std::nullopt, IngestLimits{});
  EXPECT_EQ(snap.coords.ecosystem, Ecosystem::PyPI);
  EXPECT_EQ(snap.files.size(), 2u);
}

TEST(OpenArchive, CorruptGzipIsArchiveCorrupt) {
  std::string bad = "\x1f\x8b\x08";
  bad += std::string(40, 'x');
  EXPECT_EQ(code_of([&] { open_archive(bad, std::nullopt, IngestLimits{}); }), ErrorCode::ArchiveCorrupt);
}

TEST(OpenArchive, OversizedFilesAreListedButSkipped) {
  IngestLimits limits;
  limits.max_file_size = 8;
  const std::string tgz =
      gzip(make_tar({{"package/package.json", R"({"name":"a"})"}, {"package/big.js", std::string(64, 'a')}}));
  const auto snap = open_archive(tgz, std::nullopt, limits);
  ASSERT_TRUE(snap.files.contains("big.js"));
  EXPECT_TRUE(snap.files.at("big.js").content_skipped);
  EXPECT_EQ(snap.files.at("big.js").size, 64u);
  EXPECT_FALSE(snap.notes.empty());
}

TEST(ArchivePaths, Normalization) {
  EXPECT_EQ(archive::normalize_path("a\\b/./c"), "a/b/c");
  EXPECT_EQ(archive::normalize_path("a/b/../c"), "a/c");
  EXPECT_EQ(code_of([] { archive::normalize_path("/etc/passwd"); }), ErrorCode::PathTraversalRejected);
  EXPECT_EQ(code_of([] { archive::normalize_path("a/../../b"); }), ErrorCode::PathTraversalRejected);
}

TEST(OpenPackage, DirectoryWithPythonPackage) {
  testing::TempDir dir;
  dir.write("setup.py", "from setuptools import setup\nsetup(name='demo')\n");
  dir.write("src/pkg/__init__.py", "");
  const auto snap = open_package(dir.path(), IngestLimits{});
  EXPECT_EQ(snap.coords.ecosystem, Ecosystem::PyPI);
  EXPECT_EQ(snap.files.size(), 2u);
}

TEST(OpenPackage, ArchiveFileOnDisk) {
  testing::TempDir dir;
  dir.write("a.tgz", gzip(make_tar({{"package/package.json", R"({"name":"a","version":"2.0.0"})"}})));
  const auto snap = open_package(dir.path() / "a.tgz", IngestLimits{});
  EXPECT_EQ(snap.coords.ecosystem, Ecosystem::Npm);
}

}  // namespace
}  // namespace depsentry
