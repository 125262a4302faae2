#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/model.hpp"
#include "json.hpp"

namespace depsentry {

inline constexpr std::string_view kFixtureMarker = "depsentry-fixture";
inline constexpr std::string_view kFixturePayload = "echo depsentry-fixture";

enum class FixtureKind { Technique, Control, Evasion };
std::string_view to_string(FixtureKind k);

struct ExpectedFinding {
  TechniqueId id = TechniqueId::I1;
  std::string path;
  std::uint32_t line = 1;
};

struct FixturePackage {
  /// Relative directory under the corpus root, e.g. "npm/I1".
  std::string dir;
  Ecosystem ecosystem = Ecosystem::Npm;
  FixtureKind kind = FixtureKind::Technique;
  std::map<std::string, std::string> files;
  std::vector<ExpectedFinding> expected;
};

/// The full corpus, in manifest order: technique fixtures per ecosystem, then controls, then evasion.
std::vector<FixturePackage> fixture_packages();

nlohmann::json fixture_manifest(const std::vector<FixturePackage>& packages);

/// Writes every fixture package, manifest.json and README.md under `outdir`. Throws IoError.
nlohmann::json generate_fixtures(const std::filesystem::path& outdir);

}  // namespace depsentry
