#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace depsentry {

enum class Ecosystem { Npm, PyPI, Composer, RubyGems, Cargo, Go, Maven };

inline constexpr std::array<Ecosystem, 7> kAllEcosystems = {
    Ecosystem::Npm,   Ecosystem::PyPI, Ecosystem::Composer, Ecosystem::RubyGems,
    Ecosystem::Cargo, Ecosystem::Go,   Ecosystem::Maven};

/// Short lowercase name used in CLI arguments, store layout and reports ("npm", "pypi", ...).
std::string_view to_string(Ecosystem e);
std::optional<Ecosystem> ecosystem_from_string(std::string_view s);

enum class TechniqueId {
  I1, I2, I3, R1, R2, R3, R4,
  EvDoEnc, EvDoCmp, EvDoCry, EvDoBin, EvDoSplit,
  EvStId, EvStFiles, EvStStage2, EvStDeptree, EvStVis, EvStUni, EvStPoly,
  EvDyPack, EvDySteg, EvDyMod,
  EvWs,
};

inline constexpr std::array<TechniqueId, 7> kAceTechniques = {
    TechniqueId::I1, TechniqueId::I2, TechniqueId::I3, TechniqueId::R1,
    TechniqueId::R2, TechniqueId::R3, TechniqueId::R4};

std::string_view to_string(TechniqueId id);
std::optional<TechniqueId> technique_from_string(std::string_view s);
bool is_ace_technique(TechniqueId id);
bool is_install_time(TechniqueId id);

enum class Severity { Info, Low, Medium, High, Critical };
enum class Confidence { Weak, Moderate, Strong };

std::string_view to_string(Severity s);
std::string_view to_string(Confidence c);
std::optional<Severity> severity_from_string(std::string_view s);
std::optional<Confidence> confidence_from_string(std::string_view s);

struct PackageCoordinates {
  Ecosystem ecosystem = Ecosystem::Npm;
  std::string name;
  std::string version;

  /// "name@version", or just "name" when the version is unknown.
  std::string display() const;

  friend auto operator<=>(const PackageCoordinates&, const PackageCoordinates&) = default;
};

struct SourceSpan {
  std::string path;
  std::uint32_t line_start = 1;
  std::uint32_t line_end = 1;
  std::uint64_t byte_start = 0;
  std::uint64_t byte_end = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct Finding {
  TechniqueId id = TechniqueId::I1;
  Severity severity = Severity::Info;
  Confidence confidence = Confidence::Weak;
  SourceSpan location;
  /// Dotted key path into a manifest ("scripts.pre-install") when the finding is manifest-based.
  std::string manifest_key;
  /// Verbatim excerpt of the referenced file, at most kMaxEvidence bytes.
  std::string evidence;
  std::string message;
  std::string remediation_ref;
  /// Package the finding belongs to; set for dependency-tree scans.
  std::string package;
  std::optional<int> depth;
  std::vector<std::pair<std::string, std::string>> properties;

  friend bool operator==(const Finding&, const Finding&) = default;
};

inline constexpr std::size_t kMaxEvidence = 200;

/// Truncates to at most kMaxEvidence bytes without splitting a UTF-8 sequence.
std::string clip_evidence(std::string_view text);

struct TechniqueInfo {
  TechniqueId id;
  std::string_view title;
  std::string_view category;
  Severity severity;
  Confidence confidence;
  std::string_view remediation;
};

std::span<const TechniqueInfo> technique_catalog();
const TechniqueInfo& lookup(TechniqueId id);

/// Builds a finding with the catalog defaults for `id`.
Finding make_finding(TechniqueId id, SourceSpan location, std::string_view evidence,
                     std::string message = {});

/// Whether `technique` (one of I1..R4) is applicable to `ecosystem`.
bool applicability(Ecosystem ecosystem, TechniqueId technique);

}  // namespace depsentry
