#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/archive.hpp"
#include "depsentry/config.hpp"
#include "depsentry/model.hpp"
#include "depsentry/snapshot.hpp"

namespace depsentry {

struct EcosystemDetection {
  Ecosystem ecosystem = Ecosystem::Npm;
  /// Directory holding the winning marker, "" or "dir/".
  std::string root;
  std::string marker;
  std::vector<std::string> notes;
};

/// Marker file at the shallowest depth wins; ties go to the fixed precedence
/// npm, pypi, composer, rubygems, cargo, go, maven. Throws NoEcosystemDetected.
EcosystemDetection detect(const std::vector<std::string>& paths);
Ecosystem detect_ecosystem(const std::vector<std::string>& paths);

/// Whether `path` is an ecosystem marker, and for which ecosystem.
std::optional<Ecosystem> marker_ecosystem(std::string_view path);

PackageSnapshot open_directory(const std::filesystem::path& dir, const IngestLimits& limits);
/// `hint` of nullopt sniffs the format from magic bytes.
PackageSnapshot open_archive(std::string_view bytes, std::optional<archive::Format> hint,
                             const IngestLimits& limits);
/// Directory, or archive file whose format follows from its name or magic bytes.
PackageSnapshot open_package(const std::filesystem::path& input, const IngestLimits& limits);

struct RegistrySource {
  Ecosystem ecosystem = Ecosystem::Npm;
  std::string base_url;
  std::optional<std::string> auth;
  /// URL templates and digest settings for this registry.
  nlohmann::json endpoints;

  /// Registry settings for `eco` from the "registry" config section. Throws UnsupportedFormat
  /// for ecosystems without a registry protocol, ConfigInvalid for a malformed base_url.
  static RegistrySource from_config(const Config& config, Ecosystem eco);
};

struct FetchedArchive {
  std::string bytes;
  std::optional<archive::Format> format;
  std::string url;
  std::vector<std::string> notes;
};

/// Expands {base}, {name}, {basename}, {version}, {group}, {group_path}, {artifact} and
/// {archive_url} in `tmpl`.
std::string expand_url_template(std::string_view tmpl, const PackageCoordinates& coords,
                                std::string_view base, std::string_view archive_url = {});

/// Downloads the published archive. Throws NotFound, NetworkError or ChecksumMismatch.
FetchedArchive fetch_package(const PackageCoordinates& coords, const RegistrySource& source);

/// Lowercase hex digest of `bytes` with "sha1", "sha256" or "sha512".
std::string hex_digest(std::string_view algorithm, std::string_view bytes);

/// Compares `bytes` against a hex digest or an SRI value ("sha512-<base64>").
bool digest_matches(std::string_view algorithm, std::string_view expected, std::string_view bytes);

}  // namespace depsentry
