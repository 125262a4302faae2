#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/model.hpp"

namespace depsentry {

struct SnapshotFile {
  std::string content;
  std::uint64_t size = 0;
  /// Larger than the configured cap; recorded by path and size only.
  bool content_skipped = false;
  bool symlink = false;
  std::string link_target;

  friend bool operator==(const SnapshotFile&, const SnapshotFile&) = default;
};

/// A fact located in a manifest or source file.
struct Located {
  SourceSpan location;
  /// Dotted manifest key ("scripts.pre-install"), empty for source locations.
  std::string manifest_key;
  /// Verbatim excerpt of the located text.
  std::string evidence;

  friend bool operator==(const Located&, const Located&) = default;
};

struct InstallHook {
  std::string name;
  std::string command;
  Located at;

  friend bool operator==(const InstallHook&, const InstallHook&) = default;
};

struct ScriptRef {
  std::string path;
  Located at;

  friend bool operator==(const ScriptRef&, const ScriptRef&) = default;
};

struct CmdclassOverride {
  std::string command;
  std::string symbol;
  Located at;

  friend bool operator==(const CmdclassOverride&, const CmdclassOverride&) = default;
};

struct SetupFacts {
  std::vector<CmdclassOverride> cmdclass_overrides;
  std::vector<Located> top_level_statements;
  bool imports_install_command = false;
  std::vector<std::string> notes;

  friend bool operator==(const SetupFacts&, const SetupFacts&) = default;
};

struct MavenPlugin {
  std::string group;
  std::string artifact;
  std::string version;
  std::vector<std::string> phases;
  /// groupId omitted in pom.xml (Maven then assumes org.apache.maven.plugins).
  bool group_defaulted = false;
  Located at;

  friend bool operator==(const MavenPlugin&, const MavenPlugin&) = default;
};

struct GoFacts {
  std::vector<Located> init_functions;
  /// Import path with the location of the `_ "path"` spec.
  std::vector<std::pair<std::string, Located>> blank_imports;
  std::vector<Located> var_anon_initializers;

  friend bool operator==(const GoFacts&, const GoFacts&) = default;
};

struct DeclaredDependency {
  std::string name;
  std::string constraint;
  bool direct = true;

  friend bool operator==(const DeclaredDependency&, const DeclaredDependency&) = default;
};

enum class DistributionKind { Source, Prebuilt, Unknown };
std::string_view to_string(DistributionKind k);

struct ManifestFacts {
  /// Whitelisted hook names only, in manifest order.
  std::vector<InstallHook> install_hooks;
  std::optional<ScriptRef> build_script;
  std::vector<ScriptRef> build_extensions;
  std::vector<ScriptRef> entry_points;
  std::vector<CmdclassOverride> cmdclass_overrides;
  std::optional<SetupFacts> setup;
  std::vector<MavenPlugin> plugins;
  GoFacts go;
  std::vector<DeclaredDependency> declared_dependencies;
  bool lockfile_present = false;
  DistributionKind distribution_kind = DistributionKind::Unknown;
  std::vector<std::string> notes;

  friend bool operator==(const ManifestFacts&, const ManifestFacts&) = default;
};

enum class EdgeKind { Direct, Transitive };
std::string_view to_string(EdgeKind k);

struct DependencyEdge {
  PackageCoordinates from;
  PackageCoordinates to;
  EdgeKind kind = EdgeKind::Direct;

  friend auto operator<=>(const DependencyEdge&, const DependencyEdge&) = default;
};

struct PackageSnapshot {
  PackageCoordinates coords;
  /// Normalized relative paths, lexicographic order.
  std::map<std::string, SnapshotFile> files;
  ManifestFacts facts;
  /// Directory (relative, with trailing '/') holding the ecosystem marker, usually "".
  std::string root;
  /// "directory", "tar", "tar.gz" or "zip".
  std::string origin;
  std::vector<std::string> nested_archives;
  std::vector<std::string> notes;

  const SnapshotFile* find(std::string_view path) const;
  /// Content of `path`, or nullopt when absent, a symlink, or content-skipped.
  std::optional<std::string_view> text(std::string_view path) const;
};

}  // namespace depsentry
