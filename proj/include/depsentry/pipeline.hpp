#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "depsentry/config.hpp"
#include "depsentry/report.hpp"
#include "depsentry/trigger.hpp"

namespace depsentry {

/// "eco:name@version"; Maven names are "group:artifact". nullopt when malformed.
std::optional<PackageCoordinates> parse_coordinates(std::string_view text);

/// Opens a directory or archive, or with `fetch` a registry coordinate. Facts are populated.
/// Throws IoError when the target is neither.
std::shared_ptr<const PackageSnapshot> load_target(const std::string& target, const Config& config,
                                                   bool fetch);

struct ScanOptions {
  std::optional<std::filesystem::path> deps_store;
  bool fetch = false;
  /// Walk dependencies even without a store.
  bool tree = false;
  unsigned jobs = 1;
};

/// Scans the target, and its dependency tree when a store is given or `tree` is set.
Report scan_target(const std::string& target, const Config& config, const ScanOptions& options);

/// Trigger table for the target under `ctx`.
Report simulate_target(const std::string& target, const Config& config, const InstallContext& ctx);

}  // namespace depsentry
