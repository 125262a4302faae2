#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "depsentry/ace.hpp"
#include "depsentry/config.hpp"
#include "depsentry/model.hpp"
#include "depsentry/snapshot.hpp"

namespace depsentry {

struct PackageScan {
  PackageCoordinates coords;
  std::vector<Finding> findings;
  std::vector<std::string> notes;
  std::size_t files = 0;
  std::uint64_t bytes = 0;
};

/// Runs every detector over populated snapshots. Thread-safe: scans share only immutable state.
class Scanner {
 public:
  explicit Scanner(Config config);

  PackageScan scan(const PackageSnapshot& snapshot) const;

  const Config& config() const { return config_; }
  const DangerousApiCatalog& catalog() const { return catalog_; }

 private:
  Config config_;
  DangerousApiCatalog catalog_;
};

/// Scans `snapshots` on up to `jobs` threads; null entries yield nullopt. Results keep input order.
std::vector<std::optional<PackageScan>> scan_all(const std::vector<const PackageSnapshot*>& snapshots,
                                                 const Scanner& scanner, unsigned jobs);

/// Report order: path, byte_start, technique id, then the remaining fields.
bool finding_less(const Finding& a, const Finding& b);
void sort_findings(std::vector<Finding>& findings);

}  // namespace depsentry
