#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/deptree.hpp"
#include "depsentry/model.hpp"
#include "depsentry/snapshot.hpp"
#include "depsentry/trigger.hpp"
#include "json.hpp"

namespace depsentry {

inline constexpr std::string_view kToolName = "depsentry";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct ReportStats {
  std::size_t files = 0;
  std::uint64_t bytes = 0;
  std::int64_t duration_ms = 0;

  friend bool operator==(const ReportStats&, const ReportStats&) = default;
};

struct Report {
  std::string tool{kToolName};
  std::string version{kToolVersion};
  /// ISO 8601 UTC; excluded from determinism comparisons.
  std::string timestamp;
  PackageCoordinates target;
  std::vector<Finding> findings;
  std::optional<SimulationReport> simulation;
  std::vector<DependencyEdge> edges;
  std::vector<RollUp> rollups;
  std::vector<std::string> notes;
  ReportStats stats;

  /// Sorts findings into report order.
  void finalize();
};

enum class ReportFormat { Text, Json, Sarif };
std::string_view to_string(ReportFormat f);
std::optional<ReportFormat> report_format_from_string(std::string_view s);

std::string current_timestamp();

nlohmann::json to_json(const Finding& f);
Finding finding_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimulationReport& s);
SimulationReport simulation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Report& r);
/// Inverse of to_json(Report). Throws ConfigInvalid on malformed documents.
Report report_from_json(const nlohmann::json& j);

/// SARIF 2.1.0 log with one rule per technique and one result per finding.
nlohmann::json to_sarif(const Report& r);

std::string render(const Report& r, ReportFormat format);

/// 1 when any finding is at or above `fail_on`, else 0. Exit code 2 belongs to the CLI.
int exit_code(const Report& r, Severity fail_on);

/// Technique catalog as JSON, for the `rules` command.
nlohmann::json catalog_json();

}  // namespace depsentry
