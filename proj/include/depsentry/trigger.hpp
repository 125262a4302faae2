#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/model.hpp"
#include "depsentry/snapshot.hpp"

namespace depsentry {

enum class InstallCommand { Install, Update, Build };

std::string_view to_string(InstallCommand c);
std::optional<InstallCommand> install_command_from_string(std::string_view s);

struct InstallContext {
  InstallCommand command = InstallCommand::Install;
  bool ignore_scripts = false;   // npm
  bool only_binary_all = false;  // pip
  bool no_autoloader = false;    // composer
  bool lockfile_present = false; // composer
};

enum class Phase {
  PreInstall,
  Install,
  PostInstall,
  PrepareFamily,
  BuildScript,
  BuildExtension,
  AutoloadDump,
  UpdateCmd,
  BuildPlugin,
};

std::string_view to_string(Phase p);
std::optional<Phase> phase_from_string(std::string_view s);

struct TriggeredExecution {
  Phase phase = Phase::Install;
  std::string hook_or_file;
  std::string command_text;
  /// Manifest key path ("scripts.pre-install") or file path.
  std::string source;

  friend bool operator==(const TriggeredExecution&, const TriggeredExecution&) = default;
};

struct Prediction {
  std::vector<TriggeredExecution> executions;
  /// pip with only_binary_all on a source-only package: the install itself fails.
  bool install_fails = false;
  std::vector<std::string> notes;
  /// Flags set in the context that have no meaning for the ecosystem.
  std::vector<std::string> unused_flags;
};

Prediction predict_executions(const ManifestFacts& facts, Ecosystem eco, const InstallContext& ctx);

struct TriggerRow {
  TriggeredExecution execution;
  /// Context flag that would remove the row, or "none available".
  std::string suppressed_by;
};

struct SimulationReport {
  PackageCoordinates package;
  InstallContext context;
  std::vector<TriggerRow> rows;
  bool install_fails = false;
  std::vector<std::string> notes;
  std::vector<std::string> unused_flags;
};

/// Trigger table with, per row, the flag that would suppress it.
SimulationReport simulate_report(const PackageSnapshot& snapshot, const InstallContext& ctx);

/// Suppression flag for executions of `phase` in `eco` under `command`, or "none available".
std::string_view suppression_flag(Ecosystem eco, Phase phase, InstallCommand command = InstallCommand::Install);

}  // namespace depsentry
