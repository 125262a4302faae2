#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "depsentry/manifest.hpp"
#include "depsentry/trigger.hpp"

namespace depsentry::testing {

inline ManifestFacts random_facts(std::mt19937& rng) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  ManifestFacts f;
  std::vector<std::string_view> hooks;
  for (auto eco : {Ecosystem::Npm, Ecosystem::Composer})
    for (auto h : hook_whitelist(eco)) hooks.push_back(h);
  for (std::size_t i = 0, n = pick(6); i < n; ++i) {
    InstallHook h;
    h.name = std::string(hooks[pick(hooks.size())]);
    h.command = "echo " + std::to_string(i);
    h.at.manifest_key = "scripts." + h.name;
    f.install_hooks.push_back(h);
  }
  if (pick(2)) f.build_script = ScriptRef{pick(2) ? "setup.py" : "build.rs", {}};
  for (std::size_t i = 0, n = pick(3); i < n; ++i)
    f.cmdclass_overrides.push_back({i == 0 ? "install" : "develop", "Cmd" + std::to_string(i), {}});
  for (std::size_t i = 0, n = pick(3); i < n; ++i) f.build_extensions.push_back({"ext" + std::to_string(i) + "/extconf.rb", {}});
  const std::vector<std::string> phases = {"validate", "compile", "test", "package", "verify", "install", "deploy", "weird"};
  for (std::size_t i = 0, n = pick(3); i < n; ++i) {
    MavenPlugin p;
    p.group = "com.example";
    p.artifact = "p" + std::to_string(i);
    for (std::size_t k = 0, m = pick(3); k < m; ++k) p.phases.push_back(phases[pick(phases.size())]);
    f.plugins.push_back(p);
  }
  if (pick(2)) f.go.init_functions.push_back({});
  const DistributionKind kinds[] = {DistributionKind::Source, DistributionKind::Prebuilt, DistributionKind::Unknown};
  f.distribution_kind = kinds[pick(3)];
  f.lockfile_present = pick(2);
  return f;
}

inline InstallContext random_context(std::mt19937& rng) {
  InstallContext c;
  const InstallCommand cmds[] = {InstallCommand::Install, InstallCommand::Update, InstallCommand::Build};
  c.command = cmds[rng() % 3];
  c.ignore_scripts = rng() % 2;
  c.only_binary_all = rng() % 2;
  c.no_autoloader = rng() % 2;
  c.lockfile_present = rng() % 2;
  return c;
}

inline bool* flag_field(InstallContext& c, std::string_view flag) {
  if (flag == "ignore_scripts") return &c.ignore_scripts;
  if (flag == "only_binary_all") return &c.only_binary_all;
  if (flag == "no_autoloader") return &c.no_autoloader;
  if (flag == "lockfile_present") return &c.lockfile_present;
  return nullptr;
}

inline constexpr std::string_view kContextFlags[] = {"ignore_scripts", "only_binary_all", "no_autoloader",
                                                     "lockfile_present"};

/// Empty when toggling every flag removes exactly the rows it is claimed to suppress;
/// otherwise a description of the first violation.
inline std::string suppression_violation(const ManifestFacts& facts, Ecosystem eco, InstallContext ctx) {
  for (auto flag : kContextFlags) {
    InstallContext off = ctx, on = ctx;
    *flag_field(off, flag) = false;
    *flag_field(on, flag) = true;
    const auto without = predict_executions(facts, eco, off).executions;
    const auto with = predict_executions(facts, eco, on).executions;
    std::vector<TriggeredExecution> expected;
    for (const auto& e : without)
      if (suppression_flag(eco, e.phase, ctx.command) != flag) expected.push_back(e);
    if (with != expected)
      return std::string(to_string(eco)) + " " + std::string(to_string(ctx.command)) + " flag " + std::string(flag) +
             ": " + std::to_string(without.size()) + " rows unset, " + std::to_string(with.size()) +
             " set, expected " + std::to_string(expected.size());
  }
  return {};
}

/// Multiset inclusion of `sub` in `super`.
inline bool executions_subset(std::vector<TriggeredExecution> sub, std::vector<TriggeredExecution> super) {
  auto key = [](const TriggeredExecution& e) {
    return std::string(to_string(e.phase)) + '\0' + e.hook_or_file + '\0' + e.command_text + '\0' + e.source;
  };
  std::vector<std::string> a, b;
  for (const auto& e : sub) a.push_back(key(e));
  for (const auto& e : super) b.push_back(key(e));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace depsentry::testing
