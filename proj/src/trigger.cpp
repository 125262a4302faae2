#include "depsentry/trigger.hpp"

#include <algorithm>
#include <array>

namespace depsentry {

namespace {

constexpr std::array<std::string_view, 7> kMavenLifecycle = {"validate", "compile", "test",   "package",
                                                             "verify",   "install", "deploy"};

constexpr std::array<std::string_view, 6> kNpmOrder = {"pre-install", "install",  "post-install",
                                                       "preprepare",  "prepare", "postprepare"};

Phase npm_phase(std::string_view hook) {
  if (hook == "pre-install") return Phase::PreInstall;
  if (hook == "install") return Phase::Install;
  if (hook == "post-install") return Phase::PostInstall;
  return Phase::PrepareFamily;
}

Phase composer_phase(std::string_view hook) {
  if (hook == "pre-install-cmd") return Phase::PreInstall;
  if (hook == "post-install-cmd") return Phase::PostInstall;
  if (hook.ends_with("autoload-dump")) return Phase::AutoloadDump;
  return Phase::UpdateCmd;
}

TriggeredExecution from_hook(const InstallHook& h, Phase phase) {
  return {phase, h.name, h.command, h.at.manifest_key.empty() ? h.at.location.path : h.at.manifest_key};
}

void npm(const ManifestFacts& facts, const InstallContext& ctx, Prediction& out) {
  if (ctx.ignore_scripts) {
    if (!facts.install_hooks.empty()) out.notes.push_back("ignore_scripts: npm runs no lifecycle scripts");
    return;
  }
  for (const auto name : kNpmOrder)
    for (const auto& h : facts.install_hooks)
      if (h.name == name) out.executions.push_back(from_hook(h, npm_phase(name)));
  for (const auto& h : facts.install_hooks) {
    if (h.name != "prepublish") continue;
    out.executions.push_back(from_hook(h, Phase::PrepareFamily));
    out.notes.push_back("prepublish is deprecated but still declared; listed last");
  }
}

void composer(const ManifestFacts& facts, const InstallContext& ctx, Prediction& out) {
  if (ctx.command == InstallCommand::Build) {
    out.notes.push_back("composer has no build command");
    return;
  }
  if (facts.distribution_kind == DistributionKind::Prebuilt) {
    if (!facts.install_hooks.empty()) out.notes.push_back("dist (prebuilt) package: composer skips the build and its hooks");
    return;
  }
  auto emit = [&](std::string_view name) {
    for (const auto& h : facts.install_hooks)
      if (h.name == name) out.executions.push_back(from_hook(h, composer_phase(name)));
  };
  emit("pre-install-cmd");
  emit("post-install-cmd");
  if (!ctx.no_autoloader) {
    emit("pre-autoload-dump");
    emit("post-autoload-dump");
  }
  if (ctx.command == InstallCommand::Update || !ctx.lockfile_present) {
    emit("pre-update-cmd");
    emit("post-update-cmd");
  }
}

void pypi(const ManifestFacts& facts, const InstallContext& ctx, Prediction& out) {
  if (facts.distribution_kind == DistributionKind::Prebuilt) {
    out.notes.push_back("prebuilt distribution (wheel): no installation script runs");
    return;
  }
  if (ctx.only_binary_all) {
    out.install_fails = true;
    out.notes.push_back("only_binary_all: no prebuilt distribution available, the install fails");
    return;
  }
  if (!facts.build_script) return;
  out.executions.push_back({Phase::BuildScript, facts.build_script->path, "setup.py runs", facts.build_script->path});
  for (const auto& o : facts.cmdclass_overrides)
    out.executions.push_back({Phase::BuildScript, "cmdclass." + o.command, o.symbol + ".run()", facts.build_script->path});
}

void cargo(const ManifestFacts& facts, const InstallContext& ctx, Prediction& out) {
  if (!facts.build_script) return;
  if (ctx.command == InstallCommand::Update) {
    out.notes.push_back("cargo update resolves versions without building");
    return;
  }
  out.executions.push_back({Phase::BuildScript, facts.build_script->path,
                            "build script compiled and run before the package build",
                            facts.build_script->at.manifest_key.empty() ? facts.build_script->path
                                                                         : facts.build_script->at.manifest_key});
}

void rubygems(const ManifestFacts& facts, Prediction& out) {
  for (const auto& e : facts.build_extensions)
    out.executions.push_back({Phase::BuildExtension, e.path, "extension built from " + e.path,
                              e.at.location.path.empty() ? e.path : e.at.location.path});
}

void maven(const ManifestFacts& facts, const InstallContext& ctx, Prediction& out) {
  if (ctx.command == InstallCommand::Update) {
    out.notes.push_back("maven has no update command; no lifecycle phase runs");
    return;
  }
  const std::string_view last = ctx.command == InstallCommand::Build ? "package" : "install";
  const auto reach = std::find(kMavenLifecycle.begin(), kMavenLifecycle.end(), last) - kMavenLifecycle.begin();
  for (const auto& p : facts.plugins) {
    const std::string coords = p.group + ":" + p.artifact + (p.version.empty() ? "" : ":" + p.version);
    if (p.phases.empty()) {
      out.executions.push_back({Phase::BuildPlugin, coords, "no explicit phase (plugin default binding)", "pom.xml build.plugins.plugin"});
      out.notes.push_back("warning: " + coords + " declares no phase; its default binding is not known statically");
      continue;
    }
    for (const auto& ph : p.phases) {
      const auto it = std::find(kMavenLifecycle.begin(), kMavenLifecycle.end(), ph);
      if (it == kMavenLifecycle.end()) {
        out.executions.push_back({Phase::BuildPlugin, coords, "bound to " + ph, "pom.xml build.plugins.plugin"});
        out.notes.push_back("warning: " + coords + " is bound to phase \"" + ph + "\" outside the default lifecycle");
      } else if (it - kMavenLifecycle.begin() <= reach) {
        out.executions.push_back({Phase::BuildPlugin, coords, "bound to " + ph, "pom.xml build.plugins.plugin"});
      }
    }
  }
}

}  // namespace

std::string_view to_string(InstallCommand c) {
  switch (c) {
    case InstallCommand::Install: return "install";
    case InstallCommand::Update: return "update";
    case InstallCommand::Build: return "build";
  }
  return "install";
}

std::optional<InstallCommand> install_command_from_string(std::string_view s) {
  if (s == "install") return InstallCommand::Install;
  if (s == "update") return InstallCommand::Update;
  if (s == "build") return InstallCommand::Build;
  return std::nullopt;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::PreInstall: return "pre-install";
    case Phase::Install: return "install";
    case Phase::PostInstall: return "post-install";
    case Phase::PrepareFamily: return "prepare-family";
    case Phase::BuildScript: return "build-script";
    case Phase::BuildExtension: return "build-extension";
    case Phase::AutoloadDump: return "autoload-dump";
    case Phase::UpdateCmd: return "update-cmd";
    case Phase::BuildPlugin: return "build-plugin";
  }
  return "install";
}

std::optional<Phase> phase_from_string(std::string_view s) {
  for (Phase p : {Phase::PreInstall, Phase::Install, Phase::PostInstall, Phase::PrepareFamily,
                  Phase::BuildScript, Phase::BuildExtension, Phase::AutoloadDump, Phase::UpdateCmd,
                  Phase::BuildPlugin})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::string_view suppression_flag(Ecosystem eco, Phase phase, InstallCommand command) {
  switch (eco) {
    case Ecosystem::Npm: return "ignore_scripts";
    case Ecosystem::PyPI: return "only_binary_all";
    case Ecosystem::Composer:
      if (phase == Phase::AutoloadDump) return "no_autoloader";
      if (phase == Phase::UpdateCmd)
        return command == InstallCommand::Update ? "none available" : "lockfile_present";
      return "none available";
    default: return "none available";
  }
}

Prediction predict_executions(const ManifestFacts& facts, Ecosystem eco, const InstallContext& ctx) {
  Prediction out;
  auto unused = [&](bool set, std::string_view flag) {
    if (set) out.unused_flags.push_back(std::string(flag));
  };
  unused(ctx.ignore_scripts && eco != Ecosystem::Npm, "ignore_scripts");
  unused(ctx.only_binary_all && eco != Ecosystem::PyPI, "only_binary_all");
  unused(ctx.no_autoloader && eco != Ecosystem::Composer, "no_autoloader");
  unused(ctx.lockfile_present && eco != Ecosystem::Composer, "lockfile_present");
  for (const auto& f : out.unused_flags)
    out.notes.push_back("flag " + f + " has no effect for " + std::string(to_string(eco)));
  switch (eco) {
    case Ecosystem::Npm: npm(facts, ctx, out); break;
    case Ecosystem::Composer: composer(facts, ctx, out); break;
    case Ecosystem::PyPI: pypi(facts, ctx, out); break;
    case Ecosystem::Cargo: cargo(facts, ctx, out); break;
    case Ecosystem::RubyGems: rubygems(facts, out); break;
    case Ecosystem::Go: out.notes.push_back("go runs no package code on installation"); break;
    case Ecosystem::Maven: maven(facts, ctx, out); break;
  }
  return out;
}

SimulationReport simulate_report(const PackageSnapshot& snapshot, const InstallContext& ctx) {
  const ManifestFacts& facts = snapshot.facts;
  Prediction p = predict_executions(facts, snapshot.coords.ecosystem, ctx);
  SimulationReport r;
  r.package = snapshot.coords;
  r.context = ctx;
  r.install_fails = p.install_fails;
  r.notes = std::move(p.notes);
  r.unused_flags = std::move(p.unused_flags);
  for (auto& e : p.executions) {
    const std::string flag(suppression_flag(snapshot.coords.ecosystem, e.phase, ctx.command));
    r.rows.push_back({std::move(e), flag});
  }
  return r;
}

}  // namespace depsentry
