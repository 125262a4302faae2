#include "depsentry/model.hpp"

#include <algorithm>

#include "depsentry/errors.hpp"

namespace depsentry {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoEcosystemDetected: return "NoEcosystemDetected";
    case ErrorCode::ArchiveCorrupt: return "ArchiveCorrupt";
    case ErrorCode::PathTraversalRejected: return "PathTraversalRejected";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::FetchDisabled: return "FetchDisabled";
    case ErrorCode::LockfileUnparseable: return "LockfileUnparseable";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Ecosystem e) {
  switch (e) {
    case Ecosystem::Npm: return "npm";
    case Ecosystem::PyPI: return "pypi";
    case Ecosystem::Composer: return "composer";
    case Ecosystem::RubyGems: return "rubygems";
    case Ecosystem::Cargo: return "cargo";
    case Ecosystem::Go: return "go";
    case Ecosystem::Maven: return "maven";
  }
  return "npm";
}

std::optional<Ecosystem> ecosystem_from_string(std::string_view s) {
  for (auto e : kAllEcosystems) {
    if (to_string(e) == s) return e;
  }
  if (s == "pip") return Ecosystem::PyPI;
  if (s == "gem") return Ecosystem::RubyGems;
  if (s == "mvn") return Ecosystem::Maven;
  return std::nullopt;
}

namespace {

constexpr std::array<std::pair<TechniqueId, std::string_view>, 23> kIdNames = {{
    {TechniqueId::I1, "I1"},
    {TechniqueId::I2, "I2"},
    {TechniqueId::I3, "I3"},
    {TechniqueId::R1, "R1"},
    {TechniqueId::R2, "R2"},
    {TechniqueId::R3, "R3"},
    {TechniqueId::R4, "R4"},
    {TechniqueId::EvDoEnc, "EV-DO-ENC"},
    {TechniqueId::EvDoCmp, "EV-DO-CMP"},
    {TechniqueId::EvDoCry, "EV-DO-CRY"},
    {TechniqueId::EvDoBin, "EV-DO-BIN"},
    {TechniqueId::EvDoSplit, "EV-DO-SPLIT"},
    {TechniqueId::EvStId, "EV-ST-ID"},
    {TechniqueId::EvStFiles, "EV-ST-FILES"},
    {TechniqueId::EvStStage2, "EV-ST-STAGE2"},
    {TechniqueId::EvStDeptree, "EV-ST-DEPTREE"},
    {TechniqueId::EvStVis, "EV-ST-VIS"},
    {TechniqueId::EvStUni, "EV-ST-UNI"},
    {TechniqueId::EvStPoly, "EV-ST-POLY"},
    {TechniqueId::EvDyPack, "EV-DY-PACK"},
    {TechniqueId::EvDySteg, "EV-DY-STEG"},
    {TechniqueId::EvDyMod, "EV-DY-MOD"},
    {TechniqueId::EvWs, "EV-WS"},
}};

using S = Severity;
using C = Confidence;

// Install-time techniques only need an install to fire, so they default to high;
// runtime techniques need the victim to reach the carrier and default to medium.
const std::array<TechniqueInfo, 23> kCatalog = {{
    {TechniqueId::I1, "Run command/scripts leveraging install-hooks", "install-time", S::High,
     C::Moderate,
     "Review every install hook of direct and transitive dependencies; install with "
     "--ignore-scripts (npm) where possible. Composer: a committed composer.lock skips the "
     "update-cmd hooks and --no-autoloader skips the autoload-dump hooks."},
    {TechniqueId::I2, "Run code in build script", "install-time", S::High, C::Moderate,
     "Prefer pre-built distributions (pip --only-binary :all:, accepting that packages without "
     "wheels fail to install). Audit setup.py and Cargo build scripts (build.rs or the "
     "Cargo.toml build path) of every dependency."},
    {TechniqueId::I3, "Run code in build extension(s)", "install-time", S::High, C::Moderate,
     "gem install cannot skip extensions; audit every extension listed in the gemspec, for "
     "direct and transitive gems. gem build runs them too."},
    {TechniqueId::R1, "Insert code in methods/scripts executed when importing a module",
     "runtime", S::Medium, C::Weak,
     "Audit module entry points that run on import: npm main scripts, Python __init__.py, "
     "required Ruby files, Go init() functions, function-initialized package variables and "
     "blank imports."},
    {TechniqueId::R2, "Insert code in commonly-used methods", "runtime", S::Medium, C::Weak,
     "Review process, eval and network calls inside frequently invoked library methods."},
    {TechniqueId::R3, "Insert code in constructor methods (of popular classes)", "runtime",
     S::Medium, C::Moderate,
     "Review constructors and Java static/instance initializers that perform process, eval or "
     "network operations; watch for typosquatted copies of popular classes."},
    {TechniqueId::R4, "Run code of 3rd-party dependency as build plugin", "runtime", S::Medium,
     C::Weak,
     "Pin build plugins to trusted groups; reject plugins that reuse well-known plugin names "
     "under foreign group ids."},
    {TechniqueId::EvDoEnc, "Encoding", "data-obfuscation", S::Low, C::Moderate,
     "Decode the literal and review its use; encoded strings hide URLs and commands from "
     "string scanning."},
    {TechniqueId::EvDoCmp, "Compression", "data-obfuscation", S::Medium, C::Moderate,
     "Decompress embedded data offline and review what it becomes at runtime."},
    {TechniqueId::EvDoCry, "Encryption", "data-obfuscation", S::Low, C::Weak,
     "High-entropy literal: determine whether it is ciphertext or compressed data and where "
     "its key comes from."},
    {TechniqueId::EvDoBin, "Binary Arrays", "data-obfuscation", S::Medium, C::Moderate,
     "Decode the numeric array (including single-byte XOR) and review the recovered string."},
    {TechniqueId::EvDoSplit, "Reordering of Data", "data-obfuscation", S::Medium, C::Moderate,
     "A sensitive string is assembled from small fragments; review the joined value."},
    {TechniqueId::EvStId, "Renaming Identifiers", "static-transformation", S::Medium,
     C::Moderate, "Identifiers look machine-renamed; treat the file as obfuscated and review it."},
    {TechniqueId::EvStFiles, "Split Code into Multiple Files", "static-transformation",
     S::Info, C::Weak,
     "Functionality is fragmented across many small files or nested archives; review them "
     "together."},
    {TechniqueId::EvStStage2, "Second-Stage Payloads", "static-transformation", S::High,
     C::Moderate,
     "Code downloads content and writes it as an executable or evaluates it; the payload is "
     "not in the package."},
    {TechniqueId::EvStDeptree, "Hide Code into Dependency Tree", "static-transformation",
     S::Medium, C::Weak,
     "Findings sit in transitive dependencies; scan the whole tree, not only direct "
     "dependencies."},
    {TechniqueId::EvStVis, "Visual Deception (whitespace)", "static-transformation", S::Medium,
     C::Moderate, "Long whitespace runs push code out of view; inspect the full line."},
    {TechniqueId::EvStUni, "Visual Deception (Unicode homoglyphs and control characters)",
     "static-transformation", S::Medium, C::Moderate,
     "Bidirectional controls, zero-width characters or homoglyph identifiers make displayed "
     "code differ from executed code."},
    {TechniqueId::EvStPoly, "Polyglot Malwares and In-Line Assembly", "static-transformation",
     S::Low, C::Weak,
     "Code in a language foreign to the ecosystem, or inline assembly, needs separate review."},
    {TechniqueId::EvDyPack, "Encoding, Compression and Encryption of Code",
     "dynamic-transformation", S::High, C::Moderate,
     "Data is decoded, decompressed or decrypted and then executed; recover and review the "
     "executed code."},
    {TechniqueId::EvDySteg, "Steganography", "dynamic-transformation", S::Low, C::Weak,
     "A media file is read and fed into a decode/eval chain; inspect the file for hidden data."},
    {TechniqueId::EvDyMod, "Dynamic Code Modification", "dynamic-transformation", S::High,
     C::Moderate,
     "Built-in or foreign-module functions are replaced at runtime (monkey patching); review "
     "the replacement."},
    {TechniqueId::EvWs, "Warning Suppression (empty catch block)", "warning-suppression",
     S::Low, C::Moderate,
     "A dangerous call is wrapped in an exception handler that discards errors silently."},
}};

}  // namespace

std::string_view to_string(TechniqueId id) {
  for (const auto& [k, v] : kIdNames) {
    if (k == id) return v;
  }
  return "?";
}

std::optional<TechniqueId> technique_from_string(std::string_view s) {
  for (const auto& [k, v] : kIdNames) {
    if (v == s) return k;
  }
  return std::nullopt;
}

bool is_ace_technique(TechniqueId id) {
  return std::find(kAceTechniques.begin(), kAceTechniques.end(), id) != kAceTechniques.end();
}

bool is_install_time(TechniqueId id) {
  return id == TechniqueId::I1 || id == TechniqueId::I2 || id == TechniqueId::I3;
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Info: return "info";
    case Severity::Low: return "low";
    case Severity::Medium: return "medium";
    case Severity::High: return "high";
    case Severity::Critical: return "critical";
  }
  return "info";
}

std::string_view to_string(Confidence c) {
  switch (c) {
    case Confidence::Weak: return "weak";
    case Confidence::Moderate: return "moderate";
    case Confidence::Strong: return "strong";
  }
  return "weak";
}

std::optional<Severity> severity_from_string(std::string_view s) {
  for (auto v : {Severity::Info, Severity::Low, Severity::Medium, Severity::High,
                 Severity::Critical}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<Confidence> confidence_from_string(std::string_view s) {
  for (auto v : {Confidence::Weak, Confidence::Moderate, Confidence::Strong}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string PackageCoordinates::display() const {
  if (version.empty()) return name;
  return name + "@" + version;
}

std::string clip_evidence(std::string_view text) {
  if (text.size() <= kMaxEvidence) return std::string(text);
  std::size_t cut = kMaxEvidence;
  // back off continuation bytes so the excerpt stays valid UTF-8
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return std::string(text.substr(0, cut));
}

std::span<const TechniqueInfo> technique_catalog() { return kCatalog; }

const TechniqueInfo& lookup(TechniqueId id) {
  for (const auto& info : kCatalog) {
    if (info.id == id) return info;
  }
  throw std::out_of_range("unknown technique id");
}

Finding make_finding(TechniqueId id, SourceSpan location, std::string_view evidence,
                     std::string message) {
  const auto& info = lookup(id);
  Finding f;
  f.id = id;
  f.severity = info.severity;
  f.confidence = info.confidence;
  f.location = std::move(location);
  f.evidence = clip_evidence(evidence);
  f.message = message.empty() ? std::string(info.title) : std::move(message);
  f.remediation_ref = std::string(to_string(id));
  return f;
}

bool applicability(Ecosystem ecosystem, TechniqueId technique) {
  using T = TechniqueId;
  switch (ecosystem) {
    case Ecosystem::Npm:
      return technique == T::I1 || technique == T::R1 || technique == T::R2 || technique == T::R3;
    case Ecosystem::PyPI:
      return technique == T::I2 || technique == T::R1 || technique == T::R2 || technique == T::R3;
    case Ecosystem::Composer:
      return technique == T::I1 || technique == T::R2 || technique == T::R3;
    case Ecosystem::RubyGems:
      return technique == T::I3 || technique == T::R1 || technique == T::R2 || technique == T::R3;
    case Ecosystem::Cargo:
      return technique == T::I2 || technique == T::R2 || technique == T::R3;
    case Ecosystem::Go:
      return technique == T::R1 || technique == T::R2 || technique == T::R3;
    case Ecosystem::Maven:
      return technique == T::R2 || technique == T::R3 || technique == T::R4;
  }
  return false;
}

}  // namespace depsentry
