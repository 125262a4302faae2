#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/model.hpp"
#include "depsentry/snapshot.hpp"

namespace depsentry {

/// Install hooks recognized per ecosystem; empty for ecosystems without hooks.
std::span<const std::string_view> hook_whitelist(Ecosystem eco);

/// Manifest-derived facts for the snapshot's ecosystem. Never throws for malformed
/// manifests: partial facts come back with a "ManifestUnparseable" note.
ManifestFacts extract_facts(const PackageSnapshot& snapshot);

/// Token-shape recognizers over setup.py: top-level statements outside setup(...),
/// cmdclass entries and imports of setuptools/distutils command classes.
SetupFacts extract_setup_facts(std::string_view source, std::string_view path = "setup.py");

/// Name and version declared by the package manifest; ecosystem copied from the snapshot.
PackageCoordinates read_coordinates(const PackageSnapshot& snapshot);

/// Fills `snapshot.facts` and the declared name/version.
void populate(PackageSnapshot& snapshot);

struct LockGraph {
  std::vector<DependencyEdge> edges;
  std::vector<std::string> notes;
};

/// Lockfile names per ecosystem, in lookup order.
std::span<const std::string_view> lockfile_names(Ecosystem eco);

/// Parses package-lock.json (v1-v3), composer.lock, Gemfile.lock, Cargo.lock, go.sum or
/// requirements.txt. Edges start at `root` when the format does not name the root package.
/// Throws LockfileUnparseable.
LockGraph parse_lockfile(Ecosystem eco, std::string_view text, const PackageCoordinates& root = {});

/// Splits a PEP 508 requirement ("name[extra]>=1.0; marker") into name and constraint.
DeclaredDependency parse_requirement(std::string_view requirement);

}  // namespace depsentry
