#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/config.hpp"
#include "depsentry/lexscan.hpp"
#include "depsentry/model.hpp"
#include "depsentry/snapshot.hpp"

namespace depsentry {

/// A reference to a catalogued API.
struct ApiCall {
  /// Token index of the last chain segment (or the command literal).
  std::size_t token = 0;
  /// Token index where the receiver chain starts.
  std::size_t first = 0;
  /// Resolved dotted chain ("child_process.exec"), aliases expanded.
  std::string chain;
  ApiClass api_class = ApiClass::ProcessSpawn;
  std::string pattern;
  bool is_call = true;
  /// Argument bracket token indices; both equal `token` when there are none.
  std::size_t args_open = 0;
  std::size_t args_close = 0;
};

class DangerousApiCatalog {
 public:
  explicit DangerousApiCatalog(const Config& config);

  /// Catalogued API references in token order, one per token.
  std::vector<ApiCall> find_calls(const lex::TokenStream& stream) const;

  static bool is_dangerous(ApiClass c);

 private:
  std::map<Language, std::vector<ApiPattern>> patterns_;
};

/// Tokens, bodies and API references of one source file.
struct AnalyzedFile {
  std::string path;
  std::string_view content;
  lex::TokenStream stream;
  std::vector<lex::Body> bodies;
  std::vector<int> innermost;
  std::vector<ApiCall> calls;

  /// Callable body executing the token, or -1 at module level.
  int callable_of(std::size_t token) const;
  bool has_dangerous_call() const;
  /// First dangerous call, or nullptr.
  const ApiCall* first_dangerous() const;
  /// Source excerpt from the chain start to the argument close.
  std::string_view call_text(const ApiCall& call) const;
  SourceSpan call_span(const ApiCall& call) const;
};

/// Lazily analyzed source files of a snapshot. Not thread-safe.
class PackageAnalysis {
 public:
  PackageAnalysis(const PackageSnapshot& snapshot, const DangerousApiCatalog& catalog);

  /// nullptr when the path is absent, unreadable, binary, or has no language profile.
  const AnalyzedFile* file(const std::string& path);
  /// Every analyzable file, in path order.
  std::vector<const AnalyzedFile*> all();

  const PackageSnapshot& snapshot() const { return snap_; }
  const DangerousApiCatalog& catalog() const { return catalog_; }

 private:
  const PackageSnapshot& snap_;
  const DangerousApiCatalog& catalog_;
  std::map<std::string, std::unique_ptr<AnalyzedFile>, std::less<>> cache_;
};

/// Files that execute at install time (build scripts, extensions, hook targets, gemspecs).
std::vector<std::string> install_time_carriers(const PackageSnapshot& snapshot);

/// I1, I2 and I3 from manifest facts.
std::vector<Finding> detect_install_time(PackageAnalysis& analysis);
/// R1: code executed when a module is loaded.
std::vector<Finding> detect_import_side_effects(PackageAnalysis& analysis);
/// R2 and R3: dangerous calls in ordinary methods and in constructors/initializers.
std::vector<Finding> detect_hot_method_payloads(PackageAnalysis& analysis);
/// R4: Maven build plugins outside the allowlisted groups.
std::vector<Finding> detect_build_plugin(const ManifestFacts& facts, const MavenPolicy& policy);

/// All ACE detectors, filtered by applicability to the snapshot's ecosystem.
std::vector<Finding> detect_ace(PackageAnalysis& analysis, const MavenPolicy& policy);

}  // namespace depsentry
