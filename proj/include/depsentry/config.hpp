#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "depsentry/language.hpp"
#include "json.hpp"

namespace depsentry {

/// Detector thresholds; all of them are policy, overridable per run.
struct Thresholds {
  double entropy_min = 4.5;
  std::size_t opaque_min_length = 24;
  bool opaque_allow_whitespace = false;
  std::size_t encoded_min_length = 16;
  double printable_fraction_min = 0.75;
  int proximity_lines = 40;
  std::size_t split_min_pieces = 4;
  std::size_t split_max_piece_length = 8;
  int split_window_lines = 20;
  std::size_t binary_array_min_length = 16;
  std::size_t xor_word_min_length = 4;
  std::size_t identifier_min_length = 6;
  std::size_t identifier_max_distinct = 3;
  double identifier_score_min = 0.4;
  std::size_t identifier_min_count = 10;
  std::size_t whitespace_run_min = 40;
  std::size_t max_code_column = 500;
  std::size_t fragment_min_files = 5;
  std::size_t fragment_max_lines = 15;
};

struct IngestLimits {
  std::uint64_t max_file_size = 16ull << 20;
  int max_archive_depth = 1;
  std::uint64_t max_total_bytes = 1ull << 30;
  std::size_t max_entries = 200000;
};

enum class ApiClass {
  ProcessSpawn,
  CodeEval,
  Network,
  FilesystemSensitive,
  EnvRead,
  Decode,
  Decompress,
  Decrypt,
  FileWrite,
  FileRead,
};

std::string_view to_string(ApiClass c);

struct ApiPattern {
  /// Dotted name with "::" folded to "."; matched exactly or as a dotted suffix.
  std::string pattern;
  ApiClass api_class = ApiClass::ProcessSpawn;
  bool exact = false;
  bool call = true;
};

struct SensitiveLists {
  std::vector<std::string> url_prefixes;
  std::vector<std::string> shell_words;
  std::vector<std::string> credential_paths;
  std::vector<std::string> executable_suffixes;
};

struct BuiltinLists {
  std::vector<std::string> python_builtins;
  std::vector<std::string> python_patchable_modules;
  std::vector<std::string> javascript_patchable_targets;
  std::vector<std::string> javascript_global_objects;
  std::vector<std::string> javascript_prototype_owners;
  std::vector<std::string> ruby_core_classes;
};

struct MavenPolicy {
  std::vector<std::string> allowlist;
  std::vector<std::string> well_known_plugins;
};

/// Scanner configuration: the embedded defaults, merged with an optional user file and
/// DEPSENTRY_* environment overrides.
class Config {
 public:
  /// Built-in defaults.
  static Config defaults();
  /// Defaults deep-merged with the JSON document at `path`.
  static Config load(const std::filesystem::path& path);
  static Config from_json(const nlohmann::json& overrides);

  /// Applies DEPSENTRY_<KEY>[__<SUBKEY>...]=value overrides; values are parsed as JSON
  /// when possible and taken as strings otherwise. Throws ConfigInvalid on bad values.
  void apply_env(const std::map<std::string, std::string>& env);
  void apply_process_env();

  const nlohmann::json& document() const { return doc_; }
  const Thresholds& thresholds() const { return thresholds_; }
  const IngestLimits& ingest() const { return ingest_; }
  const std::vector<ApiPattern>& api_patterns(Language lang) const;
  const SensitiveLists& sensitive() const { return sensitive_; }
  const BuiltinLists& builtins() const { return builtins_; }
  const MavenPolicy& maven() const { return maven_; }
  const nlohmann::json& registry() const { return doc_.at("registry"); }

  void set_max_archive_depth(int depth);

 private:
  explicit Config(nlohmann::json doc);
  void rebuild();

  nlohmann::json doc_;
  Thresholds thresholds_;
  IngestLimits ingest_;
  std::map<Language, std::vector<ApiPattern>> apis_;
  SensitiveLists sensitive_;
  BuiltinLists builtins_;
  MavenPolicy maven_;
};

/// Recursive object merge; non-object values in `patch` replace those in `base`.
void merge_json(nlohmann::json& base, const nlohmann::json& patch);

}  // namespace depsentry
