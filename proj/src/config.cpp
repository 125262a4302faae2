#include "depsentry/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "depsentry/errors.hpp"
#include "depsentry/text.hpp"

extern char** environ;

namespace depsentry {

namespace detail {
extern const char* const kDefaultConfigJson;
}

using nlohmann::json;

std::string_view to_string(ApiClass c) {
  switch (c) {
    case ApiClass::ProcessSpawn: return "process-spawn";
    case ApiClass::CodeEval: return "code-eval";
    case ApiClass::Network: return "network";
    case ApiClass::FilesystemSensitive: return "filesystem-sensitive";
    case ApiClass::EnvRead: return "env-read";
    case ApiClass::Decode: return "decode";
    case ApiClass::Decompress: return "decompress";
    case ApiClass::Decrypt: return "decrypt";
    case ApiClass::FileWrite: return "file-write";
    case ApiClass::FileRead: return "file-read";
  }
  return "process-spawn";
}

namespace {

ApiClass api_class_from(const std::string& s) {
  for (auto c : {ApiClass::ProcessSpawn, ApiClass::CodeEval, ApiClass::Network,
                 ApiClass::FilesystemSensitive, ApiClass::EnvRead, ApiClass::Decode,
                 ApiClass::Decompress, ApiClass::Decrypt, ApiClass::FileWrite,
                 ApiClass::FileRead}) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown API class '" + s + "'");
}

std::string fold_separators(std::string_view p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.compare(i, 2, "::") == 0) {
      out.push_back('.');
      ++i;
    } else if (p.compare(i, 2, "->") == 0) {
      out.push_back('.');
      ++i;
    } else {
      out.push_back(p[i]);
    }
  }
  return out;
}

std::vector<std::string> string_list(const json& doc, const json::json_pointer& ptr) {
  std::vector<std::string> out;
  if (!doc.contains(ptr)) return out;
  for (const auto& v : doc.at(ptr)) out.push_back(v.get<std::string>());
  return out;
}

template <typename T>
void read_value(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void merge_json(json& base, const json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
      merge_json(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

Config::Config(json doc) : doc_(std::move(doc)) { rebuild(); }

Config Config::defaults() { return Config(json::parse(detail::kDefaultConfigJson)); }

Config Config::from_json(const json& overrides) {
  auto doc = json::parse(detail::kDefaultConfigJson);
  merge_json(doc, overrides);
  return Config(std::move(doc));
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json user;
  try {
    user = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
  return from_json(user);
}

void Config::apply_env(const std::map<std::string, std::string>& env) {
  constexpr std::string_view prefix = "DEPSENTRY_";
  for (const auto& [key, value] : env) {
    if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) continue;
    std::string pointer;
    std::string rest = key.substr(prefix.size());
    std::size_t start = 0;
    while (start <= rest.size()) {
      auto sep = rest.find("__", start);
      std::string part = rest.substr(start, sep == std::string::npos ? std::string::npos
                                                                     : sep - start);
      pointer += "/" + text::to_lower(part);
      if (sep == std::string::npos) break;
      start = sep + 2;
    }
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;
    }
    doc_[json::json_pointer(pointer)] = parsed;
  }
  try {
    rebuild();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("environment override: ") + e.what());
  }
}

void Config::apply_process_env() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    if (entry.rfind("DEPSENTRY_", 0) != 0) continue;
    auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  if (!env.empty()) apply_env(env);
}

const std::vector<ApiPattern>& Config::api_patterns(Language lang) const {
  static const std::vector<ApiPattern> empty;
  auto it = apis_.find(lang);
  return it == apis_.end() ? empty : it->second;
}

void Config::set_max_archive_depth(int depth) {
  doc_["ingest"]["max_archive_depth"] = depth;
  ingest_.max_archive_depth = depth;
}

void Config::rebuild() {
  try {
    const auto& t = doc_.at("thresholds");
    Thresholds th;
    read_value(t, "entropy_min", th.entropy_min);
    read_value(t, "opaque_min_length", th.opaque_min_length);
    read_value(t, "opaque_allow_whitespace", th.opaque_allow_whitespace);
    read_value(t, "encoded_min_length", th.encoded_min_length);
    read_value(t, "printable_fraction_min", th.printable_fraction_min);
    read_value(t, "proximity_lines", th.proximity_lines);
    read_value(t, "split_min_pieces", th.split_min_pieces);
    read_value(t, "split_max_piece_length", th.split_max_piece_length);
    read_value(t, "split_window_lines", th.split_window_lines);
    read_value(t, "binary_array_min_length", th.binary_array_min_length);
    read_value(t, "xor_word_min_length", th.xor_word_min_length);
    read_value(t, "identifier_min_length", th.identifier_min_length);
    read_value(t, "identifier_max_distinct", th.identifier_max_distinct);
    read_value(t, "identifier_score_min", th.identifier_score_min);
    read_value(t, "identifier_min_count", th.identifier_min_count);
    read_value(t, "whitespace_run_min", th.whitespace_run_min);
    read_value(t, "max_code_column", th.max_code_column);
    read_value(t, "fragment_min_files", th.fragment_min_files);
    read_value(t, "fragment_max_lines", th.fragment_max_lines);
    thresholds_ = th;

    IngestLimits lim;
    if (doc_.contains("ingest")) {
      const auto& in = doc_.at("ingest");
      read_value(in, "max_file_size", lim.max_file_size);
      read_value(in, "max_archive_depth", lim.max_archive_depth);
      read_value(in, "max_total_bytes", lim.max_total_bytes);
      read_value(in, "max_entries", lim.max_entries);
    }
    ingest_ = lim;

    apis_.clear();
    for (auto it = doc_.at("dangerous_api").begin(); it != doc_.at("dangerous_api").end(); ++it) {
      auto lang = language_from_string(it.key());
      if (!lang) throw Error(ErrorCode::ConfigInvalid, "unknown language '" + it.key() + "'");
      auto& list = apis_[*lang];
      for (const auto& entry : it.value()) {
        ApiPattern p;
        std::string raw = entry.at("pattern").get<std::string>();
        if (!raw.empty() && raw.front() == '=') {
          p.exact = true;
          raw.erase(0, 1);
        }
        p.pattern = fold_separators(raw);
        p.api_class = api_class_from(entry.at("class").get<std::string>());
        p.call = entry.value("call", true);
        list.push_back(std::move(p));
      }
    }

    sensitive_.url_prefixes = string_list(doc_, "/sensitive/url_prefixes"_json_pointer);
    sensitive_.shell_words = string_list(doc_, "/sensitive/shell_words"_json_pointer);
    sensitive_.credential_paths = string_list(doc_, "/sensitive/credential_paths"_json_pointer);
    sensitive_.executable_suffixes =
        string_list(doc_, "/sensitive/executable_suffixes"_json_pointer);

    builtins_.python_builtins = string_list(doc_, "/builtins/python_builtins"_json_pointer);
    builtins_.python_patchable_modules =
        string_list(doc_, "/builtins/python_patchable_modules"_json_pointer);
    builtins_.javascript_patchable_targets =
        string_list(doc_, "/builtins/javascript_patchable_targets"_json_pointer);
    builtins_.javascript_global_objects =
        string_list(doc_, "/builtins/javascript_global_objects"_json_pointer);
    builtins_.javascript_prototype_owners =
        string_list(doc_, "/builtins/javascript_prototype_owners"_json_pointer);
    builtins_.ruby_core_classes = string_list(doc_, "/builtins/ruby_core_classes"_json_pointer);

    maven_.allowlist = string_list(doc_, "/maven/allowlist"_json_pointer);
    maven_.well_known_plugins = string_list(doc_, "/maven/well_known_plugins"_json_pointer);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
}

}  // namespace depsentry
