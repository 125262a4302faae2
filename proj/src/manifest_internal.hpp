#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depsentry/lexscan.hpp"
#include "depsentry/snapshot.hpp"
#include "json.hpp"

namespace depsentry::detail {

/// One object member found by a tolerant structural walk over JSON text.
struct JsonMember {
  std::vector<std::string> path;
  std::size_t key_start = 0;
  std::size_t value_start = 0;
  std::size_t value_end = 0;
  std::optional<std::string> string_value;
};

/// Walks braces, brackets and strings only, so stray non-JSON lines do not stop it.
std::vector<JsonMember> json_members(std::string_view raw);

struct LenientJson {
  nlohmann::json doc;
  bool ok = false;
  std::string error;
  std::vector<std::string> notes;
};

/// Strict parse first; on failure drops elision lines ("...") and trailing commas and retries.
LenientJson parse_json_lenient(std::string_view raw, std::string_view path);

Located locate(std::string_view path, std::string_view content, std::size_t begin, std::size_t end,
               std::string manifest_key = {});
Located locate_tokens(std::string_view path, std::string_view content, const lex::Token& first,
                      const lex::Token& last, std::string manifest_key = {});

/// Text of the (1-based) line containing `offset`, without the newline.
std::string_view line_at(std::string_view content, std::size_t offset);

/// Files of a snapshot under `root` whose relative path satisfies `pred`, in path order.
template <typename Pred>
std::vector<std::string> files_where(const PackageSnapshot& snap, Pred pred) {
  std::vector<std::string> out;
  for (const auto& [path, file] : snap.files) {
    if (file.symlink || path.find("!/") != std::string::npos) continue;
    if (!path.starts_with(snap.root)) continue;
    if (pred(std::string_view(path).substr(snap.root.size()))) out.push_back(path);
  }
  return out;
}

bool in_test_tree(std::string_view rel);

void python_facts(const PackageSnapshot& snap, ManifestFacts& facts);
void python_coordinates(const PackageSnapshot& snap, PackageCoordinates& coords);

}  // namespace depsentry::detail
