#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace depsentry::archive {

enum class Format { Tar, TarGz, Zip };

std::string_view to_string(Format f);
/// Recognizes gzip, zip and ustar magic bytes.
std::optional<Format> sniff(std::string_view bytes);

struct Limits {
  std::uint64_t max_file_size = 16ull << 20;
  std::uint64_t max_total_bytes = 1ull << 30;
  std::size_t max_entries = 200000;
};

struct Entry {
  /// Normalized relative path.
  std::string path;
  std::string content;
  std::uint64_t size = 0;
  bool directory = false;
  bool symlink = false;
  bool content_skipped = false;
  std::string link_target;
};

struct Listing {
  std::vector<Entry> entries;
  std::vector<std::string> notes;
};

/// Normalizes an archive member name: '\\' becomes '/', "." segments drop, ".." collapses.
/// Throws PathTraversalRejected for absolute names or names escaping the root.
std::string normalize_path(std::string_view raw);

/// Inflates a gzip stream; throws ArchiveCorrupt on malformed data or when the output
/// would exceed `max_output`.
std::string gunzip(std::string_view bytes, std::uint64_t max_output);

Listing read_tar(std::string_view bytes, const Limits& limits);
Listing read_zip(std::string_view bytes, const Limits& limits);
Listing read(std::string_view bytes, Format format, const Limits& limits);

/// Archive formats recognized by file name (".tgz", ".tar.gz", ".gem", ".whl", ".jar", ...).
std::optional<Format> format_for_name(std::string_view name);

}  // namespace depsentry::archive
