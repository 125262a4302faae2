#include "depsentry/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "depsentry/errors.hpp"
#include "depsentry/text.hpp"

namespace depsentry {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kGemMetadata = ".gem/metadata.yaml";

int precedence(Ecosystem e) {
  return static_cast<int>(std::find(kAllEcosystems.begin(), kAllEcosystems.end(), e) -
                          kAllEcosystems.begin());
}

bool is_nested_member(std::string_view path) { return path.find("!/") != std::string_view::npos; }

std::string size_note(const std::string& path, std::uint64_t size) {
  return "content skipped (" + std::to_string(size) + " bytes over the file size cap): " + path;
}

struct Builder {
  const IngestLimits& limits;
  PackageSnapshot snap;
  std::uint64_t total = 0;

  void add(const std::string& path, SnapshotFile file) {
    if (snap.files.size() >= limits.max_entries)
      throw Error(ErrorCode::ArchiveCorrupt, "entry count exceeds limit");
    if (file.content_skipped) snap.notes.push_back(size_note(path, file.size));
    snap.files[path] = std::move(file);
  }

  void add_listing(archive::Listing listing, const std::string& prefix) {
    for (auto& n : listing.notes) snap.notes.push_back(std::move(n));
    for (auto& e : listing.entries) {
      if (e.directory) continue;
      SnapshotFile f;
      f.size = e.size;
      f.content_skipped = e.content_skipped;
      f.symlink = e.symlink;
      f.link_target = std::move(e.link_target);
      f.content = std::move(e.content);
      add(prefix + e.path, std::move(f));
    }
  }

  /// Lists nested archives and extracts them while depth allows.
  void expand_nested(int level) {
    std::vector<std::string> pending;
    for (const auto& [path, file] : snap.files) {
      if (file.symlink || !archive::format_for_name(path)) continue;
      if (std::find(snap.nested_archives.begin(), snap.nested_archives.end(), path) !=
          snap.nested_archives.end())
        continue;
      pending.push_back(path);
    }
    for (const auto& path : pending) {
      snap.nested_archives.push_back(path);
      if (level >= limits.max_archive_depth) continue;
      const SnapshotFile& file = snap.files.at(path);
      if (file.content_skipped) continue;
      const auto format = archive::format_for_name(path);
      archive::Limits lim{limits.max_file_size, limits.max_total_bytes, limits.max_entries};
      try {
        add_listing(archive::read(file.content, *format, lim), path + "!/");
      } catch (const Error& e) {
        if (e.code() == ErrorCode::PathTraversalRejected) throw;
        snap.notes.push_back("nested archive not extracted (" + std::string(e.what()) + "): " + path);
      }
    }
    if (level < limits.max_archive_depth && !pending.empty()) expand_nested(level + 1);
  }

  PackageSnapshot finish() {
    std::vector<std::string> paths;
    for (const auto& [path, f] : snap.files)
      if (!is_nested_member(path)) paths.push_back(path);
    if (paths.empty()) throw Error(ErrorCode::NoEcosystemDetected, "package contains no files");
    EcosystemDetection d = detect(paths);
    snap.coords.ecosystem = d.ecosystem;
    snap.root = d.root;
    for (auto& n : d.notes) snap.notes.push_back(std::move(n));
    std::sort(snap.nested_archives.begin(), snap.nested_archives.end());
    return std::move(snap);
  }
};

/// Removes a single top-level directory shared by every entry ("package/" in npm tarballs).
void strip_common_root(archive::Listing& listing) {
  std::optional<std::string> common;
  bool any_file = false;
  for (const auto& e : listing.entries) {
    const auto slash = e.path.find('/');
    if (slash == std::string::npos) {
      if (e.directory) {
        if (common && *common != e.path) return;
        common = e.path;
        continue;
      }
      return;
    }
    const std::string head = e.path.substr(0, slash);
    if (common && *common != head) return;
    common = head;
    any_file = any_file || !e.directory;
  }
  if (!common || !any_file) return;
  std::vector<archive::Entry> kept;
  for (auto& e : listing.entries) {
    if (e.path == *common) continue;
    e.path = e.path.substr(common->size() + 1);
    kept.push_back(std::move(e));
  }
  listing.entries = std::move(kept);
}

bool is_gem_layout(const archive::Listing& l) {
  bool data = false, meta = false;
  for (const auto& e : l.entries) {
    data = data || e.path == "data.tar.gz";
    meta = meta || e.path == "metadata.gz";
  }
  return data && meta;
}

std::string read_file(const fs::path& p, std::uint64_t limit) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::string out;
  out.resize(static_cast<std::size_t>(limit));
  in.read(out.data(), static_cast<std::streamsize>(limit));
  out.resize(static_cast<std::size_t>(in.gcount()));
  return out;
}

}  // namespace

std::optional<Ecosystem> marker_ecosystem(std::string_view path) {
  const std::string_view base = text::basename(path);
  if (base == "package.json") return Ecosystem::Npm;
  if (base == "setup.py" || base == "pyproject.toml" || base == "setup.cfg" || base == "PKG-INFO")
    return Ecosystem::PyPI;
  if (base == "METADATA" && text::dirname(path).ends_with(".dist-info")) return Ecosystem::PyPI;
  if (base == "composer.json") return Ecosystem::Composer;
  if (text::ends_with_icase(base, ".gemspec") || path == kGemMetadata) return Ecosystem::RubyGems;
  if (base == "Cargo.toml") return Ecosystem::Cargo;
  if (base == "go.mod") return Ecosystem::Go;
  if (base == "pom.xml") return Ecosystem::Maven;
  return std::nullopt;
}

EcosystemDetection detect(const std::vector<std::string>& paths) {
  if (paths.empty()) throw Error(ErrorCode::NoEcosystemDetected, "empty file set");
  struct Hit {
    std::size_t depth;
    int rank;
    std::string path;
    Ecosystem eco;
  };
  std::vector<Hit> hits;
  for (const auto& p : paths) {
    if (const auto eco = marker_ecosystem(p)) {
      // ".gem/metadata.yaml" stands in for a gemspec at the package root
      const std::size_t depth = p == kGemMetadata ? 0 : text::path_depth(p);
      hits.push_back({depth, precedence(*eco), p, *eco});
    }
  }
  if (hits.empty()) throw Error(ErrorCode::NoEcosystemDetected, "no ecosystem marker file found");
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return std::tie(a.depth, a.rank, a.path) < std::tie(b.depth, b.rank, b.path);
  });
  const Hit& best = hits.front();
  EcosystemDetection out;
  out.ecosystem = best.eco;
  out.marker = best.path;
  if (best.path != kGemMetadata) {
    const auto dir = text::dirname(best.path);
    out.root = dir.empty() ? "" : std::string(dir) + "/";
  }
  std::set<std::string> rivals;
  for (const auto& h : hits)
    if (h.depth == best.depth && h.eco != best.eco) rivals.insert(std::string(to_string(h.eco)));
  if (!rivals.empty()) {
    std::string names;
    for (const auto& r : rivals) names += (names.empty() ? "" : ", ") + r;
    out.notes.push_back("ambiguous ecosystem: markers for " + names + " at the same depth as " +
                        best.path + "; chose " + std::string(to_string(best.eco)));
  }
  return out;
}

Ecosystem detect_ecosystem(const std::vector<std::string>& paths) { return detect(paths).ecosystem; }

PackageSnapshot open_directory(const fs::path& dir, const IngestLimits& limits) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  Builder b{limits, {}};
  b.snap.origin = "directory";
  fs::recursive_directory_iterator it(dir, fs::directory_options::none, ec), end;
  if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir.string() + ": " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir.string() + ": " + ec.message());
    const fs::directory_entry& entry = *it;
    const std::string rel = entry.path().lexically_relative(dir).generic_string();
    if (entry.is_symlink(ec)) {
      SnapshotFile f;
      f.symlink = true;
      f.link_target = fs::read_symlink(entry.path(), ec).generic_string();
      b.add(rel, std::move(f));
      continue;
    }
    if (entry.is_directory(ec)) {
      if (entry.path().filename() == ".git") it.disable_recursion_pending();
      continue;
    }
    if (!entry.is_regular_file(ec)) continue;
    SnapshotFile f;
    f.size = entry.file_size(ec);
    b.total += f.size;
    if (b.total > limits.max_total_bytes)
      throw Error(ErrorCode::ArchiveCorrupt, "package content exceeds size limit");
    if (f.size > limits.max_file_size) {
      f.content_skipped = true;
    } else {
      f.content = read_file(entry.path(), f.size);
    }
    b.add(rel, std::move(f));
  }
  b.expand_nested(1);
  return b.finish();
}

PackageSnapshot open_archive(std::string_view bytes, std::optional<archive::Format> hint,
                             const IngestLimits& limits) {
  const auto format = hint ? hint : archive::sniff(bytes);
  if (!format) throw Error(ErrorCode::UnsupportedFormat, "unrecognized archive format");
  const archive::Limits lim{limits.max_file_size, limits.max_total_bytes, limits.max_entries};
  archive::Listing listing = archive::read(bytes, *format, lim);
  Builder b{limits, {}};
  b.snap.origin = std::string(archive::to_string(*format));
  if (*format == archive::Format::Tar && is_gem_layout(listing)) {
    b.snap.origin = "gem";
    for (auto& e : listing.entries) {
      if (e.path == "data.tar.gz") {
        archive::Listing data = archive::read(e.content, archive::Format::TarGz, lim);
        b.add_listing(std::move(data), "");
      } else if (e.path == "metadata.gz") {
        SnapshotFile f;
        f.content = archive::gunzip(e.content, limits.max_file_size);
        f.size = f.content.size();
        b.add(std::string(kGemMetadata), std::move(f));
      }
    }
  } else {
    strip_common_root(listing);
    b.add_listing(std::move(listing), "");
  }
  b.expand_nested(1);
  return b.finish();
}

PackageSnapshot open_package(const fs::path& input, const IngestLimits& limits) {
  std::error_code ec;
  if (fs::is_directory(input, ec)) return open_directory(input, limits);
  if (!fs::is_regular_file(input, ec)) throw Error(ErrorCode::IoError, "no such package: " + input.string());
  const auto size = fs::file_size(input, ec);
  if (size > limits.max_total_bytes) throw Error(ErrorCode::ArchiveCorrupt, "archive exceeds size limit");
  const std::string bytes = read_file(input, size);
  auto hint = archive::format_for_name(input.filename().string());
  if (const auto sniffed = archive::sniff(bytes)) hint = sniffed;
  if (!hint) throw Error(ErrorCode::UnsupportedFormat, "not a directory or supported archive: " + input.string());
  return open_archive(bytes, hint, limits);
}

}  // namespace depsentry
