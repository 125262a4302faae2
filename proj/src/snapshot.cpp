#include "depsentry/snapshot.hpp"

namespace depsentry {

std::string_view to_string(DistributionKind k) {
  switch (k) {
    case DistributionKind::Source: return "source";
    case DistributionKind::Prebuilt: return "prebuilt";
    case DistributionKind::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(EdgeKind k) {
  return k == EdgeKind::Direct ? "direct" : "transitive";
}

const SnapshotFile* PackageSnapshot::find(std::string_view path) const {
  const auto it = files.find(std::string(path));
  return it == files.end() ? nullptr : &it->second;
}

std::optional<std::string_view> PackageSnapshot::text(std::string_view path) const {
  const SnapshotFile* f = find(path);
  if (f == nullptr || f->symlink || f->content_skipped) return std::nullopt;
  return std::string_view(f->content);
}

}  // namespace depsentry
