#include "depsentry/pipeline.hpp"

#include <chrono>

#include "depsentry/deptree.hpp"
#include "depsentry/errors.hpp"
#include "depsentry/ingest.hpp"
#include "depsentry/manifest.hpp"

namespace depsentry {

namespace fs = std::filesystem;

std::optional<PackageCoordinates> parse_coordinates(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto eco = ecosystem_from_string(text.substr(0, colon));
  if (!eco) return std::nullopt;
  const std::string_view rest = text.substr(colon + 1);
  const std::size_t at = rest.rfind('@');
  if (at == std::string_view::npos || at == 0 || at + 1 == rest.size()) return std::nullopt;
  return PackageCoordinates{*eco, std::string(rest.substr(0, at)), std::string(rest.substr(at + 1))};
}

std::shared_ptr<const PackageSnapshot> load_target(const std::string& target, const Config& config,
                                                   bool fetch) {
  std::error_code ec;
  if (fs::exists(target, ec)) {
    auto snap = std::make_shared<PackageSnapshot>(open_package(target, config.ingest()));
    populate(*snap);
    return snap;
  }
  if (const auto coords = parse_coordinates(target)) {
    if (!fetch) throw Error(ErrorCode::FetchDisabled, target + " is not a local path; pass --fetch to download it");
    const FetchedArchive fetched = fetch_package(*coords, RegistrySource::from_config(config, coords->ecosystem));
    auto snap = std::make_shared<PackageSnapshot>(open_archive(fetched.bytes, fetched.format, config.ingest()));
    populate(*snap);
    if (snap->coords.name.empty()) snap->coords.name = coords->name;
    if (snap->coords.version.empty()) snap->coords.version = coords->version;
    for (const auto& n : fetched.notes) snap->notes.push_back(n);
    return snap;
  }
  throw Error(ErrorCode::IoError, "no such file or directory: " + target);
}

namespace {

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

Report scan_target(const std::string& target, const Config& config, const ScanOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.timestamp = current_timestamp();
  const auto root = load_target(target, config, options.fetch);
  report.target = root->coords;
  const Scanner scanner(config);

  if (options.deps_store || options.tree) {
    std::vector<Resolver> resolvers;
    if (options.deps_store) resolvers.emplace_back(StoreResolver(*options.deps_store, config.ingest()));
    if (options.fetch) resolvers.emplace_back(RegistryResolver(config));
    const Resolver resolver = resolvers.empty()
                                  ? Resolver([](const PackageCoordinates& c) {
                                      return Resolution{nullptr, "not resolved (no store): " + c.display()};
                                    })
                                  : chain_resolvers(std::move(resolvers));
    const DependencyTree tree = build_tree(root, resolver);
    TreeScan scan = scan_tree(tree, scanner, options.jobs);
    report.findings = std::move(scan.findings);
    report.rollups = std::move(scan.rollups);
    report.edges = tree.edges;
    report.notes = tree.notes;
    for (auto& n : scan.notes) report.notes.push_back(std::move(n));
    report.stats.files = scan.files;
    report.stats.bytes = scan.bytes;
  } else {
    PackageScan scan = scanner.scan(*root);
    report.findings = std::move(scan.findings);
    report.notes = std::move(scan.notes);
    report.stats.files = scan.files;
    report.stats.bytes = scan.bytes;
  }
  report.finalize();
  report.stats.duration_ms = elapsed_ms(start);
  return report;
}

Report simulate_target(const std::string& target, const Config& config, const InstallContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.timestamp = current_timestamp();
  const auto root = load_target(target, config, false);
  report.target = root->coords;
  report.simulation = simulate_report(*root, ctx);
  report.notes = root->notes;
  for (const auto& n : root->facts.notes) report.notes.push_back(n);
  for (const auto& [path, file] : root->files) {
    ++report.stats.files;
    report.stats.bytes += file.size;
  }
  report.finalize();
  report.stats.duration_ms = elapsed_ms(start);
  return report;
}

}  // namespace depsentry
