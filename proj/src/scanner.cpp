#include "depsentry/scanner.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <tuple>

#include "depsentry/evasion.hpp"

namespace depsentry {

Scanner::Scanner(Config config) : config_(std::move(config)), catalog_(config_) {}

PackageScan Scanner::scan(const PackageSnapshot& snapshot) const {
  PackageScan out;
  out.coords = snapshot.coords;
  PackageAnalysis analysis(snapshot, catalog_);
  out.findings = detect_ace(analysis, config_.maven());
  for (auto& f : detect_evasion(analysis, config_)) out.findings.push_back(std::move(f));
  sort_findings(out.findings);
  out.notes = snapshot.notes;
  for (const auto& n : snapshot.facts.notes) out.notes.push_back(n);
  for (const auto& [path, file] : snapshot.files) {
    ++out.files;
    out.bytes += file.size;
  }
  return out;
}

std::vector<std::optional<PackageScan>> scan_all(const std::vector<const PackageSnapshot*>& snapshots,
                                                 const Scanner& scanner, unsigned jobs) {
  std::vector<std::optional<PackageScan>> results(snapshots.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < snapshots.size(); i = next++)
      if (snapshots[i]) results[i] = scanner.scan(*snapshots[i]);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(snapshots.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  return results;
}

bool finding_less(const Finding& a, const Finding& b) {
  return std::tie(a.location.path, a.location.byte_start, a.id, a.package, a.location.byte_end, a.message,
                  a.evidence) <
         std::tie(b.location.path, b.location.byte_start, b.id, b.package, b.location.byte_end, b.message,
                  b.evidence);
}

void sort_findings(std::vector<Finding>& findings) {
  std::stable_sort(findings.begin(), findings.end(), finding_less);
}

}  // namespace depsentry
