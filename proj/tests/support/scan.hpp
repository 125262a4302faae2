#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "depsentry/scanner.hpp"
#include "support/snapshots.hpp"

namespace depsentry::testing {

inline const Scanner& default_scanner() {
  static const Scanner scanner(Config::defaults());
  return scanner;
}

inline std::vector<Finding> scan_files(const std::map<std::string, std::string>& files) {
  return default_scanner().scan(make_snapshot(files)).findings;
}

inline std::set<TechniqueId> ids_of(const std::vector<Finding>& findings) {
  std::set<TechniqueId> out;
  for (const auto& f : findings) out.insert(f.id);
  return out;
}

inline std::vector<Finding> only(const std::vector<Finding>& findings, TechniqueId id) {
  std::vector<Finding> out;
  for (const auto& f : findings)
    if (f.id == id) out.push_back(f);
  return out;
}

}  // namespace depsentry::testing
