#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace depsentry::toml {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parses the TOML subset used by Cargo.toml, Cargo.lock and pyproject.toml into JSON:
/// tables, arrays of tables, dotted keys, strings, integers, floats, booleans, arrays and
/// inline tables. Dates are kept as strings.
nlohmann::json parse(std::string_view text);

}  // namespace depsentry::toml
