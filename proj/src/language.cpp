#include "depsentry/language.hpp"

#include "depsentry/text.hpp"

namespace depsentry {

std::string_view to_string(Language l) {
  switch (l) {
    case Language::JavaScript: return "javascript";
    case Language::Python: return "python";
    case Language::Ruby: return "ruby";
    case Language::PHP: return "php";
    case Language::Rust: return "rust";
    case Language::Go: return "go";
    case Language::Java: return "java";
  }
  return "javascript";
}

std::optional<Language> language_from_string(std::string_view s) {
  for (Language l : kAllLanguages) {
    if (to_string(l) == s) return l;
  }
  if (s == "js") return Language::JavaScript;
  if (s == "py") return Language::Python;
  if (s == "rb") return Language::Ruby;
  if (s == "rs") return Language::Rust;
  return std::nullopt;
}

std::optional<Language> language_for_path(std::string_view path) {
  const std::string ext = text::extension(path);
  if (ext == ".js" || ext == ".mjs" || ext == ".cjs") return Language::JavaScript;
  if (ext == ".py") return Language::Python;
  if (ext == ".rb" || ext == ".gemspec" || ext == ".rake") return Language::Ruby;
  if (text::basename(path) == "Rakefile" || text::basename(path) == "Gemfile") return Language::Ruby;
  if (ext == ".php") return Language::PHP;
  if (ext == ".rs") return Language::Rust;
  if (ext == ".go") return Language::Go;
  if (ext == ".java") return Language::Java;
  return std::nullopt;
}

}  // namespace depsentry
