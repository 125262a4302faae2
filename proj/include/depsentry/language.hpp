#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace depsentry {

enum class Language { JavaScript, Python, Ruby, PHP, Rust, Go, Java };

inline constexpr std::array<Language, 7> kAllLanguages = {
    Language::JavaScript, Language::Python, Language::Ruby, Language::PHP,
    Language::Rust,       Language::Go,     Language::Java};

std::string_view to_string(Language l);
std::optional<Language> language_from_string(std::string_view s);

/// Fixed extension table; nullopt for files no profile covers.
std::optional<Language> language_for_path(std::string_view path);

}  // namespace depsentry
