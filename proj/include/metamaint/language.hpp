#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace metamaint {

enum class Language { C, Cpp, Java, JavaScript, Python, PHP, Ruby, Other };

inline constexpr Language kSourceLanguages[] = {
    Language::C,      Language::Cpp, Language::Java, Language::JavaScript,
    Language::Python, Language::PHP, Language::Ruby,
};

std::string_view to_string(Language lang);

/// Accepts the display names ("C++", "JavaScript") and a few common
/// aliases ("cpp", "js", "py"); case-insensitive.
std::optional<Language> parse_language(std::string_view name);

} // namespace metamaint
