#pragma once

#include "metamaint/language.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Comment- and whitespace-insensitive lexing for the seven supported
// languages, and the token-trigram sets the similarity metrics work on.
namespace metamaint::lexer {

struct Token {
    std::string text;
    bool operator==(const Token&) const = default;
};

/// Total: every byte sequence lexes. Comments and whitespace produce no
/// tokens; a string or character literal is one token including its quotes;
/// operators are matched longest-first against a per-language table.
/// Language::Other lexes with the C rules.
std::vector<Token> tokenize(std::string_view content, Language lang);

using Trigram = std::array<std::string, 3>;

/// Set of token trigrams, stored sorted for linear-time set algebra.
class TrigramSet {
public:
    TrigramSet() = default;
    explicit TrigramSet(std::vector<Trigram> trigrams);

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    bool contains(const Trigram& t) const;

    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }
    const std::vector<Trigram>& items() const { return items_; }

    bool operator==(const TrigramSet&) const = default;

private:
    std::vector<Trigram> items_;
};

TrigramSet trigrams(std::span<const Token> tokens);

/// Convenience: trigrams(tokenize(content, lang)).
TrigramSet trigram_set(std::string_view content, Language lang);

/// No tokens at all: empty, blank, or comment-only content.
bool is_empty_source(std::string_view content, Language lang);

} // namespace metamaint::lexer
