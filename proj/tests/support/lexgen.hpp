#pragma once

#include "metamaint/language.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixture {

// Random token sequences and renderings of them with arbitrary comments and
// whitespace between tokens. Every gap starts and ends with whitespace, so
// token boundaries never depend on the gap content.
class TokenGen {
public:
    explicit TokenGen(std::uint64_t seed) : rng_(seed) {}

    std::vector<std::string> tokens(metamaint::Language lang, std::size_t max_len)
    {
        std::vector<std::string> out(pick(max_len + 1));
        for (auto& t : out)
            t = token(lang);
        return out;
    }

    std::string render(const std::vector<std::string>& tokens, metamaint::Language lang, bool noisy)
    {
        std::string s = noisy ? gap(lang) : "";
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i > 0)
                s += noisy ? gap(lang) : " ";
            s += tokens[i];
        }
        if (noisy)
            s += gap(lang);
        return s;
    }

    std::string gap(metamaint::Language lang)
    {
        using metamaint::Language;
        std::string g = space();
        for (std::size_t n = pick(3); n > 0; --n) {
            const bool slash = lang != Language::Python && lang != Language::Ruby;
            const bool hash = lang == Language::Python || lang == Language::Ruby || lang == Language::PHP;
            switch (pick(4)) {
            case 0:
                if (slash)
                    g += "//" + words() + "\n";
                break;
            case 1:
                if (slash)
                    g += "/*" + words() + "\n" + words() + "*/";
                break;
            case 2:
                if (hash)
                    g += "#" + words() + "\n";
                break;
            case 3:
                if (lang == Language::Ruby)
                    g += "\n=begin " + words() + "\n" + words() + "\n=end trailing\n";
                break;
            }
            g += space();
        }
        return g;
    }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    std::string space()
    {
        static const char* runs[] = {" ", "\t", "\n", "  \n\t", "\r\n", "\n\n    "};
        std::string s = runs[pick(6)];
        if (pick(2))
            s += runs[pick(6)];
        return s;
    }

    std::string words()
    {
        static const char* w[] = {"note", "TODO", "x = 1;", "'quote", "\"dq", "a*b", "c/d", "url://x"};
        std::string s;
        for (std::size_t n = pick(4); n > 0; --n)
            s += std::string(" ") + w[pick(8)];
        return s;
    }

    std::string identifier(metamaint::Language lang)
    {
        static const char* names[] = {"x", "value", "count_2", "_tmp", "self", "begin", "end", "\xc3\xa9t\xc3\xa9"};
        std::string s = names[pick(8)];
        if (lang == metamaint::Language::PHP && pick(2))
            s = "$" + s;
        if (lang == metamaint::Language::Ruby && pick(3) == 0)
            s = "@" + s;
        return s;
    }

    std::string token(metamaint::Language lang)
    {
        using metamaint::Language;
        static const char* numbers[] = {"0", "42", "3.14", "0x1F", "1e+5", ".5", "7L", "1_000"};
        static const char* strings[] = {"\"plain\"", "\"with // slashes\"", "'single'", "\"esc \\\" quote\"",
                                        "\"/* not a comment */\"", "\"# hash\"", "''", "\"a b\tc\""};
        static const char* ops[] = {"+", "-", "*", "/", "%", "=", "==", "!=", "<=", ">=", "<<", ">>", "&&",
                                    "||", "++", "--", "+=", "(", ")", "{", "}", "[", "]", ";", ",", ".",
                                    "!", "~", "^", "|", "&", "<", ">", ":", "?"};
        switch (pick(4)) {
        case 0: return identifier(lang);
        case 1: return numbers[pick(8)];
        case 2: return strings[pick(8)];
        default: return ops[pick(sizeof ops / sizeof *ops)];
        }
    }

    std::mt19937_64 rng_;
};

} // namespace fixture
