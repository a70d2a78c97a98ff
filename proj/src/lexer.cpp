#include "metamaint/lexer.hpp"

#include <algorithm>
#include <cstring>

namespace metamaint::lexer {

namespace {

struct Rules {
    bool slash_comments = false; // "//" and "/* */"
    bool hash_comments = false;  // "#"
    bool ruby_block_comments = false;
    bool python_strings = false; // prefixes, triple quotes
    bool java_text_blocks = false;
    bool cpp_raw_strings = false;
    bool backtick_strings = false;
    bool multiline_strings = false;
    bool digit_separators = false;
    std::string_view ident_start_extra; // besides [A-Za-z_] and UTF-8
    std::string_view ident_extra;       // besides [A-Za-z0-9_] and UTF-8
    std::vector<std::string_view> operators;
};

std::vector<std::string_view> with_common(std::vector<std::string_view> ops)
{
    for (std::string_view op : {"++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
                                "%=", "&=", "|=", "^="})
        ops.push_back(op);
    std::sort(ops.begin(), ops.end(), [](auto a, auto b) { return a.size() != b.size() ? a.size() > b.size() : a < b; });
    ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
    return ops;
}

const Rules& rules_for(Language lang)
{
    static const Rules c_rules = [] {
        Rules r;
        r.slash_comments = true;
        r.ident_start_extra = "$";
        r.ident_extra = "$";
        r.operators = with_common({">>=", "<<=", "->", "...", "##"});
        return r;
    }();
    static const Rules cpp_rules = [] {
        Rules r = c_rules;
        r.cpp_raw_strings = true;
        r.digit_separators = true;
        r.operators = with_common({">>=", "<<=", "->*", "<=>", "...", "::", "->", ".*", "##"});
        return r;
    }();
    static const Rules java_rules = [] {
        Rules r;
        r.slash_comments = true;
        r.java_text_blocks = true;
        r.ident_start_extra = "$";
        r.ident_extra = "$";
        r.operators = with_common({">>>=", ">>>", ">>=", "<<=", "->", "::", "..."});
        return r;
    }();
    static const Rules js_rules = [] {
        Rules r;
        r.slash_comments = true;
        r.backtick_strings = true;
        r.ident_start_extra = "$";
        r.ident_extra = "$";
        r.operators = with_common({">>>=", "===", "!==", ">>>", "**=", "...", "?\?=", "&&=", "||=", ">>=", "<<=",
                                   "?.", "??", "=>", "**"});
        return r;
    }();
    static const Rules python_rules = [] {
        Rules r;
        r.hash_comments = true;
        r.python_strings = true;
        r.operators = with_common({"**=", "//=", ">>=", "<<=", "->", ":=", "**", "//", "@="});
        return r;
    }();
    static const Rules php_rules = [] {
        Rules r;
        r.slash_comments = true;
        r.hash_comments = true;
        r.multiline_strings = true;
        r.ident_start_extra = "$";
        r.ident_extra = "";
        r.operators = with_common({"===", "!==", "<=>", "**=", "...", "?\?=", "?->", "<<=", ">>=", "->", "=>", "::",
                                   "??", "**", ".=", "<?", "?>"});
        return r;
    }();
    static const Rules ruby_rules = [] {
        Rules r;
        r.hash_comments = true;
        r.ruby_block_comments = true;
        r.backtick_strings = true;
        r.multiline_strings = true;
        r.ident_start_extra = "@$";
        r.ident_extra = "";
        r.operators = with_common({"**=", "<=>", "===", "...", "&&=", "||=", "<<=", ">>=", "..", "::", "=>", "->",
                                   "=~", "!~", "**", "&."});
        return r;
    }();

    switch (lang) {
    case Language::Cpp: return cpp_rules;
    case Language::Java: return java_rules;
    case Language::JavaScript: return js_rules;
    case Language::Python: return python_rules;
    case Language::PHP: return php_rules;
    case Language::Ruby: return ruby_rules;
    case Language::C:
    case Language::Other: break;
    }
    return c_rules;
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Length of a well-formed UTF-8 multi-byte sequence at `pos`, or 0.
std::size_t utf8_length(std::string_view s, std::size_t pos)
{
    auto c = static_cast<unsigned char>(s[pos]);
    std::size_t len = 0;
    if (c >= 0xC2 && c <= 0xDF)
        len = 2;
    else if (c >= 0xE0 && c <= 0xEF)
        len = 3;
    else if (c >= 0xF0 && c <= 0xF4)
        len = 4;
    else
        return 0;
    if (pos + len > s.size())
        return 0;
    for (std::size_t i = 1; i < len; ++i)
        if ((static_cast<unsigned char>(s[pos + i]) & 0xC0) != 0x80)
            return 0;
    return len;
}

class Lexer {
public:
    Lexer(std::string_view src, const Rules& rules) : src_(src), rules_(rules) {}

    std::vector<Token> run()
    {
        while (pos_ < src_.size()) {
            auto c = static_cast<unsigned char>(src_[pos_]);
            if (is_space(c)) {
                ++pos_;
            } else if (skip_comment()) {
            } else if (rules_.ruby_block_comments && at_ruby_data_marker()) {
                break;
            } else if (lex_string()) {
            } else if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
                lex_number();
            } else if (starts_identifier(pos_)) {
                lex_identifier();
            } else if (c >= 0x80) {
                emit(pos_, 1); // undecodable byte
            } else {
                lex_operator();
            }
        }
        return std::move(tokens_);
    }

private:
    void emit(std::size_t start, std::size_t len)
    {
        tokens_.push_back({std::string(src_.substr(start, len))});
        pos_ = start + len;
    }

    bool at_line_start() const { return pos_ == 0 || src_[pos_ - 1] == '\n'; }

    // "__END__" alone on a line: the rest of a Ruby file is data.
    bool at_ruby_data_marker() const
    {
        if (!at_line_start() || !looking_at("__END__"))
            return false;
        std::size_t after = pos_ + 7;
        return after == src_.size() || src_[after] == '\n' || src_[after] == '\r';
    }

    bool looking_at(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    void skip_to_line_end()
    {
        auto nl = src_.find('\n', pos_);
        pos_ = nl == std::string_view::npos ? src_.size() : nl;
    }

    bool skip_comment()
    {
        if (rules_.slash_comments && looking_at("//")) {
            skip_to_line_end();
            return true;
        }
        if (rules_.slash_comments && looking_at("/*")) {
            auto end = src_.find("*/", pos_ + 2);
            pos_ = end == std::string_view::npos ? src_.size() : end + 2;
            return true;
        }
        if (rules_.hash_comments && src_[pos_] == '#') {
            skip_to_line_end();
            return true;
        }
        if (rules_.ruby_block_comments && at_line_start() && looking_at("=begin") &&
            (pos_ + 6 == src_.size() || is_space(src_[pos_ + 6]))) {
            // Runs through the end of the line that starts with "=end".
            std::size_t scan = pos_;
            for (;;) {
                auto nl = src_.find('\n', scan);
                if (nl == std::string_view::npos) {
                    pos_ = src_.size();
                    return true;
                }
                scan = nl + 1;
                auto rest = src_.substr(scan);
                if (rest.starts_with("=end") && (rest.size() == 4 || is_space(rest[4]))) {
                    pos_ = scan;
                    skip_to_line_end();
                    return true;
                }
            }
        }
        return false;
    }

    // Scans a quoted literal opened by `quote` at `open`; returns the end
    // offset (one past the closing quote, or where an unterminated literal
    // gives up).
    std::size_t scan_quoted(std::size_t open, char quote, bool multiline) const
    {
        std::size_t i = open + 1;
        while (i < src_.size()) {
            char c = src_[i];
            if (c == '\\' && i + 1 < src_.size()) {
                i += 2;
                continue;
            }
            if (c == quote)
                return i + 1;
            if (c == '\n' && !multiline)
                return i;
            ++i;
        }
        return src_.size();
    }

    std::size_t scan_triple(std::size_t open, std::string_view delim) const
    {
        std::size_t i = open + delim.size();
        while (i < src_.size()) {
            if (src_[i] == '\\' && i + 1 < src_.size()) {
                i += 2;
                continue;
            }
            if (src_.substr(i, delim.size()) == delim)
                return i + delim.size();
            ++i;
        }
        return src_.size();
    }

    bool lex_string()
    {
        char c = src_[pos_];
        if (rules_.python_strings) {
            // Optional prefix (r, b, u, f and two-letter combinations).
            std::size_t p = pos_;
            while (p < src_.size() && p - pos_ < 2 && src_[p] != '\0' && std::strchr("rRbBuUfF", src_[p]))
                ++p;
            if (p < src_.size() && (src_[p] == '"' || src_[p] == '\'') &&
                (p == pos_ || pos_ == 0 || !is_ident_char(pos_ - 1))) {
                char q = src_[p];
                std::string_view triple = q == '"' ? "\"\"\"" : "'''";
                std::size_t end = src_.substr(p, 3) == triple ? scan_triple(p, triple) : scan_quoted(p, q, false);
                emit(pos_, end - pos_);
                return true;
            }
            return false;
        }
        if (rules_.java_text_blocks && looking_at("\"\"\"")) {
            emit(pos_, scan_triple(pos_, "\"\"\"") - pos_);
            return true;
        }
        if (c == '"' || c == '\'') {
            emit(pos_, scan_quoted(pos_, c, rules_.multiline_strings) - pos_);
            return true;
        }
        if (c == '`' && rules_.backtick_strings) {
            emit(pos_, scan_quoted(pos_, c, true) - pos_);
            return true;
        }
        return false;
    }

    // C++ raw string whose prefix identifier ends right before the quote.
    bool lex_cpp_raw_string(std::size_t ident_start)
    {
        std::string_view prefix = src_.substr(ident_start, pos_ - ident_start);
        if (!(prefix == "R" || prefix == "u8R" || prefix == "uR" || prefix == "UR" || prefix == "LR"))
            return false;
        if (pos_ >= src_.size() || src_[pos_] != '"')
            return false;
        auto paren = src_.find('(', pos_ + 1);
        if (paren == std::string_view::npos || paren - pos_ - 1 > 16)
            return false;
        std::string close = ")" + std::string(src_.substr(pos_ + 1, paren - pos_ - 1)) + "\"";
        auto end = src_.find(close, paren + 1);
        std::size_t stop = end == std::string_view::npos ? src_.size() : end + close.size();
        emit(ident_start, stop - ident_start);
        return true;
    }

    void lex_number()
    {
        std::size_t start = pos_;
        std::size_t i = pos_ + 1;
        while (i < src_.size()) {
            auto c = static_cast<unsigned char>(src_[i]);
            if (is_alpha(c) || is_digit(c) || c == '_') {
                ++i;
            } else if (c == '.' && i + 1 < src_.size() && is_digit(src_[i + 1])) {
                ++i;
            } else if ((c == '+' || c == '-') && std::strchr("eEpP", src_[i - 1]) && i + 1 < src_.size() &&
                       is_digit(src_[i + 1]) && !is_hex_literal(start)) {
                ++i;
            } else if (c == '\'' && rules_.digit_separators && i + 1 < src_.size() &&
                       (is_digit(src_[i + 1]) || is_alpha(src_[i + 1]))) {
                ++i;
            } else {
                break;
            }
        }
        emit(start, i - start);
    }

    bool is_hex_literal(std::size_t start) const
    {
        return src_.size() > start + 1 && src_[start] == '0' && (src_[start + 1] == 'x' || src_[start + 1] == 'X');
    }

    bool starts_identifier(std::size_t i) const
    {
        auto c = static_cast<unsigned char>(src_[i]);
        if (is_alpha(c) || c == '_')
            return true;
        if (c < 0x80)
            return rules_.ident_start_extra.find(static_cast<char>(c)) != std::string_view::npos;
        return utf8_length(src_, i) > 0;
    }

    bool is_ident_char(std::size_t i) const
    {
        auto c = static_cast<unsigned char>(src_[i]);
        return is_alpha(c) || is_digit(c) || c == '_' || c >= 0x80 ||
               rules_.ident_extra.find(static_cast<char>(c)) != std::string_view::npos;
    }

    void lex_identifier()
    {
        std::size_t start = pos_;
        // Leading sigils ($x, @x, @@x).
        while (pos_ < src_.size() && static_cast<unsigned char>(src_[pos_]) < 0x80 && !is_alpha(src_[pos_]) &&
               src_[pos_] != '_' && rules_.ident_start_extra.find(src_[pos_]) != std::string_view::npos)
            ++pos_;
        while (pos_ < src_.size()) {
            auto c = static_cast<unsigned char>(src_[pos_]);
            if (c >= 0x80) {
                auto len = utf8_length(src_, pos_);
                if (len == 0)
                    break;
                pos_ += len;
            } else if (is_alpha(c) || is_digit(c) || c == '_' ||
                       rules_.ident_extra.find(static_cast<char>(c)) != std::string_view::npos) {
                ++pos_;
            } else {
                break;
            }
        }
        if (rules_.cpp_raw_strings && lex_cpp_raw_string(start))
            return;
        emit(start, pos_ - start);
    }

    void lex_operator()
    {
        for (auto op : rules_.operators) {
            if (looking_at(op)) {
                emit(pos_, op.size());
                return;
            }
        }
        emit(pos_, 1);
    }

    std::string_view src_;
    const Rules& rules_;
    std::size_t pos_ = 0;
    std::vector<Token> tokens_;
};

} // namespace

std::vector<Token> tokenize(std::string_view content, Language lang)
{
    return Lexer(content, rules_for(lang)).run();
}

TrigramSet::TrigramSet(std::vector<Trigram> trigrams) : items_(std::move(trigrams))
{
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool TrigramSet::contains(const Trigram& t) const { return std::binary_search(items_.begin(), items_.end(), t); }

TrigramSet trigrams(std::span<const Token> tokens)
{
    std::vector<Trigram> all;
    if (tokens.size() >= 3) {
        all.reserve(tokens.size() - 2);
        for (std::size_t i = 0; i + 2 < tokens.size(); ++i)
            all.push_back({tokens[i].text, tokens[i + 1].text, tokens[i + 2].text});
    }
    return TrigramSet(std::move(all));
}

TrigramSet trigram_set(std::string_view content, Language lang)
{
    auto tokens = tokenize(content, lang);
    return trigrams(tokens);
}

bool is_empty_source(std::string_view content, Language lang) { return tokenize(content, lang).empty(); }

} // namespace metamaint::lexer
