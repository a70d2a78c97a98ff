#include "doctest.h"

#include "lexgen.hpp"

#include "metamaint/lexer.hpp"

using namespace metamaint;
using namespace metamaint::lexer;

namespace {

std::vector<std::string> texts(std::string_view src, Language lang)
{
    std::vector<std::string> out;
    for (const auto& t : tokenize(src, lang))
        out.push_back(t.text);
    return out;
}

using V = std::vector<std::string>;

} // namespace

TEST_CASE("basic lexing")
{
    CHECK(texts("int x; // note\n", Language::C) == V{"int", "x", ";"});
    CHECK(texts("a = \"b // c\"", Language::Python) == V{"a", "=", "\"b // c\""});
    for (auto lang : kSourceLanguages)
        CHECK(texts("", lang).empty());
    CHECK(texts("a<<=b->c", Language::C) == V{"a", "<<=", "b", "->", "c"});
    CHECK(texts("x = y @ z", Language::Python) == V{"x", "=", "y", "@", "z"});
    CHECK(texts("a >>>= 2", Language::Java) == V{"a", ">>>=", "2"});
    CHECK(texts("a===b??c", Language::JavaScript) == V{"a", "===", "b", "??", "c"});
}

TEST_CASE("comments per language")
{
    CHECK(texts("a /* x\ny */ b // z\nc", Language::Cpp) == V{"a", "b", "c"});
    CHECK(texts("a # x\nb", Language::Python) == V{"a", "b"});
    CHECK(texts("a // x\nb", Language::Python) == V{"a", "//", "x", "b"});
    CHECK(texts("$a # x\n$b // y\n/* z */", Language::PHP) == V{"$a", "$b"});
    CHECK(texts("a\n=begin\nignored\n=end\nb # c\n", Language::Ruby) == V{"a", "b"});
    CHECK(texts("a =begin\nb", Language::Ruby) == V{"a", "=", "begin", "b"});
    CHECK(texts("x\n__END__\nnot code", Language::Ruby) == V{"x"});
    CHECK(texts("# not a comment", Language::C) == V{"#", "not", "a", "comment"});
    CHECK(texts("a /* never closed", Language::Java) == V{"a"});
}

TEST_CASE("string literals are single tokens")
{
    CHECK(texts("s = 'it\\'s' + \"q\"", Language::JavaScript) == V{"s", "=", "'it\\'s'", "+", "\"q\""});
    CHECK(texts("t = `a ${b}\n c`", Language::JavaScript) == V{"t", "=", "`a ${b}\n c`"});
    CHECK(texts("x = r'\\d' + b\"y\" + f'{z}'", Language::Python) ==
          V{"x", "=", "r'\\d'", "+", "b\"y\"", "+", "f'{z}'"});
    CHECK(texts("d = \"\"\"doc\n# no comment\n\"\"\"", Language::Python) == V{"d", "=", "\"\"\"doc\n# no comment\n\"\"\""});
    CHECK(texts("auto s = R\"x(a)\" b)x\";", Language::Cpp) == V{"auto", "s", "=", "R\"x(a)\" b)x\"", ";"});
    CHECK(texts("String t = \"\"\"\n  text\n  \"\"\";", Language::Java) == V{"String", "t", "=", "\"\"\"\n  text\n  \"\"\"", ";"});
    CHECK(texts("char c = '\\n';", Language::C) == V{"char", "c", "=", "'\\n'", ";"});
    // Unterminated single-line literal stops at the newline.
    CHECK(texts("\"abc\nd", Language::C) == V{"\"abc", "d"});
}

TEST_CASE("numbers, identifiers and odd bytes")
{
    CHECK(texts("x=1.5e-3+0x1e+2", Language::C) == V{"x", "=", "1.5e-3", "+", "0x1e", "+", "2"});
    CHECK(texts("1'000'000", Language::Cpp) == V{"1'000'000"});
    CHECK(texts("$this->name", Language::PHP) == V{"$this", "->", "name"});
    CHECK(texts("@@count += 1", Language::Ruby) == V{"@@count", "+=", "1"});
    CHECK(texts("caf\xc3\xa9 = 1", Language::Python) == V{"caf\xc3\xa9", "=", "1"});
    CHECK(texts("a \xff b", Language::C) == V{"a", "\xff", "b"});
    CHECK(texts("@", Language::C) == V{"@"});
}

TEST_CASE("trigrams")
{
    auto tri = [](V words) {
        std::vector<Token> t;
        for (auto& w : words)
            t.push_back({w});
        return trigrams(t);
    };
    CHECK(tri({"a", "b"}).empty());
    CHECK(tri({"a", "b", "c", "d"}).items() == std::vector<Trigram>{{"a", "b", "c"}, {"b", "c", "d"}});
    CHECK(tri({"x", "x", "x", "x"}).size() == 1);
    CHECK(tri({"x", "x", "x", "x"}).contains({"x", "x", "x"}));
    CHECK_FALSE(tri({"x", "x", "x", "x"}).contains({"x", "x", "y"}));
    CHECK(trigram_set("a b c", Language::C) == tri({"a", "b", "c"}));
}

TEST_CASE("is_empty_source")
{
    CHECK(is_empty_source("", Language::C));
    CHECK(is_empty_source("/* only a comment */", Language::C));
    CHECK_FALSE(is_empty_source("x=1", Language::Python));
    CHECK(is_empty_source("\n  \n\t\n", Language::Ruby));
    CHECK(is_empty_source("# a\n# b\n", Language::Python));
    CHECK(is_empty_source("=begin\ndoc\n=end\n", Language::Ruby));
    CHECK_FALSE(is_empty_source("<?php\n", Language::PHP));
}

TEST_CASE("tokenize is insensitive to comments and whitespace between tokens")
{
    fixture::TokenGen gen(2024);
    for (auto lang : kSourceLanguages) {
        for (int i = 0; i < 150; ++i) {
            auto toks = gen.tokens(lang, 40);
            auto base = texts(gen.render(toks, lang, false), lang);
            CHECK(base == toks);
            auto noisy = texts(gen.render(toks, lang, true), lang);
            CHECK(noisy == base);
            if (noisy != base)
                break;

            auto set = trigram_set(gen.render(toks, lang, false), lang);
            CHECK(set.size() <= (toks.size() >= 3 ? toks.size() - 2 : 0));
            CHECK(set == trigram_set(gen.render(toks, lang, false), lang));
        }
    }
}

TEST_CASE("comment-only files are empty in every language")
{
    fixture::TokenGen gen(7);
    for (auto lang : kSourceLanguages)
        for (int i = 0; i < 50; ++i)
            CHECK(is_empty_source(gen.gap(lang), lang));
}
