#include <doctest.h>

#include <random>
#include <string>

#include "llmjoin/tokenizer.hpp"

using namespace llmjoin;

TEST_SUITE("tokenizer") {

TEST_CASE("whitespace tokenizer counts separated units") {
    Tokenizer t = Tokenizer::whitespace();
    CHECK(count_tokens("", t) == 0);
    CHECK(count_tokens("a b c", t) == 3);
    CHECK(count_tokens("  a\t b \n c  ", t) == 3);
    CHECK(count_tokens("single", t) == 1);
}

TEST_CASE("chars-div-4 tokenizer rounds up") {
    Tokenizer t = Tokenizer::chars_div_4();
    CHECK(count_tokens("", t) == 0);
    CHECK(count_tokens("abc", t) == 1);
    CHECK(count_tokens("abcd", t) == 1);
    CHECK(count_tokens("abcde", t) == 2);
    // 120 characters exactly: 30 tokens
    std::string lorem =
        "Lorem ipsum dolor sit amet, consectetur adipiscing elit, sed do eiusmod "
        "tempor incididunt ut labore et dolore magna aliq";
    REQUIRE(lorem.size() == 120);
    CHECK(count_tokens(lorem, t) == 30);
}

TEST_CASE("vocabulary tokenizer prefers longest entries") {
    Tokenizer t = Tokenizer::vocabulary({"foo", "foobar", "ba", "r"});
    CHECK(count_tokens("foobar", t) == 1);
    CHECK(count_tokens("foobarfoo", t) == 2);
    CHECK(count_tokens("bar", t) == 2);   // "ba" + "r"
    CHECK(count_tokens("xfoo", t) == 2);  // unknown char, then "foo"
    CHECK(count_tokens("", t) == 0);
}

TEST_CASE("counting is deterministic") {
    std::mt19937_64 rng(11);
    Tokenizer ws = Tokenizer::whitespace();
    Tokenizer c4 = Tokenizer::chars_div_4();
    for (int i = 0; i < 200; ++i) {
        std::string text;
        std::size_t len = rng() % 64;
        for (std::size_t k = 0; k < len; ++k) {
            text += static_cast<char>(' ' + rng() % 95);
        }
        CHECK(count_tokens(text, ws) == count_tokens(text, ws));
        CHECK(count_tokens(text, c4) == count_tokens(text, c4));
        CHECK(count_tokens(text, c4) ==
              static_cast<std::int64_t>((text.size() + 3) / 4));
    }
}

} // TEST_SUITE
