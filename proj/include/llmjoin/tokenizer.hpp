#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace llmjoin {

enum class TokenizerKind {
    Whitespace,  ///< one token per whitespace-separated unit
    CharsDiv4,   ///< ceil(character count / 4), a model-agnostic approximation
    Vocabulary,  ///< greedy longest-match against an external vocabulary
};

/// Deterministic token counter. Same text and tokenizer always yield the
/// same count; an empty string counts as zero tokens.
class Tokenizer {
public:
    static Tokenizer whitespace() { return Tokenizer(TokenizerKind::Whitespace); }
    static Tokenizer chars_div_4() { return Tokenizer(TokenizerKind::CharsDiv4); }

    /// Vocabulary entries are matched greedily, longest first; any character
    /// not starting a vocabulary entry consumes one token by itself.
    static Tokenizer vocabulary(std::vector<std::string> entries) {
        Tokenizer t(TokenizerKind::Vocabulary);
        t.vocab_ = std::move(entries);
        std::sort(t.vocab_.begin(), t.vocab_.end(),
                  [](const std::string& a, const std::string& b) {
                      return a.size() > b.size() || (a.size() == b.size() && a < b);
                  });
        return t;
    }

    TokenizerKind kind() const { return kind_; }

    std::int64_t count(std::string_view text) const {
        if (text.empty()) return 0;
        switch (kind_) {
        case TokenizerKind::Whitespace: {
            std::int64_t n = 0;
            bool in_token = false;
            for (unsigned char c : text) {
                bool ws = std::isspace(c) != 0;
                if (!ws && !in_token) ++n;
                in_token = !ws;
            }
            return n;
        }
        case TokenizerKind::CharsDiv4:
            return static_cast<std::int64_t>((text.size() + 3) / 4);
        case TokenizerKind::Vocabulary: {
            std::int64_t n = 0;
            std::size_t pos = 0;
            while (pos < text.size()) {
                std::size_t advance = 1;
                for (const std::string& entry : vocab_) {
                    if (!entry.empty() && text.substr(pos, entry.size()) == entry) {
                        advance = entry.size();
                        break;
                    }
                }
                pos += advance;
                ++n;
            }
            return n;
        }
        }
        return 0;
    }

private:
    explicit Tokenizer(TokenizerKind kind) : kind_(kind) {}

    TokenizerKind kind_;
    std::vector<std::string> vocab_;
};

inline std::int64_t count_tokens(std::string_view text, const Tokenizer& tokenizer) {
    return tokenizer.count(text);
}

} // namespace llmjoin
