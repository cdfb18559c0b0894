#pragma once

#include <cctype>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmjoin/table.hpp"

namespace llmjoin {

/// Sentinel the model writes after the last index pair of a complete answer.
inline constexpr std::string_view kFinishedSentinel = "Finished";

/// Prompt asking for a single Yes/No verdict on one tuple pair.
inline std::string tuple_prompt(const Tuple& t1, const Tuple& t2,
                                const std::string& predicate) {
    std::string out;
    out.reserve(64 + predicate.size() + t1.text.size() + t2.text.size());
    out += "Is the following true (\"Yes\"/\"No\"): ";
    out += predicate;
    out += "?\nText 1: ";
    out += t1.text;
    out += "\nText 2: ";
    out += t2.text;
    out += "\nAnswer:";
    return out;
}

/// Prompt asking for all matching index pairs between two numbered
/// collections, semicolon-separated and terminated by the sentinel.
inline std::string block_prompt(std::span<const Tuple> batch1,
                                std::span<const Tuple> batch2,
                                const std::string& predicate) {
    std::string out;
    out += "Find indexes x,y where x is the number of an entry in collection 1 "
           "and y the number of an entry in collection 2 such that ";
    out += predicate;
    out += " (make sure to catch all pairs!)!\n";
    out += "Separate index pairs by semicolons.\n";
    out += "Write \"Finished\" after the last pair!\n";
    out += "Text Collection 1:\n";
    for (std::size_t i = 0; i < batch1.size(); ++i) {
        out += std::to_string(i + 1);
        out += ". ";
        out += batch1[i].text;
        out += '\n';
    }
    out += "Text Collection 2:\n";
    for (std::size_t i = 0; i < batch2.size(); ++i) {
        out += std::to_string(i + 1);
        out += ". ";
        out += batch2[i].text;
        out += '\n';
    }
    out += "Index pairs:";
    return out;
}

/// Outcome of parsing one block-join answer. Index pairs are 1-based batch
/// positions; finished reflects whether the answer ends with the sentinel.
struct ParsedAnswer {
    std::vector<std::pair<std::int64_t, std::int64_t>> index_pairs;
    bool finished = false;
    std::int64_t malformed_fragments = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool equals_ignore_case(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) return false;
    }
    return true;
}

inline bool parse_index(std::string_view s, std::int64_t& value) {
    s = trim(s);
    if (s.empty() || s.size() > 18) return false;
    std::int64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    value = v;
    return true;
}

/// Last sentinel-word candidate: trailing whitespace and punctuation are
/// ignored, then characters up to the previous separator are taken.
inline std::string_view trailing_word(std::string_view s) {
    std::size_t end = s.size();
    auto is_punct = [](char c) {
        return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
    };
    while (end > 0 && (std::isspace(static_cast<unsigned char>(s[end - 1])) || is_punct(s[end - 1]))) --end;
    std::size_t begin = end;
    while (begin > 0) {
        char c = s[begin - 1];
        if (std::isspace(static_cast<unsigned char>(c)) || is_punct(c)) break;
        --begin;
    }
    return s.substr(begin, end - begin);
}

} // namespace detail

/// Total parse of a block-join answer: semicolon-separated fragments,
/// "x,y" with 1 <= x <= b1 and 1 <= y <= b2 become pairs, duplicates are
/// dropped, anything else (except the sentinel) counts as malformed.
inline ParsedAnswer parse_block_answer(std::string_view answer,
                                       std::int64_t b1, std::int64_t b2) {
    ParsedAnswer parsed;
    parsed.finished =
        detail::equals_ignore_case(detail::trailing_word(answer), kFinishedSentinel);

    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    std::size_t start = 0;
    while (start <= answer.size()) {
        std::size_t sep = answer.find(';', start);
        std::string_view fragment = answer.substr(
            start, sep == std::string_view::npos ? std::string_view::npos : sep - start);
        fragment = detail::trim(fragment);
        if (!fragment.empty()) {
            std::string_view stripped = fragment;
            while (!stripped.empty() && (stripped.back() == '.' || stripped.back() == '!' ||
                                         stripped.back() == '?' || stripped.back() == ':')) {
                stripped.remove_suffix(1);
            }
            if (detail::equals_ignore_case(detail::trim(stripped), kFinishedSentinel)) {
                // sentinel fragment: neither a pair nor malformed
            } else {
                std::size_t comma = fragment.find(',');
                std::int64_t x = 0;
                std::int64_t y = 0;
                bool ok = comma != std::string_view::npos &&
                          fragment.find(',', comma + 1) == std::string_view::npos &&
                          detail::parse_index(fragment.substr(0, comma), x) &&
                          detail::parse_index(fragment.substr(comma + 1), y) &&
                          x >= 1 && x <= b1 && y >= 1 && y <= b2;
                if (ok) {
                    if (seen.insert({x, y}).second) parsed.index_pairs.emplace_back(x, y);
                } else {
                    ++parsed.malformed_fragments;
                }
            }
        }
        if (sep == std::string_view::npos) break;
        start = sep + 1;
    }
    return parsed;
}

} // namespace llmjoin
