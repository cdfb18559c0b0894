#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "llmjoin/errors.hpp"
#include "llmjoin/table.hpp"
#include "llmjoin/tokenizer.hpp"

namespace llmjoin {

struct QualityMetrics {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    /// Set when no pairs were returned, making precision vacuous (reported as 1).
    bool precision_undefined = false;
};

/// Recall, precision, and F1 of a returned pair set against ground truth.
inline QualityMetrics score(const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                            const std::set<std::pair<std::int64_t, std::int64_t>>& truth) {
    std::int64_t hits = 0;
    std::set<std::pair<std::int64_t, std::int64_t>> unique(pairs.begin(), pairs.end());
    for (const auto& pair : unique) {
        if (truth.count(pair) > 0) ++hits;
    }
    QualityMetrics m;
    if (unique.empty()) {
        m.precision = 1.0;
        m.precision_undefined = true;
    } else {
        m.precision = static_cast<double>(hits) / static_cast<double>(unique.size());
    }
    m.recall = truth.empty() ? 1.0
                             : static_cast<double>(hits) / static_cast<double>(truth.size());
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

/// Two generated tables, the natural-language predicate joining them, and
/// the exact ground-truth pair set.
struct Benchmark {
    Table table1;
    Table table2;
    std::set<std::pair<std::int64_t, std::int64_t>> ground_truth;
    std::string predicate_text;

    double realized_selectivity() const {
        return static_cast<double>(ground_truth.size()) /
               (static_cast<double>(table1.row_count()) *
                static_cast<double>(table2.row_count()));
    }
};

namespace benchdata {

inline const std::array<std::string, 10> kNames = {
    "Alice", "Bob",   "Carol",  "David",  "Emma",
    "Frank", "Grace", "Henry",  "Isabel", "James"};

inline const std::array<std::string, 12> kMonths = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

inline const std::array<std::string, 4> kMaterials = {
    "made of wood", "made of metal", "made of glass", "made of plastic"};

inline const std::array<std::string, 4> kColors = {"blue", "red", "green", "white"};

} // namespace benchdata

/// Statements versus emails: each statement claims when its author first
/// heard about the losses, each email records when that person was told.
/// A pair contradicts (and joins) when the email's date strictly precedes
/// the statement's claimed first-hearing date. Per name, exactly one
/// statement is placed after the email date, so the default 100x10 shape
/// yields ten contradicting pairs.
inline Benchmark gen_emails(std::int64_t num_statements, std::int64_t num_emails,
                            std::uint64_t seed) {
    if (num_statements < 1 || num_emails < 1) {
        throw DomainError("gen_emails: counts must be >= 1");
    }
    using benchdata::kMonths;
    using benchdata::kNames;
    std::mt19937_64 rng(seed);
    const std::size_t name_count = kNames.size();
    Tokenizer tokenizer = Tokenizer::chars_div_4();

    // One "told" month per email; mid-year so both earlier and later
    // statement months exist.
    std::vector<std::size_t> email_name(static_cast<std::size_t>(num_emails));
    std::vector<std::size_t> email_month(static_cast<std::size_t>(num_emails));
    Table emails;
    const std::array<std::string, 2> phrases = {"already in", "at some point in"};
    for (std::int64_t j = 0; j < num_emails; ++j) {
        std::size_t name = static_cast<std::size_t>(j) % name_count;
        std::size_t month = 6 + rng() % 2;  // July or August
        email_name[static_cast<std::size_t>(j)] = name;
        email_month[static_cast<std::size_t>(j)] = month;
        std::string text = "I first told " + kNames[name] + " about the losses " +
                           phrases[rng() % phrases.size()] + " " + kMonths[month] +
                           " 2022.";
        emails.add(Tuple{j, text, count_tokens(text, tokenizer)});
    }

    // First email month per name, for steering statement months.
    std::vector<std::size_t> told_month(name_count, kMonths.size());
    for (std::size_t j = 0; j < email_name.size(); ++j) {
        if (told_month[email_name[j]] == kMonths.size()) told_month[email_name[j]] = email_month[j];
    }

    // Position of the one contradicting statement within each name's group.
    std::vector<std::size_t> group_size(name_count, 0);
    for (std::int64_t i = 0; i < num_statements; ++i) {
        ++group_size[static_cast<std::size_t>(i) % name_count];
    }
    std::vector<std::size_t> late_pos(name_count, 0);
    for (std::size_t k = 0; k < name_count; ++k) {
        if (group_size[k] > 0) late_pos[k] = rng() % group_size[k];
    }

    Table statements;
    std::vector<std::size_t> statement_month(static_cast<std::size_t>(num_statements));
    for (std::int64_t i = 0; i < num_statements; ++i) {
        std::size_t name = static_cast<std::size_t>(i) % name_count;
        std::size_t pos = static_cast<std::size_t>(i) / name_count;
        std::size_t anchor = told_month[name] == kMonths.size() ? 6 : told_month[name];
        std::size_t month;
        if (pos == late_pos[name]) {
            // claimed first hearing after being told: a contradiction
            month = anchor + 1 + rng() % (kMonths.size() - anchor - 1);
        } else {
            month = rng() % (anchor + 1);
        }
        statement_month[static_cast<std::size_t>(i)] = month;
        std::string text = kNames[name] + ": I first heard about the losses in " +
                           kMonths[month] + " 2022.";
        statements.add(Tuple{i, text, count_tokens(text, tokenizer)});
    }

    Benchmark bench;
    bench.predicate_text = "the two texts contradict each other";
    for (std::int64_t i = 0; i < num_statements; ++i) {
        std::size_t s_name = static_cast<std::size_t>(i) % name_count;
        for (std::int64_t j = 0; j < num_emails; ++j) {
            if (email_name[static_cast<std::size_t>(j)] != s_name) continue;
            if (email_month[static_cast<std::size_t>(j)] <
                statement_month[static_cast<std::size_t>(i)]) {
                bench.ground_truth.insert({i, j});
            }
        }
    }
    bench.table1 = std::move(statements);
    bench.table2 = std::move(emails);
    return bench;
}

/// Ads versus searches over material and color vocabularies; a pair joins
/// when material and color both match. The default 16x16 shape enumerates
/// all combinations on the ad side, so every search matches exactly one ad.
inline Benchmark gen_ads(std::int64_t num_ads, std::int64_t num_searches,
                         std::uint64_t seed) {
    if (num_ads < 1 || num_searches < 1) {
        throw DomainError("gen_ads: counts must be >= 1");
    }
    using benchdata::kColors;
    using benchdata::kMaterials;
    std::mt19937_64 rng(seed);
    Tokenizer tokenizer = Tokenizer::chars_div_4();
    const std::size_t combos = kMaterials.size() * kColors.size();

    std::vector<std::size_t> ad_combo(static_cast<std::size_t>(num_ads));
    std::vector<std::size_t> search_combo(static_cast<std::size_t>(num_searches));

    // Ads cycle through all combinations in a seeded shuffle; searches draw
    // combinations at random.
    std::vector<std::size_t> order(combos);
    for (std::size_t c = 0; c < combos; ++c) order[c] = c;
    for (std::size_t c = combos - 1; c > 0; --c) {
        std::swap(order[c], order[rng() % (c + 1)]);
    }
    for (std::size_t i = 0; i < ad_combo.size(); ++i) ad_combo[i] = order[i % combos];
    for (std::size_t j = 0; j < search_combo.size(); ++j) search_combo[j] = rng() % combos;

    auto material = [&](std::size_t combo) { return kMaterials[combo / kColors.size()]; };
    auto color = [&](std::size_t combo) { return kColors[combo % kColors.size()]; };

    Benchmark bench;
    bench.predicate_text = "pairs of ads matching requests";
    for (std::int64_t i = 0; i < num_ads; ++i) {
        std::size_t combo = ad_combo[static_cast<std::size_t>(i)];
        std::string text =
            "Offering table that is " + material(combo) + " and " + color(combo) + ".";
        bench.table1.add(Tuple{i, text, count_tokens(text, tokenizer)});
    }
    for (std::int64_t j = 0; j < num_searches; ++j) {
        std::size_t combo = search_combo[static_cast<std::size_t>(j)];
        std::string text =
            "Searching table that is " + material(combo) + " and " + color(combo) + ".";
        bench.table2.add(Tuple{j, text, count_tokens(text, tokenizer)});
    }
    for (std::int64_t i = 0; i < num_ads; ++i) {
        for (std::int64_t j = 0; j < num_searches; ++j) {
            if (ad_combo[static_cast<std::size_t>(i)] ==
                search_combo[static_cast<std::size_t>(j)]) {
                bench.ground_truth.insert({i, j});
            }
        }
    }
    return bench;
}

inline void save_ground_truth_csv(
    const std::set<std::pair<std::int64_t, std::int64_t>>& truth, std::ostream& out) {
    out << "id1,id2\n";
    for (const auto& [id1, id2] : truth) out << id1 << ',' << id2 << '\n';
}

inline void save_ground_truth_csv(
    const std::set<std::pair<std::int64_t, std::int64_t>>& truth, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write ground truth file: " + path);
    save_ground_truth_csv(truth, out);
}

inline std::set<std::pair<std::int64_t, std::int64_t>> load_ground_truth_csv(
    std::istream& in) {
    std::vector<std::string> fields;
    if (!detail::csv_read_record(in, fields) || fields.size() < 2 ||
        fields[0] != "id1" || fields[1] != "id2") {
        throw ParseError("ground truth CSV must start with header 'id1,id2'");
    }
    std::set<std::pair<std::int64_t, std::int64_t>> truth;
    std::size_t record = 1;
    while (detail::csv_read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) { ++record; continue; }
        if (fields.size() < 2) {
            throw ParseError("record " + std::to_string(record) + ": expected id1,id2");
        }
        truth.insert({detail::parse_id(fields[0], record), detail::parse_id(fields[1], record)});
        ++record;
    }
    return truth;
}

inline std::set<std::pair<std::int64_t, std::int64_t>> load_ground_truth_csv(
    const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open ground truth file: " + path);
    return load_ground_truth_csv(in);
}

} // namespace llmjoin
