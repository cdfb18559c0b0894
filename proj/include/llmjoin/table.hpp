#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llmjoin/errors.hpp"
#include "llmjoin/tokenizer.hpp"

namespace llmjoin {

/// One row of an input table: a stable id, its textual content, and the
/// content's token count under the tokenizer that built it. Simulated
/// experiments construct tuples with fixed token sizes instead of counting.
struct Tuple {
    std::int64_t id = 0;
    std::string text;
    std::int64_t token_size = 0;
};

struct TableStats {
    std::int64_t row_count = 0;
    std::int64_t total_tokens = 0;

    double avg_tuple_tokens() const {
        return static_cast<double>(total_tokens) / static_cast<double>(row_count);
    }
};

class Table {
public:
    Table() = default;
    explicit Table(std::vector<Tuple> tuples) : tuples_(std::move(tuples)) {}

    static Table from_texts(const std::vector<std::pair<std::int64_t, std::string>>& rows,
                            const Tokenizer& tokenizer) {
        std::vector<Tuple> tuples;
        tuples.reserve(rows.size());
        for (const auto& [id, text] : rows) {
            tuples.push_back(Tuple{id, text, count_tokens(text, tokenizer)});
        }
        return Table(std::move(tuples));
    }

    const std::vector<Tuple>& tuples() const { return tuples_; }
    std::int64_t row_count() const { return static_cast<std::int64_t>(tuples_.size()); }
    bool empty() const { return tuples_.empty(); }

    void add(Tuple tuple) { tuples_.push_back(std::move(tuple)); }

    /// Recompute every token_size under a new tokenizer.
    void retokenize(const Tokenizer& tokenizer) {
        for (Tuple& t : tuples_) t.token_size = count_tokens(t.text, tokenizer);
    }

    TableStats stats() const {
        if (tuples_.empty()) throw EmptyTable("table_stats: table has no rows");
        TableStats s;
        s.row_count = row_count();
        for (const Tuple& t : tuples_) s.total_tokens += t.token_size;
        return s;
    }

private:
    std::vector<Tuple> tuples_;
};

inline TableStats table_stats(const Table& table) { return table.stats(); }

namespace detail {

// RFC 4180 style field quoting: quote when the field contains a comma,
// quote, or line break; double embedded quotes.
inline std::string csv_escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

/// Reads one CSV record (possibly spanning multiple physical lines inside
/// quoted fields). Returns false at end of input.
inline bool csv_read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != std::char_traits<char>::eof()) {
        any = true;
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') { field += '"'; in.get(); }
                else in_quotes = false;
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else {
            field += ch;
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

inline std::int64_t parse_id(const std::string& text, std::size_t record_index) {
    try {
        std::size_t pos = 0;
        std::int64_t id = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return id;
    } catch (const std::exception&) {
        throw ParseError("record " + std::to_string(record_index) +
                         ": id is not an integer: '" + text + "'");
    }
}

} // namespace detail

/// Loads a table from CSV with required header `id,text` (UTF-8).
inline Table load_table_csv(std::istream& in, const Tokenizer& tokenizer) {
    std::vector<std::string> fields;
    if (!detail::csv_read_record(in, fields) || fields.size() < 2 ||
        fields[0] != "id" || fields[1] != "text") {
        throw ParseError("CSV table must start with header 'id,text'");
    }
    std::vector<Tuple> tuples;
    std::size_t record = 1;
    while (detail::csv_read_record(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) { ++record; continue; }
        if (fields.size() < 2) {
            throw ParseError("record " + std::to_string(record) + ": expected id,text");
        }
        std::int64_t id = detail::parse_id(fields[0], record);
        tuples.push_back(Tuple{id, fields[1], count_tokens(fields[1], tokenizer)});
        ++record;
    }
    return Table(std::move(tuples));
}

inline Table load_table_csv(const std::string& path, const Tokenizer& tokenizer) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open table file: " + path);
    return load_table_csv(in, tokenizer);
}

inline void save_table_csv(const Table& table, std::ostream& out) {
    out << "id,text\n";
    for (const Tuple& t : table.tuples()) {
        out << t.id << ',' << detail::csv_escape(t.text) << '\n';
    }
}

inline void save_table_csv(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write table file: " + path);
    save_table_csv(table, out);
}

} // namespace llmjoin
