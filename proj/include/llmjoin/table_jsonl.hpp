#pragma once

#include <fstream>
#include <istream>
#include <string>

#include <json.hpp>

#include "llmjoin/table.hpp"

namespace llmjoin {

/// Loads a table from JSON lines: one object per line with "id" and "text".
inline Table load_table_jsonl(std::istream& in, const Tokenizer& tokenizer) {
    std::vector<Tuple> tuples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("text")) {
            throw ParseError("line " + std::to_string(lineno) +
                             ": expected an object with \"id\" and \"text\"");
        }
        if (!obj["id"].is_number_integer() || !obj["text"].is_string()) {
            throw ParseError("line " + std::to_string(lineno) +
                             ": \"id\" must be an integer and \"text\" a string");
        }
        std::string text = obj["text"].get<std::string>();
        std::int64_t size = count_tokens(text, tokenizer);
        tuples.push_back(Tuple{obj["id"].get<std::int64_t>(), std::move(text), size});
    }
    return Table(std::move(tuples));
}

inline Table load_table_jsonl(const std::string& path, const Tokenizer& tokenizer) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open table file: " + path);
    return load_table_jsonl(in, tokenizer);
}

} // namespace llmjoin
