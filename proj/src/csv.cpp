#include "fastcox/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "fastcox/errors.hpp"

namespace fastcox::csv {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

Table parse(std::istream& in) {
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<Record> records;
    Record current;
    current.line = 1;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;
    std::size_t line = 1;
    std::size_t quote_line = 0;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        // A blank line yields a single empty unquoted field; skip it.
        if (record_has_content || current.fields.size() > 1) records.push_back(std::move(current));
        current = Record{};
        current.line = line;
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty() || field_was_quoted) {
                    throw ParseError("unexpected quote inside unquoted field", line);
                }
                in_quotes = true;
                field_was_quoted = true;
                record_has_content = true;
                quote_line = line;
                break;
            case ',':
                record_has_content = true;
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                ++line;
                end_record();
                break;
            case '\n':
                ++line;
                end_record();
                break;
            default:
                record_has_content = true;
                field.push_back(c);
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", quote_line);
    if (record_has_content || !field.empty()) end_record();

    // UTF-8 byte order mark on the header.
    if (!records.empty() && !records.front().fields.empty()) {
        auto& first = records.front().fields.front();
        if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
    }

    Table table;
    if (records.empty()) throw ParseError("missing header row", 1);
    table.header = std::move(records.front().fields);
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].fields.size() != table.header.size()) {
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(records[r].fields.size()),
                             records[r].line);
        }
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return parse(in);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

bool is_missing(std::string_view field) {
    const auto t = trim(field);
    return t.empty() || iequals(t, "NA") || iequals(t, "NaN") || iequals(t, "null");
}

std::optional<double> parse_number(std::string_view field) {
    auto t = trim(field);
    if (!t.empty() && t.front() == '+') t.remove_prefix(1);
    if (t.empty()) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ec == std::errc{} ? ptr : buf);
}

}  // namespace fastcox::csv
