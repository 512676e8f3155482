#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fastcox::csv {

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based line on which the record starts
};

struct Table {
    std::vector<std::string> header;
    std::vector<Record> rows;

    // Index of a header column, if present.
    std::optional<std::size_t> column(std::string_view name) const;
};

// RFC 4180: comma separated, optional double-quoted fields with "" escapes,
// LF or CRLF line endings, embedded newlines inside quotes. The first record
// is the header. Throws ParseError on ragged rows or unterminated quotes.
Table parse(std::istream& in);
Table read_file(const std::string& path);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Missing-value tokens: empty, NA, NaN, null (case-insensitive, surrounding
// whitespace ignored).
bool is_missing(std::string_view field);

// Decimal with optional sign and exponent; the whole trimmed field must parse
// and the value must be finite.
std::optional<double> parse_number(std::string_view field);

// Shortest representation that parses back to the same double.
std::string format_number(double value);

}  // namespace fastcox::csv
