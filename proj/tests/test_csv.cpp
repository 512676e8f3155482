#include <doctest.h>

#include <sstream>

#include "fastcox/csv.hpp"
#include "fastcox/errors.hpp"

using namespace fastcox;

TEST_CASE("quoted fields, escapes, CRLF and embedded newlines") {
    std::istringstream in("a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\r\n2,\"multi\nline\",z\n\n");
    const csv::Table t = csv::parse(in);
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].fields[1] == "x,y");
    CHECK(t.rows[0].fields[2] == "say \"hi\"");
    CHECK(t.rows[1].fields[1] == "multi\nline");
    CHECK(t.rows[0].line == 2);
    CHECK(t.rows[1].line == 3);
    CHECK(t.column("c") == 2);
    CHECK_FALSE(t.column("d").has_value());
}

TEST_CASE("empty fields survive") {
    std::istringstream in("a,b\n,\n1,\n");
    const csv::Table t = csv::parse(in);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].fields == std::vector<std::string>{"", ""});
    CHECK(t.rows[1].fields == std::vector<std::string>{"1", ""});
}

TEST_CASE("malformed input") {
    std::istringstream ragged("a,b\n1,2,3\n");
    CHECK_THROWS_AS(csv::parse(ragged), ParseError);
    std::istringstream open_quote("a\n\"abc\n");
    CHECK_THROWS_AS(csv::parse(open_quote), ParseError);
    std::istringstream empty("");
    CHECK_THROWS_AS(csv::parse(empty), ParseError);
    try {
        std::istringstream bad("a,b\n1,2\n3\n");
        csv::parse(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("escape round trip") {
    for (std::string s : {"plain", "with,comma", "with \"quote\"", "line\nbreak", ""}) {
        std::ostringstream out;
        csv::write_row(out, {"h"});
        csv::write_row(out, {s});
        std::istringstream in(out.str());
        const auto t = csv::parse(in);
        if (s.empty()) {
            CHECK(t.rows.empty());  // a lone empty field is a blank line
        } else {
            REQUIRE(t.rows.size() == 1);
            CHECK(t.rows[0].fields[0] == s);
        }
    }
}

TEST_CASE("numbers and missing tokens") {
    CHECK(csv::parse_number("1.5e3") == 1500.0);
    CHECK(csv::parse_number(" +2 ") == 2.0);
    CHECK(csv::parse_number("-0.25") == -0.25);
    CHECK_FALSE(csv::parse_number("abc").has_value());
    CHECK_FALSE(csv::parse_number("1.5x").has_value());
    CHECK_FALSE(csv::parse_number("inf").has_value());
    CHECK_FALSE(csv::parse_number("").has_value());
    CHECK(csv::is_missing(""));
    CHECK(csv::is_missing(" NA "));
    CHECK(csv::is_missing("nan"));
    CHECK_FALSE(csv::is_missing("0"));
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -2.5}) {
        CHECK(csv::parse_number(csv::format_number(v)) == v);
    }
}
