#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "citytypo/util.hpp"

using namespace citytypo;

TEST_CASE("fnv1a64 is stable and order-sensitive") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("abc") != fnv1a64("acb"));
    CHECK(fnv1a64("abc") == fnv1a64("abc"));
}

TEST_CASE("hash_lines distinguishes item boundaries") {
    CHECK(hash_lines({"ab", "c"}) != hash_lines({"a", "bc"}));
    CHECK(hash_lines({"a", "b"}) == hash_lines({"a", "b"}));
    CHECK(hash_lines({}) != hash_lines({""}));
}

TEST_CASE("SplitMix64 shuffle is deterministic and draws are in range") {
    std::vector<int> a = {1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> b = a;
    SplitMix64 r1(42), r2(42);
    deterministic_shuffle(a, r1);
    deterministic_shuffle(b, r2);
    CHECK(a == b);

    SplitMix64 r3(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r3.next_below(13) < 13);
        double d = r3.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
}

TEST_CASE("parse_numeral handles separators, units and junk") {
    CHECK(*parse_numeral("8,804,190") == doctest::Approx(8804190.0));
    CHECK(*parse_numeral("10,000/sq mi") == doctest::Approx(10000.0));
    CHECK(*parse_numeral("259 km2") == doctest::Approx(259.0));
    CHECK(*parse_numeral("about 1,234.5 things") == doctest::Approx(1234.5));
    CHECK(*parse_numeral("778.18") == doctest::Approx(778.18));
    CHECK(!parse_numeral("n/a").has_value());
    CHECK(!parse_numeral("").has_value());
}

TEST_CASE("collapse_whitespace and trim") {
    CHECK(collapse_whitespace("  a\t\tb \n c  ") == "a b c");
    CHECK(trim("  x ") == "x");
    CHECK(trim("") == "");
}

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    auto tokens = tokenize("San-Diego's 2nd Harbor!");
    CHECK(tokens == std::vector<std::string>{"san", "diego", "s", "2nd", "harbor"});
}

TEST_CASE("csv round-trips quoted fields") {
    std::vector<std::string> fields = {"dhaka", "Dhaka, Bangladesh", "with \"quotes\"", ""};
    std::string row = csv_row(fields);
    CHECK(parse_csv_record(row) == fields);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456.789, -2.5e300}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("sanitize_key replaces path-hostile characters") {
    CHECK(sanitize_key("a/b c:d") == "a_b_c_d");
    CHECK(sanitize_key("ok-1.2_x") == "ok-1.2_x");
}
