#include <doctest.h>

#include "qcut/rational.hpp"

using namespace qcut;

TEST_CASE("parse and print") {
    CHECK(rat_to_string(rat_from_string("3/5")) == "3/5");
    CHECK(rat_to_string(rat_from_string("-3/5")) == "-3/5");
    CHECK(rat_to_string(rat_from_string("7")) == "7");
    CHECK(rat_to_string(rat_from_string("4/2")) == "2");  // lowest terms
    CHECK(rat_to_string(rat_from_string("-8/2")) == "-4");
    CHECK(rat_to_string(rat_from_string("0/9")) == "0");
    CHECK(!rat_parse("1/0").has_value());
    CHECK(!rat_parse("").has_value());
    CHECK(!rat_parse("a/b").has_value());
    CHECK(!rat_parse("1.5").has_value());
}

TEST_CASE("canonical form makes equality structural") {
    CHECK(rat_from_string("2/4") == rat_from_string("1/2"));
    CHECK(rat_of(-1, -2) == rat_of(1, 2));  // denominator kept positive
    CHECK(rat_of(3, 5) * rat_of(5, 3) == 1);
}

TEST_CASE("exact arithmetic has no rounding") {
    Rat a = rat_of(1, 3);
    Rat sum(0);
    for (int i = 0; i < 3000; ++i) sum += a;
    CHECK(sum == 1000);
    CHECK(rat_of(1, 3) + rat_of(1, 5) == rat_of(8, 15));
}
