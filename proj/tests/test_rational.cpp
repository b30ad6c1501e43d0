#include "catch_amalgamated.hpp"

#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "ssslab/rational.hpp"

using ssslab::make_rational;
using ssslab::parse_rational;
using ssslab::Rational;

TEST_CASE("make_rational normalizes sign and common factors")
{
    CHECK(make_rational(2, 7) == Rational(2, 7));
    CHECK(make_rational(2, 7).num() == 2);
    CHECK(make_rational(2, 7).den() == 7);

    auto r = make_rational(3, -6);
    CHECK(r.num() == -1);
    CHECK(r.den() == 2);

    auto s = make_rational(10, 100);
    CHECK(s.num() == 1);
    CHECK(s.den() == 10);

    auto zero = make_rational(0, -5);
    CHECK(zero.num() == 0);
    CHECK(zero.den() == 1);

    CHECK_THROWS_AS(make_rational(1, 0), std::invalid_argument);
}

TEST_CASE("parse_rational reads fractions and exact decimals")
{
    CHECK(parse_rational("2/7") == Rational(2, 7));
    CHECK(parse_rational("0.95") == Rational(19, 20));
    CHECK(parse_rational("0.4") == Rational(2, 5));
    CHECK(parse_rational("0.05") == Rational(1, 20));
    CHECK(parse_rational("1") == Rational(1));
    CHECK(parse_rational("-3/6") == Rational(-1, 2));
    CHECK(parse_rational(".5") == Rational(1, 2));
    CHECK(parse_rational(" 1.250 ") == Rational(5, 4));
    CHECK(parse_rational("0.1000000000000000000") == Rational(1, 10));

    for (const char* bad : {"", "abc", "1/0", "1.2.3", "1/2/3", "0.5/2", "/3", "3/", "-", "1e-3", "0x10"})
        CHECK_THROWS_AS(parse_rational(bad), ssslab::parse_error);
    CHECK_THROWS_AS(parse_rational("123456789012345678901234567890"), ssslab::parse_error);
}

TEST_CASE("compare cross-multiplies exactly")
{
    CHECK(ssslab::compare(Rational(9, 80), Rational(1, 10)) == std::strong_ordering::greater);
    CHECK(ssslab::compare(Rational(1, 2), Rational(1, 2)) == std::strong_ordering::equal);
    CHECK(ssslab::compare(Rational(3, 7), Rational(1, 2)) == std::strong_ordering::less);

    // Operands whose doubles coincide but whose values differ.
    constexpr std::int64_t big = std::int64_t{1} << 62;
    Rational x(big, big + 1), y(big + 1, big + 2);
    CHECK(x.to_double() == y.to_double());
    CHECK(x < y);
}

TEST_CASE("arithmetic is exact and reports overflow")
{
    CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
    CHECK(Rational(1) - Rational(1, 10) == Rational(9, 10));
    CHECK(Rational(3, 2) * Rational(2, 7) == Rational(3, 7));
    CHECK(Rational(1, 2) / Rational(1, 4) == Rational(2));
    CHECK(-Rational(2, 3) == Rational(-2, 3));
    CHECK(Rational(17, 20).ceil() == 1);
    CHECK(Rational(-17, 20).ceil() == 0);
    CHECK(Rational(-17, 20).floor() == -1);
    CHECK(Rational(40, 20).ceil() == 2);

    constexpr std::int64_t big = std::numeric_limits<std::int64_t>::max();
    CHECK_THROWS_AS(Rational(big) + Rational(1), std::overflow_error);
    CHECK_THROWS_AS(Rational(1, big) * Rational(1, 3), std::overflow_error);
    CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
}

TEST_CASE("normalization is idempotent under common scaling")
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> part(-1000000, 1000000);
    std::uniform_int_distribution<std::int64_t> scale(-100000, 100000);
    for (int i = 0; i < 20000; ++i) {
        std::int64_t num = part(rng), den = part(rng), k = scale(rng);
        if (den == 0 || k == 0)
            continue;
        Rational r(num, den);
        CHECK(Rational(r.num() * k, r.den() * k) == r);
        CHECK(r.den() > 0);
        CHECK(std::gcd(r.num(), r.den()) == 1);
    }
}

TEST_CASE("ordering agrees with an arbitrary-precision cross-multiplication oracle")
{
    using boost::multiprecision::cpp_int;
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::int64_t> wide(std::numeric_limits<std::int64_t>::min() + 1,
                                                     std::numeric_limits<std::int64_t>::max());
    std::uniform_int_distribution<std::int64_t> positive(1, std::numeric_limits<std::int64_t>::max());
    for (int i = 0; i < 20000; ++i) {
        Rational x(wide(rng), positive(rng));
        Rational y(wide(rng), positive(rng));
        cpp_int lhs = cpp_int(x.num()) * y.den();
        cpp_int rhs = cpp_int(y.num()) * x.den();
        auto expected = lhs < rhs ? std::strong_ordering::less
                                  : (lhs > rhs ? std::strong_ordering::greater : std::strong_ordering::equal);
        CHECK((x <=> y) == expected);
        CHECK((x < y) == (y > x));
    }
}

TEST_CASE("decimal parsing matches digits over a power of ten")
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> digit(0, 9), length(1, 17);
    for (int i = 0; i < 5000; ++i) {
        std::string digits;
        int len = length(rng);
        for (int d = 0; d < len; ++d)
            digits.push_back(static_cast<char>('0' + digit(rng)));
        std::int64_t value = std::stoll(digits);
        std::int64_t pow10 = 1;
        for (int d = 0; d < len; ++d)
            pow10 *= 10;
        CHECK(parse_rational("0." + digits) == make_rational(value, pow10));
    }
}
