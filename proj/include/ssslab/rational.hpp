#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ssslab {

__extension__ typedef __int128 wide_int;
__extension__ typedef unsigned __int128 wide_uint;

/// Thrown when text cannot be read as a rational number.
class parse_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline constexpr wide_int int64_min = std::numeric_limits<std::int64_t>::min();
inline constexpr wide_int int64_max = std::numeric_limits<std::int64_t>::max();

constexpr wide_int wide_abs(wide_int x) noexcept { return x < 0 ? -x : x; }

constexpr wide_int wide_gcd(wide_int x, wide_int y) noexcept
{
    x = wide_abs(x);
    y = wide_abs(y);
    while (y != 0) {
        wide_int r = x % y;
        x = y;
        y = r;
    }
    return x;
}

inline bool fits_int64(wide_int x) noexcept { return x >= int64_min && x <= int64_max; }

inline std::string wide_to_string(wide_int x)
{
    if (x == 0)
        return "0";
    bool neg = x < 0;
    wide_uint u = neg ? static_cast<wide_uint>(-(x + 1)) + 1 : static_cast<wide_uint>(x);
    std::string out;
    while (u != 0) {
        out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg)
        out.insert(out.begin(), '-');
    return out;
}

} // namespace detail

/// Exact fraction with 64-bit numerator and denominator.
///
/// Always held in lowest terms with a positive denominator; zero is 0/1.
/// Comparisons cross-multiply in 128 bits and therefore never overflow.
/// Arithmetic is carried out in 128 bits, reduced, and throws
/// std::overflow_error when the reduced result no longer fits 64 bits.
class Rational {
public:
    constexpr Rational() noexcept = default;
    constexpr Rational(std::int64_t value) noexcept : num_(value), den_(1) {}

    Rational(std::int64_t num, std::int64_t den) { *this = from_wide(num, den); }

    /// Normalize a 128-bit fraction; throws when den == 0 or the result overflows.
    static Rational from_wide(wide_int num, wide_int den)
    {
        if (den == 0)
            throw std::invalid_argument("rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        wide_int g = detail::wide_gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0)
            den = 1;
        if (!detail::fits_int64(num) || !detail::fits_int64(den))
            throw std::overflow_error("rational: value does not fit 64-bit terms");
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }

    constexpr std::int64_t num() const noexcept { return num_; }
    constexpr std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// Largest integer <= value.
    constexpr std::int64_t floor() const noexcept
    {
        std::int64_t q = num_ / den_;
        return (num_ % den_ != 0 && num_ < 0) ? q - 1 : q;
    }

    /// Smallest integer >= value.
    constexpr std::int64_t ceil() const noexcept
    {
        std::int64_t q = num_ / den_;
        return (num_ % den_ != 0 && num_ > 0) ? q + 1 : q;
    }

    std::string to_string() const
    {
        if (den_ == 1)
            return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend constexpr bool operator==(const Rational&, const Rational&) noexcept = default;

    friend constexpr std::strong_ordering operator<=>(const Rational& x, const Rational& y) noexcept
    {
        wide_int lhs = static_cast<wide_int>(x.num_) * y.den_;
        wide_int rhs = static_cast<wide_int>(y.num_) * x.den_;
        return lhs <=> rhs;
    }

    friend Rational operator+(const Rational& x, const Rational& y)
    {
        return from_wide(static_cast<wide_int>(x.num_) * y.den_ + static_cast<wide_int>(y.num_) * x.den_,
                         static_cast<wide_int>(x.den_) * y.den_);
    }

    friend Rational operator-(const Rational& x, const Rational& y)
    {
        return from_wide(static_cast<wide_int>(x.num_) * y.den_ - static_cast<wide_int>(y.num_) * x.den_,
                         static_cast<wide_int>(x.den_) * y.den_);
    }

    friend Rational operator*(const Rational& x, const Rational& y)
    {
        return from_wide(static_cast<wide_int>(x.num_) * y.num_, static_cast<wide_int>(x.den_) * y.den_);
    }

    friend Rational operator/(const Rational& x, const Rational& y)
    {
        if (y.num_ == 0)
            throw std::domain_error("rational: division by zero");
        return from_wide(static_cast<wide_int>(x.num_) * y.den_, static_cast<wide_int>(x.den_) * y.num_);
    }

    Rational operator-() const { return from_wide(-static_cast<wide_int>(num_), den_); }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// num/den in lowest terms with positive denominator.
inline Rational make_rational(std::int64_t num, std::int64_t den) { return Rational(num, den); }

inline std::strong_ordering compare(const Rational& x, const Rational& y) noexcept { return x <=> y; }

/// Parse "p/q", an integer "p", or a finite decimal such as "0.95" or "-.5".
///
/// Decimals are read digit by digit into an integer over a power of ten,
/// never through binary floating point, so "0.95" is exactly 19/20.
inline Rational parse_rational(std::string_view text)
{
    auto fail = [&](const char* why) -> parse_error {
        return parse_error(std::string("invalid rational '") + std::string(text) + "': " + why);
    };

    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    if (s.empty())
        throw fail("empty");

    // Reads an optionally signed run of digits; allow_point admits one '.'.
    auto read_number = [&](std::string_view part, bool allow_point) -> std::pair<wide_int, wide_int> {
        bool neg = false;
        if (!part.empty() && (part.front() == '+' || part.front() == '-')) {
            neg = part.front() == '-';
            part.remove_prefix(1);
        }
        wide_int value = 0;
        wide_int scale = 1;
        bool seen_point = false;
        bool seen_digit = false;
        for (char ch : part) {
            if (ch == '.') {
                if (!allow_point || seen_point)
                    throw fail("unexpected '.'");
                seen_point = true;
                continue;
            }
            if (ch < '0' || ch > '9')
                throw fail("unexpected character");
            seen_digit = true;
            value = value * 10 + (ch - '0');
            if (seen_point)
                scale *= 10;
            if (value > detail::int64_max * 10 || scale > detail::int64_max * 10)
                throw fail("too many digits");
        }
        if (!seen_digit)
            throw fail("missing digits");
        return {neg ? -value : value, scale};
    };

    auto slash = s.find('/');
    try {
        if (slash == std::string_view::npos) {
            auto [value, scale] = read_number(s, true);
            return Rational::from_wide(value, scale);
        }
        auto [p, p_scale] = read_number(s.substr(0, slash), false);
        auto [q, q_scale] = read_number(s.substr(slash + 1), false);
        (void)p_scale;
        (void)q_scale;
        if (q == 0)
            throw fail("zero denominator");
        return Rational::from_wide(p, q);
    } catch (const parse_error&) {
        throw;
    } catch (const std::exception&) {
        throw fail("out of range");
    }
}

} // namespace ssslab
