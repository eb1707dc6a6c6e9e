#pragma once

#include <cstdint>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace geoforge {

class RationalOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// Exact rational with 64-bit numerator/denominator. Always normalized:
// gcd(num, den) == 1 and den > 0. Intermediate products use 128 bits and
// throw RationalOverflow if the reduced result does not fit.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t n, std::int64_t d);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_integer() const { return den_ == 1; }
    bool is_positive() const { return num_ > 0; }

    // "n" or "n/d"; negative values carry a leading '-'.
    std::string str() const;
    static std::optional<Rational> parse(std::string_view text);

    // Exact square root when both terms are perfect squares.
    std::optional<Rational> sqrt() const;

    Rational operator-() const { return Rational(-num_, den_); }
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    static Rational from_wide(__int128 n, __int128 d);

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace geoforge
