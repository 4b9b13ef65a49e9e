#pragma once

#include <compare>
#include <cstdint>

namespace qax {

/// Seconds since the Unix epoch.
using Timestamp = std::int64_t;

/// Amount in minor currency units (cents). Never fractional.
class Money {
public:
    constexpr Money() = default;
    constexpr explicit Money(std::int64_t minor) : minor_(minor) {}

    constexpr std::int64_t minor() const { return minor_; }

    constexpr Money& operator+=(Money other)
    {
        minor_ += other.minor_;
        return *this;
    }
    constexpr Money& operator-=(Money other)
    {
        minor_ -= other.minor_;
        return *this;
    }
    friend constexpr Money operator+(Money a, Money b) { return a += b; }
    friend constexpr Money operator-(Money a, Money b) { return a -= b; }
    friend constexpr Money operator-(Money a) { return Money{-a.minor_}; }

    constexpr auto operator<=>(const Money&) const = default;

private:
    std::int64_t minor_ = 0;
};

constexpr Money operator""_cents(unsigned long long v) { return Money{static_cast<std::int64_t>(v)}; }

} // namespace qax
