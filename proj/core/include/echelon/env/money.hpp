#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace echelon {

// Fixed-point currency amount in millionths of a unit.
//
// Every monetary term in the environment is an integer quantity times a
// price, so holding prices as integer micro-units makes all reward sums exact
// and order-independent. Conversion to double happens only at the boundary.
class Money {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }

  // Rounds to the nearest micro-unit; prices finer than 1e-6 are not representable.
  static Money from_double(double value) {
    if (!std::isfinite(value)) {
      throw std::invalid_argument("monetary value must be finite");
    }
    const double scaled = std::round(value * static_cast<double>(kScale));
    if (std::fabs(scaled) > 9.0e18) {
      throw std::out_of_range("monetary value out of range: " + std::to_string(value));
    }
    return Money(static_cast<std::int64_t>(scaled));
  }

  constexpr std::int64_t micros() const { return micros_; }

  // Nearest double to the exact decimal amount.
  double to_double() const {
    const std::int64_t whole = micros_ / kScale;
    const std::int64_t frac = micros_ % kScale;
    if (frac == 0) return static_cast<double>(whole);
    // Division of two exactly-representable integers is correctly rounded.
    if (std::llabs(micros_) < (std::int64_t{1} << 53)) {
      return static_cast<double>(micros_) / static_cast<double>(kScale);
    }
    return static_cast<double>(whole) + static_cast<double>(frac) / static_cast<double>(kScale);
  }

  constexpr Money& operator+=(Money o) {
    micros_ += o.micros_;
    return *this;
  }
  constexpr Money& operator-=(Money o) {
    micros_ -= o.micros_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return Money(a.micros_ + b.micros_); }
  friend constexpr Money operator-(Money a, Money b) { return Money(a.micros_ - b.micros_); }
  friend constexpr Money operator-(Money a) { return Money(-a.micros_); }
  // Unit price times an integer quantity.
  friend constexpr Money operator*(Money price, std::int64_t qty) { return Money(price.micros_ * qty); }
  friend constexpr Money operator*(std::int64_t qty, Money price) { return Money(price.micros_ * qty); }

  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

}  // namespace echelon
