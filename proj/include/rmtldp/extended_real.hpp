#pragma once

#include <cmath>
#include <compare>
#include <optional>
#include <string>

#include "rmtldp/errors.hpp"

namespace rmtldp {

/// A real number or +infinity, kept as a tagged value so that infinity never
/// travels through arithmetic as a floating sentinel.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit by intent

  static constexpr ExtendedReal infinity() {
    ExtendedReal e;
    e.infinite_ = true;
    return e;
  }

  [[nodiscard]] constexpr bool is_finite() const { return !infinite_; }
  [[nodiscard]] constexpr bool is_infinite() const { return infinite_; }

  /// Finite value; throws if infinite.
  [[nodiscard]] double value() const {
    if (infinite_) throw DomainError("ExtendedReal::value() on +inf");
    return value_;
  }

  /// Finite value or std::numeric_limits infinity, for arithmetic at call sites
  /// that handle both.
  [[nodiscard]] double as_double() const { return infinite_ ? HUGE_VAL : value_; }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a,
                                                     const ExtendedReal& b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace rmtldp
