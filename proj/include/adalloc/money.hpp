#pragma once

#include <cmath>
#include <cstdint>

namespace adalloc {

// Money is held in integer micro-units (1 currency unit == 1'000'000 micro).
// All revenue/cost accumulation happens in this type so that sums are exact
// and independent of summation order.
using Money = std::int64_t;

inline constexpr Money kMoneyScale = 1'000'000;

// Conversion uses division (not multiplication by 1e-6) so that whole
// currency amounts convert without rounding.
inline double to_currency(Money m) {
  return static_cast<double>(m) / static_cast<double>(kMoneyScale);
}

inline Money money_from_currency(double c) {
  return static_cast<Money>(std::llround(c * static_cast<double>(kMoneyScale)));
}

}  // namespace adalloc
