// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace plapdg {

/// Exact rational exponent p = num/den with p = 2 + 2k/l, gcd(k, l) = 1.
/// k = 0 (p = 2) only exists in linear mode.
struct RationalExponent {
  std::int64_t num = 2;
  std::int64_t den = 1;
  std::int64_t k = 0;
  std::int64_t l = 1;
  std::int64_t conj_num = 2;  // p' = p/(p - 1)
  std::int64_t conj_den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  double conj() const { return static_cast<double>(conj_num) / static_cast<double>(conj_den); }
  bool linear() const { return k == 0; }
  std::string str() const;

  friend bool operator==(const RationalExponent&, const RationalExponent&) = default;
};

/// Throws std::invalid_argument for p < 2, and for p == 2 unless
/// allow_linear is set.
RationalExponent rationalize_exponent(std::int64_t num, std::int64_t den, bool allow_linear = false);

/// Accepts "4", "2.5", "4.50" or "9/2".
RationalExponent parse_exponent(std::string_view text, bool allow_linear = false);

}  // namespace plapdg
