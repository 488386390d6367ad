// SPDX-License-Identifier: Apache-2.0
#include "plapdg/exponent.hpp"

#include <charconv>
#include <numeric>
#include <stdexcept>

namespace plapdg {

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("cannot parse exponent '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

std::string RationalExponent::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

RationalExponent rationalize_exponent(std::int64_t num, std::int64_t den, bool allow_linear) {
  if (den == 0) throw std::invalid_argument("exponent with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num /= g;
  den /= g;
  if (num < 2 * den) throw std::invalid_argument("exponent p = " + std::to_string(num) + "/" +
                                                 std::to_string(den) + " must be at least 2");
  if (num == 2 * den && !allow_linear) {
    throw std::invalid_argument("p = 2 is only accepted in linear mode");
  }

  RationalExponent p;
  p.num = num;
  p.den = den;
  // (p - 2)/2 = (num - 2 den)/(2 den)
  std::int64_t k = num - 2 * den, l = 2 * den;
  if (k == 0) {
    l = 1;
  } else {
    const std::int64_t h = std::gcd(k, l);
    k /= h;
    l /= h;
  }
  p.k = k;
  p.l = l;
  const std::int64_t cn = num, cd = num - den;
  const std::int64_t h = std::gcd(cn, cd);
  p.conj_num = cn / h;
  p.conj_den = cd / h;
  return p;
}

RationalExponent parse_exponent(std::string_view text, bool allow_linear) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return rationalize_exponent(parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text),
                                allow_linear);
  }
  const auto dot = text.find('.');
  if (dot == std::string_view::npos) return rationalize_exponent(parse_int(text, text), 1, allow_linear);

  const std::string_view whole = text.substr(0, dot), frac = text.substr(dot + 1);
  if (frac.size() > 12) throw std::invalid_argument("exponent '" + std::string(text) + "' has too many digits");
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::int64_t w = whole.empty() ? 0 : parse_int(whole, text);
  const std::int64_t f = frac.empty() ? 0 : parse_int(frac, text);
  if (f < 0 || (!frac.empty() && (frac.front() == '+' || frac.front() == '-'))) {
    throw std::invalid_argument("cannot parse exponent '" + std::string(text) + "'");
  }
  return rationalize_exponent(w * den + f, den, allow_linear);
}

}  // namespace plapdg
