// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "plapdg/parallel.hpp"
#include "plapdg/verify.hpp"

namespace plapdg::verify {

namespace {

struct V2 {
  double x = 0.0, y = 0.0;
};
V2 operator+(V2 a, V2 b) { return {a.x + b.x, a.y + b.y}; }
V2 operator-(V2 a, V2 b) { return {a.x - b.x, a.y - b.y}; }
V2 operator*(double s, V2 a) { return {s * a.x, s * a.y}; }
double dot(V2 a, V2 b) { return a.x * b.x + a.y * b.y; }
double norm(V2 a) { return std::hypot(a.x, a.y); }

V2 random_in_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rad = radius * std::sqrt(u(rng));
  const double phi = 2.0 * std::numbers::pi * u(rng);
  return {rad * std::cos(phi), rad * std::sin(phi)};
}

V2 random_direction(std::mt19937_64& rng) {
  const double phi = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  return {std::cos(phi), std::sin(phi)};
}

// Log-uniform magnitude in [10^lo, 10^hi], exactly zero with probability 1/8.
double magnitude(std::mt19937_64& rng, double lo, double hi) {
  if (std::uniform_int_distribution<int>(0, 7)(rng) == 0) return 0.0;
  return std::pow(10.0, std::uniform_real_distribution<double>(lo, hi)(rng));
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::pow(10.0, std::uniform_real_distribution<double>(lo, hi)(rng));
}

// (a^2 + |y|^2)^{(p-2)/2} y
V2 flux(double p, double a, V2 y) { return std::pow(a * a + dot(y, y), 0.5 * (p - 2.0)) * y; }

// LHS/RHS with the convention 0/0 = 0.
double ratio(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

Lemma21Constants estimate_lemma21_constants(double p, std::int64_t n_samples, std::uint64_t seed) {
  struct Acc {
    double c1 = 0.0, c2 = std::numeric_limits<double>::infinity();
    std::int64_t used = 0, skipped = 0;
  };
  const int workers = worker_count();
  std::vector<Acc> acc(workers);
  parallel_for(n_samples, workers, [&](std::int64_t b, std::int64_t e, int w) {
    Acc& a = acc[w];
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::int64_t i = b; i < e; ++i) {
      std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(i)));
      // Alternate general, a = 0, near-degenerate, and both.
      const int kind = static_cast<int>(i % 4);
      const double s = (kind == 1 || kind == 3) ? 0.0 : 10.0 * u01(rng);
      const V2 y = random_in_disk(rng, 10.0);
      V2 z;
      if (kind >= 2) {
        z = y + (1e-6 * u01(rng)) * random_direction(rng);
      } else {
        z = random_in_disk(rng, 10.0);
      }
      const V2 d = y - z;
      const double nd = norm(d);
      if (nd == 0.0) {
        ++a.skipped;
        continue;
      }
      const V2 df = flux(p, s, y) - flux(p, s, z);
      const double base = std::pow(s + norm(y) + norm(z), p - 2.0);
      a.c1 = std::max(a.c1, norm(df) / (base * nd));
      a.c2 = std::min(a.c2, dot(df, d) / (base * nd * nd));
      ++a.used;
    }
  });
  Lemma21Constants out;
  out.c2 = std::numeric_limits<double>::infinity();
  for (const Acc& a : acc) {
    out.c1 = std::max(out.c1, a.c1);
    out.c2 = std::min(out.c2, a.c2);
    out.samples += a.used;
    out.skipped += a.skipped;
  }
  return out;
}

Lemma21Constants cached_lemma21_constants(const RationalExponent& p) {
  static std::mutex mutex;
  static std::map<std::pair<std::int64_t, std::int64_t>, Lemma21Constants> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(p.num, p.den);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  return cache[key] = estimate_lemma21_constants(p.value(), 100000, 1);
}

std::vector<CheckReport> check_algebraic(double p, std::int64_t n_samples, std::uint64_t seed) {
  constexpr int kChecks = 4;
  const std::array<const char*, kChecks> names{"young_original", "young", "young_gamma", "quasi_triangle"};
  const double pc = p / (p - 1.0);
  const double tri_const = std::max(2.0, std::pow(2.0, p - 1.0));

  struct Acc {
    std::array<double, kChecks> max_ratio{};
    std::array<std::int64_t, kChecks> violations{};
  };
  const int workers = worker_count();
  std::vector<Acc> acc(workers);
  parallel_for(n_samples, workers, [&](std::int64_t b, std::int64_t e, int w) {
    Acc& a = acc[w];
    for (std::int64_t i = b; i < e; ++i) {
      std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(i)));
      const double alpha = magnitude(rng, -3, 3);
      const double b1 = magnitude(rng, -3, 3);
      const double b2 = magnitude(rng, -3, 3);
      const double eps = log_uniform(rng, -3, 3);
      const double gamma = log_uniform(rng, -3, 3);
      const double lambda = magnitude(rng, -3, 3);
      const double mu = std::max(1.0, 1.0 / (4.0 * eps));
      V2 y = magnitude(rng, -3, 3) * random_direction(rng);
      V2 z = magnitude(rng, -3, 3) * random_direction(rng);
      if (i % 16 == 0) z = -1.0 * y;
      if (i % 16 == 1) z = y;

      std::array<double, kChecks> r{};
      r[0] = ratio(b1 * b2, std::pow(eps, p) / p * std::pow(b1, p) + std::pow(b2, pc) / (pc * std::pow(eps, pc)));
      const double lhs = std::pow(alpha + b1, p - 2.0) * b1 * b2;
      r[1] = ratio(lhs, mu * std::pow(alpha + b1, p - 2.0) * b1 * b1 + eps * std::pow(alpha + b2, p - 2.0) * b2 * b2);
      r[2] = ratio(lhs, mu / gamma * std::pow(alpha + b1, p - 2.0) * b1 * b1 +
                            gamma * eps * std::pow(alpha + gamma * b2, p - 2.0) * b2 * b2);
      const double ny = norm(y), nz = norm(z), ns = norm(y + z);
      r[3] = ratio(std::pow(lambda + ns, p - 2.0) * ns * ns,
                   tri_const * (std::pow(lambda + ny, p - 2.0) * ny * ny + std::pow(lambda + nz, p - 2.0) * nz * nz));
      for (int c = 0; c < kChecks; ++c) {
        a.max_ratio[c] = std::max(a.max_ratio[c], r[c]);
        if (r[c] > 1.0 + kRatioTolerance) ++a.violations[c];
      }
    }
  });

  std::vector<CheckReport> out(kChecks);
  for (int c = 0; c < kChecks; ++c) {
    CheckReport& rep = out[c];
    rep.lemma = names[c];
    rep.samples = n_samples;
    rep.seed = seed;
    rep.params = {{"p", p}};
    for (const Acc& a : acc) {
      rep.max_ratio = std::max(rep.max_ratio, a.max_ratio[c]);
      rep.violations += a.violations[c];
    }
  }
  return out;
}

}  // namespace plapdg::verify
