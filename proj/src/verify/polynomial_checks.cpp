// SPDX-License-Identifier: Apache-2.0
// Markov's inequality and the interval lemma for polynomials on [0, 1].
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include <boost/math/tools/minima.hpp>

#include "plapdg/parallel.hpp"
#include "plapdg/verify.hpp"

namespace plapdg::verify {

namespace {

constexpr int kGrid = 2000;
constexpr int kIntervalGrid = 100;

// Sum of c_n P_n(2x - 1) and its x-derivative, by the three-term
// recurrence with P'_{n+1} = P'_{n-1} + (2n + 1) P_n.
std::pair<double, double> series(std::span<const double> c, double x) {
  const double t = 2.0 * x - 1.0;
  double p0 = 1.0, p1 = t, d0 = 0.0, d1 = 1.0;
  double v = c[0], dv = 0.0;
  for (std::size_t n = 1; n < c.size(); ++n) {
    v += c[n] * p1;
    dv += c[n] * d1;
    const double p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
    const double d2 = d0 + (2.0 * n + 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {v, 2.0 * dv};
}

double eval(std::span<const double> c, double x) { return series(c, x).first; }
double eval_derivative(std::span<const double> c, double x) { return series(c, x).second; }

// max |g| on [0, 1]: dense grid, then Brent on the bracket around the best
// grid point. Returns (argmax, max).
template <class G>
std::pair<double, double> sup_abs(G&& g) {
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = std::abs(g(static_cast<double>(i) / kGrid));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = std::max(0.0, (best - 1.0) / kGrid), hi = std::min(1.0, (best + 1.0) / kGrid);
  const auto [x, neg] = boost::math::tools::brent_find_minima([&](double x) { return -std::abs(g(x)); }, lo, hi, 52);
  if (-neg > best_val) return {x, -neg};
  return {static_cast<double>(best) / kGrid, best_val};
}

std::vector<double> random_legendre(std::mt19937_64& rng, int r) {
  std::normal_distribution<double> n01;
  std::vector<double> c(r + 1);
  for (double& x : c) x = n01(rng);
  return c;
}

CheckReport run_1d_check(const char* name, int r, std::int64_t n_samples, std::uint64_t seed,
                         double (*ratio)(std::span<const double>)) {
  struct Acc {
    double max_ratio = 0.0;
    std::int64_t violations = 0;
  };
  const int workers = worker_count();
  std::vector<Acc> acc(workers);
  parallel_for(n_samples, workers, [&](std::int64_t b, std::int64_t e, int w) {
    for (std::int64_t i = b; i < e; ++i) {
      std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(i)));
      const double rt = ratio(random_legendre(rng, r));
      acc[w].max_ratio = std::max(acc[w].max_ratio, rt);
      if (rt > 1.0 + kRatioTolerance) ++acc[w].violations;
    }
  });
  CheckReport rep;
  rep.lemma = name;
  rep.samples = n_samples;
  rep.seed = seed;
  rep.params = {{"r", r}};
  for (const Acc& a : acc) {
    rep.max_ratio = std::max(rep.max_ratio, a.max_ratio);
    rep.violations += a.violations;
  }
  return rep;
}

}  // namespace

double markov_ratio(std::span<const double> c) {
  const int r = static_cast<int>(c.size()) - 1;
  if (r <= 0) return 0.0;
  const double sup_v = sup_abs([&](double x) { return eval(c, x); }).second;
  const double sup_dv = sup_abs([&](double x) { return eval_derivative(c, x); }).second;
  if (sup_v == 0.0) return sup_dv == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return sup_dv / (2.0 * r * r * sup_v);
}

double interval_lemma_ratio(std::span<const double> c) {
  const int r = static_cast<int>(c.size()) - 1;
  const auto [x0, sup_v] = sup_abs([&](double x) { return eval(c, x); });
  if (sup_v == 0.0) return 0.0;
  const double delta = 1.0 / (2.0 * (1.0 + 2.0 * r * r));
  const double lo = std::max(0.0, x0 - delta), hi = std::min(1.0, x0 + delta);
  if (hi - lo < delta * (1.0 - 1e-12)) return std::numeric_limits<double>::infinity();
  double min_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kIntervalGrid; ++i) {
    min_v = std::min(min_v, std::abs(eval(c, lo + (hi - lo) * i / kIntervalGrid)));
  }
  if (min_v == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * sup_v / min_v;
}

CheckReport check_markov(int r, std::int64_t n_samples, std::uint64_t seed) {
  return run_1d_check("markov", r, n_samples, seed, &markov_ratio);
}

CheckReport check_interval_lemma(int r, std::int64_t n_samples, std::uint64_t seed) {
  return run_1d_check("interval_lemma", r, n_samples, seed, &interval_lemma_ratio);
}

}  // namespace plapdg::verify
