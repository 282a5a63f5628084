#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "orec/adversary.hpp"
#include "orec/error.hpp"
#include "orec/parallel.hpp"

namespace orec {

namespace {

constexpr double kPi = std::numbers::pi;

// dual feasibility: smallest kappa with A_i^2/rho + B_i^2/kappa <= 1 for all i
double kappa_for(double rho, std::span<const double> a, std::span<const double> b) {
  double k = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] == 0.0) continue;
    const double a2 = a[i] * a[i], b2 = b[i] * b[i];
    if (a2 == 0.0) {
      k = std::max(k, b2);
      continue;
    }
    if (rho <= a2) return kInfinity;
    k = std::max(k, b2 * rho / (rho - a2));
  }
  return k;
}

struct Candidate {
  double value = -1.0;
  std::vector<Allocation> allocation;
};

double objective(std::span<const double> a, std::span<const double> b,
                 const std::vector<Allocation>& alloc) {
  double v = 0.0;
  for (const auto& x : alloc) {
    const double u = a[x.index] * x.s + b[x.index] * x.tau;
    v += u * u;
  }
  return v;
}

Candidate single(std::span<const double> a, std::span<const double> b, double delta, std::size_t i) {
  const double u = a[i] + b[i] * delta;
  return {u * u, {{i, 1.0, delta}}};
}

// Exact worst case supported on {i, j}: one budget concentrated in a single
// cell, or both KKT constraints active.
Candidate pair(std::span<const double> a, std::span<const double> b, double delta, std::size_t i,
               std::size_t j) {
  Candidate best = single(a, b, delta, i);
  Candidate other = single(a, b, delta, j);
  if (other.value > best.value) best = other;
  if (delta == 0.0) return best;
  const double a1 = a[i] * a[i], a2 = a[j] * a[j], b1 = b[i] * b[i], b2 = b[j] * b[j];
  const double det = a1 * b2 - a2 * b1;
  if (det == 0.0) return best;
  const double u = (b2 - b1) / det, v = (a1 - a2) / det;  // 1/rho, 1/kappa
  if (!(u > 0.0 && v > 0.0)) return best;
  const double rho = 1.0 / u, kappa = 1.0 / v;
  const double x = (rho * rho * b2 - a2 * delta * delta * kappa * kappa) / det;
  const double y = (a1 * delta * delta * kappa * kappa - b1 * rho * rho) / det;
  if (!(x >= 0.0 && y >= 0.0)) return best;
  const double ci = std::sqrt(x), cj = std::sqrt(y);
  double si = ci * a[i] / rho, sj = cj * a[j] / rho;
  double ti = ci * b[i] / kappa, tj = cj * b[j] / kappa;
  const double sn = std::hypot(si, sj), tn = std::hypot(ti, tj);
  if (!(sn > 0.0 && tn > 0.0)) return best;
  si /= sn, sj /= sn;
  ti *= delta / tn, tj *= delta / tn;
  Candidate both{0.0, {{i, si, ti}, {j, sj, tj}}};
  both.value = objective(a, b, both.allocation);
  return both.value > best.value ? both : best;
}

void keep_better(Candidate& best, Candidate c) {
  if (c.value > best.value) best = std::move(c);
}

}  // namespace

Gains worst_case_gains(const FilterMethod& m, const Grid& grid) {
  if (grid.dimension() != m.spec.d) throw std::invalid_argument("grid dimension does not match");
  const double norm = std::pow(2.0 * kPi, static_cast<double>(m.spec.d) / 2);
  Gains g{std::vector<double>(grid.size()), std::vector<double>(grid.size())};
  detail::parallel_for(grid.size(), [&](std::size_t i) {
    const auto xi = grid.point(i);
    const std::complex<double> a = a_value(m, xi);
    const double t = symbol_magnitude(m.spec.target, xi);
    const double c = symbol_magnitude(m.spec.constraint, xi);
    const double miss = std::abs(1.0 - a) * t;
    g.a[i] = miss == 0.0 ? 0.0 : (c == 0.0 ? kInfinity : miss / c);
    g.b[i] = std::abs(a) * t / norm;
  });
  return g;
}

DualResult worst_case_dual(std::span<const double> a, std::span<const double> b, double delta) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("gain vectors must match and be non-empty");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  double m = 0.0, bmax = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
      return {kInfinity, kInfinity, kInfinity, i};
    m = std::max(m, a[i] * a[i]);
    bmax = std::max(bmax, b[i] * b[i]);
  }
  const double d2 = delta * delta;
  const double top = 2.0 * m + 2.0 * bmax * d2;  // value at the feasible point (2m, 2 bmax)
  if (top == 0.0) return {0.0, 0.0, 0.0, std::nullopt};
  auto value = [&](double rho) {
    const double k = kappa_for(rho, a, b);
    return d2 == 0.0 ? (std::isinf(k) ? kInfinity : rho) : rho + d2 * k;
  };
  // convex in rho on (m, top]; golden section
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = m, hi = top;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  double best_rho = 2.0 * m, best = value(best_rho);
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    if (f1 <= f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = value(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = value(x2);
    }
    if (f1 < best) best = f1, best_rho = x1;
    if (f2 < best) best = f2, best_rho = x2;
  }
  return {std::sqrt(best), best_rho, kappa_for(best_rho, a, b), std::nullopt};
}

DualResult worst_case_dual(const FilterMethod& m, const Grid& grid) {
  if (m.spec.p != 2.0) throw RegimeError("p = 2", "the L2 worst-case oracle needs p = 2");
  const Gains g = worst_case_gains(m, grid);
  return worst_case_dual(g.a, g.b, m.spec.delta);
}

PrimalResult worst_case_primal(std::span<const double> a, std::span<const double> b, double delta,
                               std::uint64_t seed) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("gain vectors must match and be non-empty");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) return {kInfinity, {{i, 1.0, 0.0}}};

  constexpr std::size_t kPairCap = 1'000'000;
  Candidate best;
  if (n * (n - 1) / 2 <= kPairCap) {
    constexpr std::size_t kRows = 16;
    std::vector<Candidate> partial((n + kRows - 1) / kRows);
    detail::for_chunks(n, kRows, [&](std::size_t c, std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        keep_better(partial[c], single(a, b, delta, i));
        for (std::size_t j = i + 1; j < n; ++j) keep_better(partial[c], pair(a, b, delta, i, j));
      }
    });
    for (auto& c : partial) keep_better(best, std::move(c));
  } else {
    for (std::size_t i = 0; i < n; ++i) keep_better(best, single(a, b, delta, i));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int k = 0; k < 100'000; ++k) {
      const std::size_t i = pick(rng), j = pick(rng);
      if (i != j) keep_better(best, pair(a, b, delta, i, j));
    }
    // cells where the dual constraint is (nearly) tight carry the worst case
    const DualResult dual = worst_case_dual(a, b, delta);
    std::vector<std::pair<double, std::size_t>> slack;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = (dual.rho > 0 ? a[i] * a[i] / dual.rho : 0.0) +
                       (dual.kappa > 0 ? b[i] * b[i] / dual.kappa : 0.0);
      slack.push_back({std::abs(1.0 - s), i});
    }
    const std::size_t top = std::min<std::size_t>(64, n);
    std::partial_sort(slack.begin(), slack.begin() + top, slack.end());
    for (std::size_t x = 0; x < top; ++x)
      for (std::size_t y = x + 1; y < top; ++y)
        keep_better(best, pair(a, b, delta, slack[x].second, slack[y].second));
  }
  return {std::sqrt(best.value), std::move(best.allocation)};
}

PrimalResult worst_case_primal(const FilterMethod& m, const Grid& grid, std::uint64_t seed) {
  if (m.spec.p != 2.0) throw RegimeError("p = 2", "the L2 worst-case oracle needs p = 2");
  const Gains g = worst_case_gains(m, grid);
  return worst_case_primal(g.a, g.b, m.spec.delta, seed);
}

SupNoiseResult worst_case_sup_noise(const FilterMethod& m, const Grid& grid) {
  if (!std::isinf(m.spec.p)) throw RegimeError("p = ∞", "the pointwise-noise oracle needs p = ∞");
  Gains g = worst_case_gains(m, grid);
  const double scale = m.spec.delta * std::sqrt(grid.weight());
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g.a[i])) return {kInfinity, grid.point(i)};
    g.b[i] *= scale;
  }
  // maximize sum (A s + b)^2 over |s| <= 1: s^T D s + 2 h^T s + c
  double dmax = 0.0, hnorm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dmax = std::max(dmax, g.a[i] * g.a[i]);
    hnorm2 += std::pow(g.a[i] * g.b[i], 2);
  }
  std::vector<double> s(n, 0.0);
  auto secular = [&](double l) {
    return detail::deterministic_sum(n, [&](std::size_t i) {
      const double h = g.a[i] * g.b[i];
      return h == 0.0 ? 0.0 : h * h / ((l - g.a[i] * g.a[i]) * (l - g.a[i] * g.a[i]));
    });
  };
  std::size_t top = n;
  bool top_has_gradient = false;
  for (std::size_t i = 0; i < n; ++i)
    if (g.a[i] * g.a[i] == dmax) {
      if (top == n) top = i;
      if (g.a[i] * g.b[i] != 0.0) top_has_gradient = true;
    }
  double lambda;
  if (hnorm2 == 0.0) {
    lambda = dmax;
  } else if (!top_has_gradient && secular(dmax) <= 1.0) {
    lambda = dmax;  // hard case
  } else {
    double lo = dmax, hi = dmax + std::sqrt(hnorm2);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (secular(mid) > 1.0 ? lo : hi) = mid;
    }
    lambda = hi;
  }
  double used = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = g.a[i] * g.b[i], gap = lambda - g.a[i] * g.a[i];
    if (h != 0.0 && gap > 0.0) s[i] = h / gap;
    used += s[i] * s[i];
  }
  if (used < 1.0 && lambda == dmax) s[top] = std::sqrt(s[top] * s[top] + 1.0 - used);
  const double norm = std::sqrt(detail::deterministic_sum(n, [&](std::size_t i) { return s[i] * s[i]; }));
  if (norm > 1.0)
    for (double& x : s) x /= norm;
  const double value = detail::deterministic_sum(n, [&](std::size_t i) {
    const double u = g.a[i] * s[i] + g.b[i];
    return u * u;
  });
  return {std::sqrt(value), std::nullopt};
}

}  // namespace orec
