#include "orec/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "orec/constants.hpp"
#include "orec/error.hpp"
#include "orec/parallel.hpp"

namespace orec {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

double two_pi_d(std::size_t d) { return std::pow(2.0 * kPi, static_cast<double>(d)); }

double ball_volume(std::size_t d, double r) {
  const double dd = static_cast<double>(d);
  return std::pow(kPi, dd / 2) * std::pow(r, dd) / std::tgamma(dd / 2 + 1);
}

// Calls f(flat, xi) for every grid point inside the closed ball.
template <typename F>
void for_ball_cells(const Grid& grid, std::span<const double> center, double radius, F&& f) {
  const auto& axes = grid.axes();
  const std::size_t d = axes.size();
  std::vector<std::size_t> lo(d), hi(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double c = 0.5 * static_cast<double>(axes[a].n - 1);
    const double kl = std::ceil((center[a] - radius) / axes[a].step + c);
    const double kh = std::floor((center[a] + radius) / axes[a].step + c);
    if (kl < 0.0 || kh > static_cast<double>(axes[a].n - 1))
      throw std::invalid_argument("bump does not fit in the grid");
    lo[a] = static_cast<std::size_t>(kl);
    hi[a] = static_cast<std::size_t>(kh);
    if (hi[a] < lo[a]) return;
  }
  std::vector<std::size_t> k = lo;
  std::vector<double> xi(d);
  while (true) {
    double r2 = 0.0;
    std::size_t flat = 0;
    for (std::size_t a = 0; a < d; ++a) {
      xi[a] = axes[a].coordinate(k[a]);
      r2 += (xi[a] - center[a]) * (xi[a] - center[a]);
      flat = flat * axes[a].n + k[a];
    }
    if (r2 <= radius * radius) f(flat, std::span<const double>(xi));
    std::size_t a = d;
    while (a-- > 0) {
      if (++k[a] <= hi[a]) break;
      k[a] = lo[a];
    }
    if (a == static_cast<std::size_t>(-1)) return;
  }
}

void check_resolved(const Grid& grid, double eps) {
  for (const Axis& ax : grid.axes())
    if (2.0 * eps / ax.step < 8.0)
      throw std::invalid_argument("grid does not resolve the bump (need 8 cells across)");
}

}  // namespace

BumpSpec bump_spec(const ProblemSpec& spec, double epsilon) {
  const Regime regime = classify(spec);
  if (regime == Regime::Threshold)
    throw RegimeError("p = 2", "bumps are defined for the p = 2 regimes");
  const double bound = bump_admissibility_bound(spec);
  if (!(epsilon > 0.0) || epsilon > bound)
    throw std::invalid_argument("bump radius outside (0, " + std::to_string(bound) + "]");
  const auto sp = stationary_point(spec);
  BumpSpec b{epsilon, sp.frequency, 0.0, 1.0, regime};
  if (regime == Regime::LaplaceL2) {
    for (double& x : b.center) x -= epsilon;
  } else {
    const auto& alpha = spec.target.mixed().alpha;
    for (std::size_t j = 0; j < alpha.size(); ++j)
      if (alpha[j] != 0.0) b.center[j] -= epsilon;
    // inactive coordinates move the constraint symbol off its maximum on the ball
    const double mu = spec.mu(), nu = spec.nu();
    const double rs = std::pow(spec.delta * spec.delta / two_pi_d(spec.d), mu / (2 * nu));
    b.factor = std::pow(1.0 + static_cast<double>(spec.d) * std::pow(epsilon, mu) * rs, -nu / mu);
  }
  b.amplitude = spec.delta * b.factor / std::sqrt(ball_volume(spec.d, epsilon));
  return b;
}

SpectralField bump_field(const ProblemSpec& spec, double epsilon, const Grid& grid) {
  if (grid.dimension() != spec.d) throw std::invalid_argument("grid dimension does not match");
  const BumpSpec b = bump_spec(spec, epsilon);
  check_resolved(grid, epsilon);
  std::vector<std::size_t> cells;
  for_ball_cells(grid, b.center, epsilon, [&](std::size_t i, auto) { cells.push_back(i); });
  if (cells.empty()) throw std::invalid_argument("bump contains no grid points");
  SpectralField f{grid, std::vector<cplx>(grid.size())};
  const double amp =
      spec.delta * b.factor / std::sqrt(grid.weight() * static_cast<double>(cells.size()));
  for (std::size_t i : cells) f.values[i] = amp;
  return f;
}

std::vector<double> default_eps_sequence(const ProblemSpec& spec, int halvings) {
  if (halvings < 0) throw std::invalid_argument("negative halving count");
  const double first =
      classify(spec) == Regime::Threshold ? 0.25 : 0.25 * bump_admissibility_bound(spec);
  std::vector<double> eps;
  for (int k = 0; k <= halvings; ++k) eps.push_back(std::ldexp(first, -k));
  return eps;
}

Grid sweep_grid(const ProblemSpec& spec, std::span<const double> eps, double cells_across) {
  if (classify(spec) == Regime::Threshold) return default_grid(spec);
  if (eps.empty()) throw std::invalid_argument("empty eps list");
  if (!(cells_across >= 8.0)) throw std::invalid_argument("bumps need at least 8 cells across");
  const double step = 2.0 * *std::min_element(eps.begin(), eps.end()) / cells_across;
  double reach = 0.0;
  for (double x : stationary_point(spec).frequency) reach = std::max(reach, std::abs(x));
  reach = 1.25 * reach + *std::max_element(eps.begin(), eps.end());
  const auto half = static_cast<std::size_t>(std::ceil(reach / step));
  return Grid(std::vector<Axis>(spec.d, Axis{2 * half, step}));
}

std::vector<SweepEntry> lower_bound_sweep(const ProblemSpec& spec, std::span<const double> eps,
                                          const Grid& grid) {
  if (grid.dimension() != spec.d) throw std::invalid_argument("grid dimension does not match");
  const auto rc = optimal_error(spec);
  std::vector<SweepEntry> out;
  if (rc.regime == Regime::Threshold) {
    const double beta = *rc.beta;
    for (double e : eps) {
      const auto f = sample_field(grid, [&](std::span<const double> xi) {
        const double t = symbol_magnitude(spec.target, xi), c = symbol_magnitude(spec.constraint, xi);
        return t * t > beta * (1 + e) * c * c ? cplx(spec.delta) : cplx(0.0);
      });
      out.push_back({e, sharp_inequality_check(spec, f).ratio});
    }
    return out;
  }
  for (double e : eps) {
    const BumpSpec b = bump_spec(spec, e);
    check_resolved(grid, e);
    std::vector<double> psi;
    for_ball_cells(grid, b.center, e, [&](std::size_t, std::span<const double> xi) {
      const double t = symbol_magnitude(spec.target, xi);
      psi.push_back(t * t);
    });
    if (psi.empty()) throw std::invalid_argument("bump contains no grid points");
    const double mean = detail::deterministic_sum(psi.size(), [&](std::size_t i) { return psi[i]; }) /
                        static_cast<double>(psi.size());
    // ||Lambda x||^2 = (2pi)^-d delta^2 factor^2 * mean psi_t over the ball
    const double norm = spec.delta * b.factor * std::sqrt(mean / two_pi_d(spec.d));
    out.push_back({e, norm / rc.error});
  }
  return out;
}

InequalityResult sharp_inequality_check(const ProblemSpec& spec, const SpectralField& field) {
  if (field.grid.dimension() != spec.d) throw std::invalid_argument("field dimension does not match");
  const auto rc = optimal_error(spec);
  InequalityResult r{};
  r.lhs = weighted_l2(field, &spec.target);
  const double data = lp_norm(field, spec.p);
  const double constraint = weighted_l2(field, &spec.constraint);
  r.rhs = rc.inequality_constant * std::pow(data, rc.gamma) * std::pow(constraint, 1.0 - rc.gamma);
  if (r.lhs == 0.0)
    r.ratio = 0.0;
  else
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : kInfinity;
  return r;
}

}  // namespace orec
