#include "orec/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "orec/error.hpp"
#include "orec/parallel.hpp"

namespace orec {

namespace {

constexpr double kPi = std::numbers::pi;

struct Local {
  double psi_t;  // |sigma_target|^2
  double psi_c;  // |sigma_constraint|^2
};

Local local(const ProblemSpec& spec, std::span<const double> xi) {
  const double t = symbol_magnitude(spec.target, xi);
  const double c = symbol_magnitude(spec.constraint, xi);
  return {t * t, c * c};
}

double two_pi_d(const ProblemSpec& spec) {
  return std::pow(2.0 * kPi, static_cast<double>(spec.d));
}

bool is_origin(std::span<const double> xi) {
  return std::all_of(xi.begin(), xi.end(), [](double x) { return x == 0.0; });
}

std::complex<double> canonical(const FamilyFilter& f, double tpd, const Local& l) {
  const double n = tpd * f.lambda1;
  return n / (n + f.lambda2 * l.psi_c);
}

std::complex<double> eval_rule(const ADescriptor& a, const FamilyFilter& f, double tpd,
                               const Local& l, std::span<const double> xi);

std::complex<double> clipped(double c, const FamilyFilter& f, double tpd, const Local& l) {
  if (l.psi_c == 0.0) return 1.0;
  if (l.psi_t == 0.0) return c;
  const double center = canonical(f, tpd, l).real();
  const double p = l.psi_t / (f.lambda2 * l.psi_c);
  const double q = l.psi_t / (tpd * f.lambda1);
  const double s_can = l.psi_t / (tpd * f.lambda1 + f.lambda2 * l.psi_c);
  const double radius = std::sqrt(std::max(0.0, 1.0 - s_can) / (p + q));
  const double offset = c - center;
  if (std::abs(offset) <= radius) return c;
  return center + std::copysign(radius, offset);
}

std::complex<double> table(const UserTable& t, std::span<const double> xi) {
  // The origin admits only a = 1.
  if (is_origin(xi)) return 1.0;
  double norm = 0.0;
  for (double x : xi) norm += x * x;
  norm = std::sqrt(norm);
  std::size_t best = 0;
  double best_dot = -kInfinity;
  for (std::size_t k = 0; k < t.directions.size(); ++k) {
    double dot = 0.0;
    for (std::size_t j = 0; j < xi.size(); ++j) dot += t.directions[k][j] * xi[j];
    if (dot > best_dot) {
      best_dot = dot;
      best = k;
    }
  }
  const auto& lr = t.log_radii;
  const std::complex<double>* row = t.values.data() + best * lr.size();
  const double x = std::log(norm);
  if (x <= lr.front()) return row[0];
  if (x >= lr.back()) return row[lr.size() - 1];
  const auto it = std::upper_bound(lr.begin(), lr.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - lr.begin());
  const double w = (x - lr[hi - 1]) / (lr[hi] - lr[hi - 1]);
  return (1.0 - w) * row[hi - 1] + w * row[hi];
}

std::complex<double> eval_rule(const ADescriptor& a, const FamilyFilter& f, double tpd,
                               const Local& l, std::span<const double> xi) {
  return std::visit(
      [&](const auto& r) -> std::complex<double> {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, Canonical>) {
          return canonical(f, tpd, l);
        } else if constexpr (std::is_same_v<R, Constant>) {
          return r.value;
        } else if constexpr (std::is_same_v<R, Clipped>) {
          return clipped(r.c, f, tpd, l);
        } else if constexpr (std::is_same_v<R, Convex>) {
          return r.w * canonical(f, tpd, l) + (1.0 - r.w) * eval_rule(*r.other, f, tpd, l, xi);
        } else {
          return table(r, xi);
        }
      },
      a.rule);
}

void check_table(const UserTable& t, std::size_t d) {
  if (t.directions.empty() || t.log_radii.empty())
    throw std::invalid_argument("user table needs directions and radii");
  if (t.values.size() != t.directions.size() * t.log_radii.size())
    throw std::invalid_argument("user table has wrong number of values");
  for (const auto& u : t.directions)
    if (u.size() != d) throw std::invalid_argument("user table direction has wrong dimension");
  if (!std::is_sorted(t.log_radii.begin(), t.log_radii.end()) ||
      std::adjacent_find(t.log_radii.begin(), t.log_radii.end()) != t.log_radii.end())
    throw std::invalid_argument("user table radii must be strictly increasing");
}

void check_descriptor(const ADescriptor& a, std::size_t d) {
  if (const auto* t = std::get_if<UserTable>(&a.rule)) check_table(*t, d);
  if (const auto* c = std::get_if<Convex>(&a.rule)) {
    if (!c->other) throw std::invalid_argument("convex rule needs a second member");
    if (!(c->w >= 0.0 && c->w <= 1.0)) throw std::invalid_argument("convex weight outside [0,1]");
    check_descriptor(*c->other, d);
  }
}

}  // namespace

FilterMethod family_method(const ProblemSpec& spec, ADescriptor a) {
  const auto rc = optimal_error(spec);
  if (rc.regime == Regime::Threshold)
    throw RegimeError("p = 2", "family methods exist for p = 2 only");
  check_descriptor(a, spec.d);
  return {spec, FamilyFilter{std::move(a), *rc.lambda1, *rc.lambda2}};
}

FilterMethod build_method(const ProblemSpec& spec, const QuadratureOptions& options) {
  const auto rc = optimal_error(spec, options);
  if (rc.regime == Regime::Threshold) return {spec, ThresholdFilter{*rc.beta}};
  return {spec, FamilyFilter{ADescriptor{Canonical{}}, *rc.lambda1, *rc.lambda2}};
}

std::complex<double> a_value(const FilterMethod& m, std::span<const double> xi) {
  const Local l = local(m.spec, xi);
  if (const auto* th = std::get_if<ThresholdFilter>(&m.kind)) {
    // psi_c / psi_t -> 0 at the origin because nu > kappa.
    const double ratio = l.psi_c == 0.0 ? 0.0 : (l.psi_t == 0.0 ? kInfinity : l.psi_c / l.psi_t);
    return std::max(0.0, 1.0 - th->beta * ratio);
  }
  const auto& f = std::get<FamilyFilter>(m.kind);
  return eval_rule(f.a, f, two_pi_d(m.spec), l, xi);
}

std::complex<double> multiplier_value(const FilterMethod& m, std::span<const double> xi) {
  const std::complex<double> a = a_value(m, xi);
  if (a == 0.0) return 0.0;
  return a * symbol_value(m.spec.target, xi);
}

double s_value(const FilterMethod& m, std::span<const double> xi) {
  const auto* f = std::get_if<FamilyFilter>(&m.kind);
  if (!f) throw std::invalid_argument("S(xi) is defined for family methods only");
  const Local l = local(m.spec, xi);
  const double tpd = two_pi_d(m.spec);
  const std::complex<double> a = eval_rule(f->a, *f, tpd, l, xi);
  const double miss = std::norm(1.0 - a);
  double first = 0.0;
  if (miss != 0.0) {
    // near the origin psi_t / psi_c ~ rho^{2(kappa - nu)} -> infinity
    first = l.psi_c == 0.0 ? kInfinity : l.psi_t * miss / (f->lambda2 * l.psi_c);
  }
  return first + l.psi_t * std::norm(a) / (tpd * f->lambda1);
}

ProbeGrid make_probe_grid(const ProblemSpec& spec, std::size_t per_decade, std::size_t angular) {
  if (per_decade == 0 || angular < 2) throw std::invalid_argument("empty probe grid");
  const auto sp = stationary_point(spec);
  double center = 0.0;
  for (double x : sp.frequency) center += x * x;
  center = std::sqrt(center);
  ProbeGrid g;
  const long span = static_cast<long>(6 * per_decade);
  for (long k = -span; k <= span; ++k)
    g.radii.push_back(center * std::pow(10.0, static_cast<double>(k) / per_decade));
  const std::size_t d = spec.d;
  if (d == 1) {
    g.directions = {{-1.0}, {1.0}};
  } else {
    const std::size_t inner = std::max<std::size_t>(angular / 2, 1);
    std::size_t total = angular;
    for (std::size_t k = 0; k + 2 < d; ++k) total *= inner;
    std::vector<double> omega(d - 1);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      omega[d - 2] = (rest % angular) * 2.0 * kPi / angular;
      rest /= angular;
      for (std::size_t k = d - 2; k-- > 0;) {
        omega[k] = (rest % inner + 0.5) * kPi / inner;
        rest /= inner;
      }
      g.directions.push_back(spherical_point(omega, d));
    }
  }
  std::vector<double> u = sp.frequency;
  for (double& x : u) x /= center;
  g.directions.push_back(std::move(u));
  return g;
}

ValidationReport validate_family(const FilterMethod& m, const ProbeGrid& grid) {
  if (grid.radii.empty() || grid.directions.empty())
    throw std::invalid_argument("validation needs a non-empty probe grid");
  const std::size_t nr = grid.radii.size();
  const std::size_t n = nr * grid.directions.size();
  std::vector<double> s(n);
  detail::parallel_for(n, [&](std::size_t i) {
    const auto& u = grid.directions[i / nr];
    const double r = grid.radii[i % nr];
    std::vector<double> xi(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) xi[j] = r * u[j];
    s[i] = s_value(m, xi);
  });
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(s[i])) {
      best = i;
      break;
    }
    if (s[i] > s[best]) best = i;
  }
  ValidationReport rep;
  rep.sup_s = std::isnan(s[best]) ? kInfinity : s[best];
  const auto& u = grid.directions[best / nr];
  for (double x : u) rep.argmax_xi.push_back(grid.radii[best % nr] * x);
  rep.pass = rep.sup_s <= 1.0 + 1e-9;
  return rep;
}

double radial_margin(const ProblemSpec& spec, double rho) {
  const auto rc = optimal_error(spec);
  if (rc.regime != Regime::LaplaceL2)
    throw RegimeError("p = 2 with a Laplace-power target", "radial margin undefined");
  const double d = static_cast<double>(spec.d);
  const double nu = spec.nu(), mu = spec.mu(), eta = spec.kappa();
  const double theta = spec.target.laplace().theta;
  return two_pi_d(spec) * *rc.lambda1 +
         *rc.lambda2 * std::pow(rho, 2 * nu) * std::pow(d, 2 * nu * (1 / mu - 1 / theta)) -
         std::pow(rho, 2 * eta);
}

double log_margin(const ProblemSpec& spec, std::span<const double> t) {
  const auto rc = optimal_error(spec);
  if (rc.regime != Regime::DerivativeL2)
    throw RegimeError("p = 2 with a mixed-derivative target", "log margin undefined");
  if (t.size() != spec.d) throw std::invalid_argument("t has wrong dimension");
  const auto& alpha = spec.target.mixed().alpha;
  const double nu = spec.nu(), mu = spec.mu();
  double at = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j)
    if (alpha[j] != 0.0) at += alpha[j] * t[j];
  double sum = 0.0;
  for (double tj : t) sum += std::exp(mu * tj - mu / nu * at);
  return -1.0 + two_pi_d(spec) * *rc.lambda1 * std::exp(-2.0 * at) +
         *rc.lambda2 * std::pow(sum, 2.0 * nu / mu);
}

double threshold_support_radius(const FilterMethod& m) {
  const auto* th = std::get_if<ThresholdFilter>(&m.kind);
  if (!th) throw std::invalid_argument("support radius is defined for threshold methods");
  const auto& spec = m.spec;
  // psi_c/psi_t = rho^{2(nu-kappa)} g(u); support where beta * that < 1.
  double g_min = kInfinity;
  auto visit = [&](std::span<const double> u) {
    const Local l = local(spec, u);
    if (l.psi_t > 0.0) g_min = std::min(g_min, l.psi_c / l.psi_t);
  };
  if (spec.d == 1) {
    const double one = 1.0;
    visit(std::span(&one, 1));
  } else {
    const std::size_t angular = spec.d == 2 ? 4096 : (spec.d == 3 ? 256 : 32);
    const std::size_t inner = angular / 2;
    std::size_t total = angular;
    for (std::size_t k = 0; k + 2 < spec.d; ++k) total *= inner + 1;
    std::vector<double> omega(spec.d - 1);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      omega[spec.d - 2] = (rest % angular) * 2.0 * kPi / angular;
      rest /= angular;
      for (std::size_t k = spec.d - 2; k-- > 0;) {
        omega[k] = (rest % (inner + 1)) * kPi / inner;
        rest /= inner + 1;
      }
      visit(spherical_point(omega, spec.d));
    }
  }
  const double r = std::pow(th->beta * g_min, -0.5 / (spec.nu() - spec.kappa()));
  return 1.05 * r;
}

}  // namespace orec
