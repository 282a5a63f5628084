#include "orec/constants.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "orec/error.hpp"
#include "orec/parallel.hpp"

namespace orec {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double gamma_of(double nu, double kappa, double p, std::size_t d) {
  return (nu - kappa) / (nu + static_cast<double>(d) * (0.5 - 1.0 / p));
}

struct Node {
  double x;
  double w;
};

// Gauss-Legendre nodes on [0, 1].
const std::vector<Node>& gauss_legendre(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::vector<Node>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<Node> nodes(n);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = {0.5 * (1.0 - z), 0.5 * w};
    nodes[n - 1 - i] = {0.5 * (1.0 + z), 0.5 * w};
  }
  return cache.emplace(n, std::move(nodes)).first->second;
}

// Nodes for one angular factor: `panels` panels of width pi/2, each mapped by
// phi(s) = s^3 / (s^3 + (1-s)^3), which flattens algebraic endpoint behaviour.
std::vector<Node> angular_rule(std::size_t panels, std::size_t n) {
  const auto& gl = gauss_legendre(n);
  std::vector<Node> out;
  out.reserve(panels * n);
  const double width = kPi / 2.0;
  for (std::size_t p = 0; p < panels; ++p) {
    for (const auto& g : gl) {
      const double s = g.x, u = 1.0 - s;
      const double s3 = s * s * s, u3 = u * u * u, den = s3 + u3;
      const double phi = s3 / den;
      const double dphi = 3.0 * s * s * u * u / (den * den);
      out.push_back({width * (p + phi), g.w * width * dphi});
    }
  }
  return out;
}

double tensor_sum(std::size_t d, std::size_t n,
                  const std::function<double(std::span<const double>)>& f) {
  std::vector<std::vector<Node>> factors;
  for (std::size_t k = 0; k + 2 < d; ++k) factors.push_back(angular_rule(2, n));
  factors.push_back(angular_rule(4, n));
  std::size_t total = 1;
  for (const auto& fac : factors) total *= fac.size();
  return detail::deterministic_sum(total, [&](std::size_t flat) {
    std::vector<double> t(d);
    double weight = 1.0, sin_prod = 1.0;
    std::size_t rest = flat;
    // decode mixed radix, last factor fastest
    std::vector<std::size_t> idx(factors.size());
    for (std::size_t k = factors.size(); k-- > 0;) {
      idx[k] = rest % factors[k].size();
      rest /= factors[k].size();
    }
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const Node& node = factors[k][idx[k]];
      weight *= node.w;
      // Jacobian factor sin^{d-2-k}(omega_{k+1}) for the [0, pi] factors
      if (k + 1 < factors.size())
        weight *= std::pow(std::sin(node.x), static_cast<double>(d - 2 - k));
      t[k] = sin_prod * std::cos(node.x);
      sin_prod *= std::sin(node.x);
    }
    t[d - 1] = sin_prod;
    return weight * f(t);
  });
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Threshold: return "threshold";
    case Regime::LaplaceL2: return "laplace_l2";
    case Regime::DerivativeL2: return "derivative_l2";
  }
  return "unknown";
}

Regime classify(const ProblemSpec& spec) {
  if (spec.d == 0) throw RegimeError("d ≥ 1", "d = 0");
  if (spec.target.dimension() != spec.d || spec.constraint.dimension() != spec.d)
    throw RegimeError("symbol dimensions equal d", "d = " + std::to_string(spec.d));
  if (!spec.constraint.is_laplace_power())
    throw RegimeError("constraint is a Laplace power", "got a mixed derivative");
  if (!(spec.delta > 0.0) || !std::isfinite(spec.delta))
    throw RegimeError("δ > 0", "δ = " + num(spec.delta));
  const double nu = spec.nu(), mu = spec.mu(), kappa = spec.kappa();
  if (!(spec.p >= 2.0)) throw RegimeError("p = 2 or 2 < p ≤ ∞", "p = " + num(spec.p));
  if (spec.p > 2.0) {
    const double g = gamma_of(nu, kappa, spec.p, spec.d);
    if (!(g > 0.0 && g < 1.0))
      throw RegimeError("γ ∈ (0,1)", "γ = " + num(g) + ", requires ν > κ (ν = " + num(nu) +
                                         ", κ = " + num(kappa) + ")");
    return Regime::Threshold;
  }
  if (spec.target.is_laplace_power()) {
    const double theta = spec.target.laplace().theta, eta = kappa;
    if (!(eta > 0.0)) throw RegimeError("η > 0", "η = " + num(eta));
    if (!(nu > eta)) throw RegimeError("ν > η", "ν = " + num(nu) + ", η = " + num(eta));
    if (!(theta <= mu))
      throw RegimeError("0 < θ ≤ μ", "θ = " + num(theta) + ", μ = " + num(mu));
    return Regime::LaplaceL2;
  }
  if (!(kappa > 0.0)) throw RegimeError("|α| > 0", "|α| = 0");
  if (!(kappa < nu)) throw RegimeError("|α| < ν", "|α| = " + num(kappa) + ", ν = " + num(nu));
  if (!(2.0 * nu >= mu))
    throw RegimeError("2ν ≥ μ", "ν = " + num(nu) + ", μ = " + num(mu));
  return Regime::DerivativeL2;
}

Exponents gamma_qstar(const ProblemSpec& spec) {
  if (!(spec.p > 2.0)) throw RegimeError("2 < p ≤ ∞", "p = " + num(spec.p));
  const double g = gamma_of(spec.nu(), spec.kappa(), spec.p, spec.d);
  if (!(g > 0.0 && g < 1.0)) throw RegimeError("γ ∈ (0,1)", "γ = " + num(g));
  return {g, 1.0 / (g * (0.5 - 1.0 / spec.p))};
}

double beta_fn(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("beta function needs positive arguments");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double cp_constant(double nu, double kappa, double p, std::size_t d) {
  if (!(p > 2.0)) throw RegimeError("2 < p ≤ ∞", "p = " + num(p));
  const double g = gamma_of(nu, kappa, p, d);
  if (!(g > 0.0 && g < 1.0)) throw RegimeError("γ ∈ (0,1)", "γ = " + num(g));
  const double q = 1.0 / (g * (0.5 - 1.0 / p));
  const double log_b = std::log(beta_fn(q * g / p + 1.0, q * (1.0 - g) / 2.0));
  const double log_c = -(g / p) * std::log(g) - 0.5 * (1.0 - g) * std::log(1.0 - g) +
                       (log_b - std::log(2.0 * std::abs(nu - kappa))) / q;
  return std::exp(log_c);
}

QuadratureResult spherical_integral(std::size_t d,
                                    const std::function<double(std::span<const double>)>& f,
                                    const QuadratureOptions& options) {
  if (d == 0) throw std::invalid_argument("dimension must be >= 1");
  if (d == 1) {
    const double minus = -1.0, plus = 1.0;
    return {f(std::span(&minus, 1)) + f(std::span(&plus, 1)), 0, 0.0};
  }
  auto points = [d](std::size_t n) {
    double total = 4.0 * n;
    for (std::size_t k = 0; k + 2 < d; ++k) total *= 2.0 * n;
    return total;
  };
  std::size_t n = std::max<std::size_t>(options.initial_nodes, 2);
  double prev = tensor_sum(d, n, f);
  double change = kInfinity;
  while (points(2 * n) <= static_cast<double>(options.max_points)) {
    n *= 2;
    const double cur = tensor_sum(d, n, f);
    change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    prev = cur;
    if (change < options.tolerance || cur == 0.0) return {cur, n, change};
  }
  throw ConvergenceError("spherical quadrature did not reach relative change " +
                         num(options.tolerance) + " (last " + num(change) + " at " +
                         std::to_string(n) + " nodes per panel)");
}

double integral_i(const ProblemSpec& spec, const QuadratureOptions& options) {
  classify(spec);
  const auto [g, q] = gamma_qstar(spec);
  const double num_exp = q, den_exp = q * (1.0 - g);
  auto integrand = [&](std::span<const double> t) {
    const double wt = symbol_magnitude(spec.target, t);
    const double wc = symbol_magnitude(spec.constraint, t);
    if (wt == 0.0) return 0.0;
    return std::exp(num_exp * std::log(wt) - den_exp * std::log(wc));
  };
  return spherical_integral(spec.d, integrand, options).value;
}

RecoveryConstants optimal_error(const ProblemSpec& spec, const QuadratureOptions& options) {
  const Regime regime = classify(spec);
  const double d = static_cast<double>(spec.d);
  const double nu = spec.nu(), mu = spec.mu(), kappa = spec.kappa(), delta = spec.delta;
  RecoveryConstants rc{};
  rc.regime = regime;
  if (regime == Regime::Threshold) {
    const auto [g, q] = gamma_qstar(spec);
    const double cp = cp_constant(nu, kappa, spec.p, spec.d);
    const double ii = integral_i(spec, options);
    rc.gamma = g;
    rc.q_star = q;
    rc.cp = cp;
    rc.integral_i = ii;
    rc.inequality_constant = std::pow(2.0 * kPi, -d * g / 2.0) * cp * std::pow(ii, 1.0 / q);
    rc.error = rc.inequality_constant * std::pow(delta, g);
    rc.beta = (1.0 - g) * std::pow(2.0 * kPi, -d * g) * cp * cp *
              std::pow(delta * std::pow(ii, 0.5 - 1.0 / spec.p), 2.0 * g);
    return rc;
  }
  const double r = std::pow(2.0 * kPi, d) / (delta * delta);
  const double ratio = kappa / nu;
  double k2;  // E^2 = k2 * (delta^2/(2pi)^d)^{1 - kappa/nu}
  if (regime == Regime::LaplaceL2) {
    const double theta = spec.target.laplace().theta;
    k2 = std::pow(d, 2.0 * kappa * (1.0 / theta - 1.0 / mu));
  } else {
    double log_p = -2.0 * kappa / mu * std::log(kappa);
    for (double a : spec.target.mixed().alpha)
      if (a > 0.0) log_p += 2.0 * a / mu * std::log(a);
    k2 = std::exp(log_p);
  }
  rc.gamma = 1.0 - ratio;
  rc.error = std::sqrt(k2) * std::pow(delta / std::pow(2.0 * kPi, d / 2.0), 1.0 - ratio);
  rc.inequality_constant = std::sqrt(k2) * std::pow(2.0 * kPi, -d * (1.0 - ratio) / 2.0);
  rc.lambda1 = k2 / std::pow(2.0 * kPi, d) * (1.0 - ratio) * std::pow(r, ratio);
  rc.lambda2 = k2 * ratio * std::pow(r, ratio - 1.0);
  return rc;
}

StationaryPoint stationary_point(const ProblemSpec& spec) {
  const Regime regime = classify(spec);
  if (regime == Regime::Threshold)
    throw RegimeError("p = 2", "stationary point is defined for the p = 2 family only");
  const double d = static_cast<double>(spec.d);
  const double nu = spec.nu(), mu = spec.mu();
  const double scale = std::pow(std::pow(2.0 * kPi, d) / (spec.delta * spec.delta), 0.5 / nu);
  StationaryPoint sp;
  if (regime == Regime::LaplaceL2) {
    const double theta = spec.target.laplace().theta;
    sp.frequency.assign(spec.d, std::pow(d, -1.0 / mu) * scale);
    sp.radius = std::pow(d, 1.0 / theta - 1.0 / mu) * scale;
    return sp;
  }
  const double total = spec.kappa();
  for (double a : spec.target.mixed().alpha)
    sp.frequency.push_back(a > 0.0 ? std::pow(a / total, 1.0 / mu) * scale : 0.0);
  double s = 0.0;
  for (double x : sp.frequency) s += x * x;
  sp.radius = std::sqrt(s);
  return sp;
}

double bump_admissibility_bound(const ProblemSpec& spec) {
  const auto sp = stationary_point(spec);
  double bound = kInfinity;
  for (double x : sp.frequency)
    if (x > 0.0) bound = std::min(bound, x);
  return bound;
}

}  // namespace orec
