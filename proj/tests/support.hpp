#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "orec/problem.hpp"

namespace orec::testing {

inline ProblemSpec laplace_spec(std::size_t d, double p, double delta, double theta, double eta,
                                double mu, double nu) {
  return {d, p, delta, OperatorSymbol::laplace_power(d, theta, eta),
          OperatorSymbol::laplace_power(d, mu, nu)};
}

inline ProblemSpec derivative_spec(std::vector<double> alpha, double p, double delta, double mu,
                                   double nu) {
  const std::size_t d = alpha.size();
  return {d, p, delta, OperatorSymbol::mixed_derivative(std::move(alpha)),
          OperatorSymbol::laplace_power(d, mu, nu)};
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

/// Random valid p = 2 Laplace-target spec.
inline ProblemSpec random_laplace_spec(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double mu = 0.5 + 3.5 * u(rng), nu = 0.3 + 3.7 * u(rng);
  const double theta = mu * (0.1 + 0.9 * u(rng));
  const double eta = nu * (0.05 + 0.9 * u(rng));
  return laplace_spec(d, 2.0, log_uniform(rng, 1e-2, 1e2), theta, eta, mu, nu);
}

/// Random valid p = 2 mixed-derivative spec; some alpha_j may vanish.
inline ProblemSpec random_derivative_spec(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> alpha(d);
  for (auto& a : alpha) a = u(rng) < 0.25 ? 0.0 : 0.1 + u(rng);
  alpha[0] = std::max(alpha[0], 0.1);
  double sum = 0;
  for (double a : alpha) sum += a;
  const double nu = sum / (0.1 + 0.8 * u(rng));
  const double mu = 2 * nu * (0.1 + 0.9 * u(rng));
  return derivative_spec(alpha, 2.0, log_uniform(rng, 1e-2, 1e2), mu, nu);
}

}  // namespace orec::testing
