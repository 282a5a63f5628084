#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "orec/error.hpp"
#include "orec/filters.hpp"
#include "support.hpp"

using namespace orec;
using namespace orec::testing;
constexpr double pi = std::numbers::pi;

namespace {

ProblemSpec laplace_default() { return laplace_spec(2, 2.0, 1.0, 1.0, 1.0, 2.0, 2.0); }
ProblemSpec derivative_default() { return derivative_spec({0.5, 0.5}, 2.0, 1.0, 2.0, 2.0); }

double psi(const OperatorSymbol& op, std::vector<double> xi) {
  const double m = symbol_magnitude(op, xi);
  return m * m;
}

}  // namespace

TEST_CASE("threshold multiplier") {
  const auto spec = laplace_spec(1, kInfinity, 0.5, 2.0, 1.0, 2.0, 2.0);
  const auto m = build_method(spec);
  REQUIRE_FALSE(m.is_family());
  const double beta = std::get<ThresholdFilter>(m.kind).beta;
  // psi_c / psi_t = xi^2 in 1-D, so the boundary sits at xi = beta^{-1/2}
  const std::vector<double> edge{1.0 / std::sqrt(beta)};
  CHECK(std::abs(multiplier_value(m, edge)) < 1e-12);
  const std::vector<double> small{1e-6};
  CHECK(std::abs(multiplier_value(m, small)) == doctest::Approx(1e-6).epsilon(1e-9));
  const std::vector<double> outside{2.0 / std::sqrt(beta)};
  CHECK(multiplier_value(m, outside) == std::complex<double>(0.0));
  CHECK_THROWS_AS(s_value(m, edge), std::invalid_argument);
}

TEST_CASE("threshold support is bounded and the multiplier is continuous") {
  for (const auto& spec : {laplace_spec(2, kInfinity, 0.3, 1.0, 1.0, 2.0, 2.0),
                           derivative_spec({1.0, 0.0}, 4.0, 0.3, 2.0, 2.0),
                           laplace_spec(3, 6.0, 1.0, 2.0, 0.5, 1.5, 1.5)}) {
    const auto m = build_method(spec);
    const double r = threshold_support_radius(m);
    REQUIRE(std::isfinite(r));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    bool inside_nonzero = false;
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> u(spec.d);
      double n = 0;
      for (auto& x : u) {
        x = g(rng);
        n += x * x;
      }
      n = std::sqrt(n);
      std::vector<double> far(spec.d), a(spec.d), b(spec.d);
      const double t = std::uniform_real_distribution<double>(0.01, 1.0)(rng) * r;
      for (std::size_t j = 0; j < spec.d; ++j) {
        far[j] = 1.0001 * r * u[j] / n;
        a[j] = t * u[j] / n;
        b[j] = (t + 1e-9 * r) * u[j] / n;
      }
      CHECK(multiplier_value(m, far) == std::complex<double>(0.0));
      const double ma = std::abs(multiplier_value(m, a));
      inside_nonzero = inside_nonzero || ma > 0.0;
      CHECK(std::abs(ma - std::abs(multiplier_value(m, b))) < 1e-6);
    }
    CHECK(inside_nonzero);
  }
}

TEST_CASE("canonical family member") {
  for (const auto& spec : {laplace_default(), derivative_default()}) {
    const auto m = build_method(spec);
    REQUIRE(m.is_family());
    const std::vector<double> zero(spec.d, 0.0);
    CHECK(a_value(m, zero) == std::complex<double>(1.0));
    CHECK(s_value(m, zero) == 0.0);
    const auto sp = stationary_point(spec);
    CHECK(s_value(m, sp.frequency) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("a = 1 gives the raw symbol, a = 0 the zero method") {
  const auto spec = derivative_default();
  const auto one = family_method(spec, {Constant{1.0}});
  const auto zero = family_method(spec, {Constant{0.0}});
  const std::vector<double> xi{0.7, -1.3};
  const auto raw = symbol_value(spec.target, xi);
  CHECK(std::abs(multiplier_value(one, xi) - raw) < 1e-15);
  CHECK(multiplier_value(zero, xi) == std::complex<double>(0.0));
  // direct formula for a = 0
  const auto& f = std::get<FamilyFilter>(zero.kind);
  CHECK(s_value(zero, xi) == doctest::Approx(psi(spec.target, xi) / (f.lambda2 * psi(spec.constraint, xi))));
  CHECK(s_value(one, xi) ==
        doctest::Approx(psi(spec.target, xi) / (4 * pi * pi * f.lambda1)));
}

TEST_CASE("validation") {
  for (const auto& spec : {laplace_default(), derivative_default()}) {
    const auto grid = make_probe_grid(spec);
    const auto can = validate_family(build_method(spec), grid);
    CHECK(can.pass);
    CHECK(can.sup_s >= 1.0 - 1e-6);
    CHECK_FALSE(validate_family(family_method(spec, {Constant{0.0}}), grid).pass);
    CHECK_FALSE(validate_family(family_method(spec, {Constant{1.0}}), grid).pass);
    for (double c : {0.0, 0.3, 1.0, 1.7})
      CHECK(validate_family(family_method(spec, {Clipped{c}}), grid).pass);
    auto other = std::make_shared<const ADescriptor>(ADescriptor{Clipped{0.2}});
    for (double w : {0.0, 0.25, 0.9})
      CHECK(validate_family(family_method(spec, {Convex{w, other}}), grid).pass);
    auto bad = std::make_shared<const ADescriptor>(ADescriptor{Constant{0.0}});
    CHECK_FALSE(validate_family(family_method(spec, {Convex{0.5, bad}}), grid).pass);
    CHECK_THROWS_AS(validate_family(build_method(spec), ProbeGrid{}), std::invalid_argument);
  }
}

TEST_CASE("user table") {
  const auto spec = laplace_default();
  const auto can = build_method(spec);
  UserTable t;
  t.directions = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  for (int k = -600; k <= 600; ++k) t.log_radii.push_back(k * std::log(10.0) / 100.0);
  // canonical values sampled along each axis direction
  for (const auto& u : t.directions)
    for (double lr : t.log_radii) {
      const std::vector<double> xi{u[0] * std::exp(lr), u[1] * std::exp(lr)};
      t.values.push_back(a_value(can, xi));
    }
  const auto m = family_method(spec, {t});
  const std::vector<double> xi{0.0, 2.5};
  CHECK(std::abs(a_value(m, xi) - a_value(can, xi)) < 1e-4);
  CHECK(a_value(m, std::vector<double>{0.0, 0.0}) == std::complex<double>(1.0));
  CHECK(a_value(m, std::vector<double>{1e-9, 0.0}) == t.values[0]);
  CHECK(a_value(m, std::vector<double>{0.0, -1e9}) == t.values.back());
  // canonical a is radial for theta = mu
  const auto radial = laplace_spec(2, 2.0, 1.0, 2.0, 1.0, 2.0, 2.0);
  const auto rc = build_method(radial);
  UserTable r = t;
  r.values.clear();
  for (std::size_t i = 0; i < r.directions.size(); ++i)
    for (double lr : r.log_radii) r.values.push_back(a_value(rc, std::vector<double>{std::exp(lr), 0.0}));
  const auto rep = validate_family(family_method(radial, {r}), make_probe_grid(radial));
  CHECK(rep.pass);
  CHECK(rep.sup_s > 1.0 - 1e-6);

  UserTable broken = t;
  broken.values.pop_back();
  CHECK_THROWS_AS(family_method(spec, {broken}), std::invalid_argument);
  CHECK_THROWS_AS(family_method(laplace_spec(1, 4.0, 1.0, 2.0, 1.0, 2.0, 2.0), {Canonical{}}),
                  RegimeError);
}

TEST_CASE("property: canonical S <= 1 at random frequencies") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    const std::size_t d = 1 + i % 3;
    const auto spec = i % 2 ? random_laplace_spec(rng, d) : random_derivative_spec(rng, d);
    const auto m = build_method(spec);
    const double scale = stationary_point(spec).radius;
    for (int k = 0; k < 50; ++k) {
      std::vector<double> xi(d);
      for (auto& x : xi) x = scale * std::exp(2 * g(rng)) * g(rng);
      const double s = s_value(m, xi);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("radial margin f") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto spec = random_laplace_spec(rng, 1 + i % 3);
    const double r0 = stationary_point(spec).radius;
    const double scale = std::pow(r0, 2 * spec.kappa());
    for (int k = -300; k <= 300; ++k) {
      const double f = radial_margin(spec, r0 * std::pow(10.0, k / 50.0));
      CHECK(f >= -1e-12 * scale);
    }
    CHECK(std::abs(radial_margin(spec, r0)) <= 1e-11 * scale);
    const double h = 1e-6 * r0;
    const double df = (radial_margin(spec, r0 + h) - radial_margin(spec, r0 - h)) / (2 * h);
    CHECK(std::abs(df) * r0 <= 1e-7 * scale);
  }
  CHECK_THROWS_AS(radial_margin(derivative_default(), 1.0), RegimeError);
}

TEST_CASE("log margin H") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    auto spec = random_derivative_spec(rng, 1 + i % 3);
    auto alpha = spec.target.mixed().alpha;
    for (auto& a : alpha) a = std::max(a, 0.05);
    double sum = 0;
    for (double a : alpha) sum += a;
    spec = derivative_spec(alpha, 2.0, spec.delta, std::min(spec.mu(), 2 * spec.nu()),
                           std::max(spec.nu(), 1.2 * sum));
    const auto xi = stationary_point(spec).frequency;
    std::vector<double> t(xi.size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = std::log(xi[j]);
    CHECK(std::abs(log_margin(spec, t)) <= 1e-9);
    for (std::size_t j = 0; j < t.size(); ++j) {
      auto tp = t, tm = t;
      tp[j] += 1e-5;
      tm[j] -= 1e-5;
      CHECK(std::abs(log_margin(spec, tp) - log_margin(spec, tm)) / 2e-5 <= 1e-6);
    }
    for (int k = 0; k < 100; ++k) {
      auto s = t;
      for (auto& x : s) x += 2 * g(rng);
      CHECK(log_margin(spec, s) >= -1e-12);
    }
  }
  CHECK_THROWS_AS(log_margin(laplace_default(), std::vector<double>{0.0, 0.0}), RegimeError);
}
