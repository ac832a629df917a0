#include <doctest.h>

#include <cmath>
#include <limits>

#include "sobscale/rng.hpp"
#include "sobscale/weights.hpp"

using namespace sobscale;

namespace {

std::vector<double> log_samples(double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::exp(std::log(hi) * i / (count - 1)));
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// sup over l in [1, 2], t >= 1 of |ln(phi(l t) / phi(t))| for t^s (1 + ln t)^r.
// The log factor contributes r ln((1 + x + y)/(1 + x)), which is largest at
// x = 0 and vanishes as x -> inf, so the sup sits at one of those two ends.
double analytic_log_c(double s, double r) {
  double best = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double y = std::log(2.0) * i / 20000.0;
    const double a = s * y;
    const double b = r * std::log1p(y);
    best = std::max({best, std::abs(a), std::abs(a + b)});
  }
  return best;
}

}  // namespace

TEST_CASE("parametric weights evaluate their closed forms") {
  for (double t : log_samples(1e6, 40)) {
    CHECK(rel(Weight::power(1.5)(t), std::pow(t, 1.5)) < 1e-14);
    const double L = 1.0 + std::log(t);
    CHECK(rel(Weight::power_log(-1.0, 2.0)(t), std::pow(t, -1.0) * L * L) < 1e-13);
    CHECK(rel(Weight::power_log_log(0.5, 1.0, -1.0)(t), std::sqrt(t) * L / (1.0 + std::log(L))) < 1e-13);
    CHECK(rel(Weight::shifted(Weight::power(2.0), 0.5)(t), std::pow(t, 1.5)) < 1e-13);
  }
  CHECK(Weight::power(3.0)(1.0) == 1.0);
  CHECK_THROWS_AS(Weight::power(1.0)(0.5), std::domain_error);
}

TEST_CASE("reciprocal times weight is one within 4 ulps") {
  const Weight w = Weight::power_log(1.3, -0.7);
  const Weight r = Weight::reciprocal(w);
  for (double t : log_samples(1e8, 64)) {
    CHECK(std::abs(r(t) * w(t) - 1.0) <= 4 * std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("product multiplies pointwise") {
  const Weight a = Weight::power(0.5);
  const Weight b = Weight::power_log(0.0, 1.0);
  const Weight p = Weight::product(a, b);
  for (double t : log_samples(1e6, 17)) CHECK(rel(p(t), a(t) * b(t)) < 1e-14);
}

TEST_CASE("tabulated weights interpolate on the log-log scale") {
  const Weight w = Weight::tabulated({{1.0, 1.0}, {10.0, 100.0}, {100.0, 1000.0}}, 0.5);
  CHECK(rel(w(std::sqrt(10.0)), 10.0) < 1e-13);       // slope 2 on [1, 10]
  CHECK(rel(w(std::sqrt(1000.0)), std::pow(10.0, 2.5)) < 1e-13);
  CHECK(rel(w(1e4), 1000.0 * 10.0) < 1e-13);           // tail t^0.5
  CHECK_THROWS_AS(Weight::tabulated({{2.0, 1.0}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Weight::tabulated({{1.0, 1.0}, {1.0, 2.0}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Weight::tabulated({{1.0, -1.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("log_at reaches beyond the double range of t") {
  const Weight w = Weight::power_log(2.0, 1.0);
  const double x = 1e5;  // t = e^{100000}
  CHECK(rel(w.log_at(x), 2.0 * x + std::log1p(x)) < 1e-14);
}

TEST_CASE("Matuszewska indices of t^s (1 + ln t)^r equal (s, s)") {
  for (double s : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    for (double r : {-1.0, 0.0, 1.0}) {
      CAPTURE(s);
      CAPTURE(r);
      const auto est = matuszewska_indices(Weight::power_log(s, r));
      CHECK(std::abs(est.sigma0 - s) <= 2e-3);
      CHECK(std::abs(est.sigma1 - s) <= 2e-3);
      CHECK(est.stable);
    }
  }
}

TEST_CASE("Matuszewska indices see different lower and upper orders") {
  // Slopes alternate between 0 and 2 on dyadic-in-log blocks.
  std::vector<Knot> knots{{1.0, 1.0}};
  double v = 1.0;
  double t = 1.0;
  for (int i = 0; i < 40; ++i) {
    t *= 10.0;
    v *= (i % 2 == 0) ? 100.0 : 1.0;
    knots.push_back({t, v});
  }
  const Weight w = Weight::tabulated(knots, 1.0);
  IndexSampling smp;
  smp.t_max = 1e30;
  smp.log_lambda_max = std::log(10.0) * 1.5;
  const auto est = matuszewska_indices(w, smp);
  CHECK(est.sigma0 < 0.8);
  CHECK(est.sigma1 > 1.2);
}

TEST_CASE("certify_ro matches the analytic supremum") {
  RoSampling smp;
  smp.t_max = 1e100;
  for (double s : {-2.0, 0.0, 1.0, 2.0}) {
    for (double r : {-1.0, 0.0, 1.0}) {
      CAPTURE(s);
      CAPTURE(r);
      const auto cert = certify_ro(Weight::power_log(s, r), smp);
      const double c = std::exp(analytic_log_c(s, r));
      CHECK(rel(cert.c, c) < 1e-2);
      CHECK(cert.positive);
      CHECK(cert.max_violation <= 1e-12);
    }
  }
  CHECK(rel(certify_ro(Weight::power(-1.5)).c, std::pow(2.0, 1.5)) < 1e-12);
}

TEST_CASE("certify_ro flags non-finite weights") {
  const Weight w = Weight::shifted(Weight::power(1.0), std::numeric_limits<double>::quiet_NaN());
  const auto cert = certify_ro(w);
  CHECK_FALSE(cert.positive);
  CHECK(std::isinf(cert.c));
}

TEST_CASE("property: the certificate sandwich holds at random points") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const double s = rng.uniform(-2.0, 2.0);
    const double r = rng.uniform(-1.0, 1.0);
    const Weight w = Weight::power_log(s, r);
    const auto cert = certify_ro(w);
    for (int k = 0; k < 50; ++k) {
      const double x = rng.uniform(0.0, std::log(1e6));
      const double y = rng.uniform(0.0, std::log(1e6) - x);
      const double lr = w.log_at(x + y) - w.log_at(x);
      CHECK(lr <= std::log(cert.c) + cert.s1 * y + 1e-9);
      CHECK(lr >= -std::log(cert.c) + cert.s0 * y - 1e-9);
    }
  }
}

TEST_CASE("phi -> psi -> phi round trip") {
  for (double s : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    for (double r : {-1.0, 0.0, 1.0}) {
      const Weight phi = Weight::power_log(s, r);
      const auto psi = psi_from_phi(phi, s - 1.0, s + 1.0);
      const Weight back = phi_from_psi(psi, s - 1.0, s + 1.0);
      for (double t : log_samples(1e6, 200)) CHECK(rel(back(t), phi(t)) <= 1e-12);
    }
  }
}

TEST_CASE("power weights map to power parameters") {
  // t^s with s = (1 - theta) s0 + theta s1  <->  tau^theta
  const auto psi = psi_from_phi(Weight::power(0.5), -1.0, 3.0);
  for (double tau : log_samples(1e6, 30)) CHECK(rel(psi(tau), std::pow(tau, 0.375)) < 1e-12);
  CHECK(psi(0.5) == 1.0);  // phi(1) below tau = 1
  const Weight w = phi_from_psi(InterpParameter::power_theta(0.25), 1.0, 5.0);
  CHECK(w.kind() == Weight::Kind::power);
  CHECK(rel(w(7.0), std::pow(7.0, 2.0)) < 1e-14);
  CHECK_THROWS_AS(psi_from_phi(Weight::power(1.0), 2.0, 2.0), std::invalid_argument);
}

  // exponent (1/3)(-1) + (2/3)(2) = 1
TEST_CASE("quadratic composition of powers") {
  const Weight w = compose_quad(Weight::power(-1.0), Weight::power(2.0), InterpParameter::power_theta(2.0 / 3.0));
  for (double t : log_samples(1e6, 30)) CHECK(rel(w(t), t) < 1e-12);
}

TEST_CASE("interpolation parameter forms") {
  const auto p = InterpParameter::power_theta(0.3);
  const auto d = InterpParameter::dual(p);
  const auto q = InterpParameter::quadratic(InterpParameter::power(0.2), InterpParameter::power(0.8),
                                            InterpParameter::power_theta(0.5));
  for (double tau : {1e-3, 0.5, 1.0, 7.0, 1e5}) {
    CHECK(rel(d(tau), std::pow(tau, 0.7)) < 1e-13);
    CHECK(rel(q(tau), std::pow(tau, 0.5)) < 1e-13);
  }
  CHECK_THROWS_AS(InterpParameter::power_theta(1.5), std::invalid_argument);
  CHECK_THROWS_AS(p(0.0), std::domain_error);
}

TEST_CASE("pseudoconcavity separates admissible exponents") {
  CHECK(check_pseudoconcave(InterpParameter::power_theta(0.0)).ok);
  CHECK(check_pseudoconcave(InterpParameter::power_theta(0.5)).ok);
  CHECK(check_pseudoconcave(InterpParameter::power_theta(1.0)).ok);
  const auto bad = check_pseudoconcave(InterpParameter::power(1.5));
  CHECK_FALSE(bad.ok);
  CHECK(bad.worst_excess > 0.0);
  CHECK_FALSE(check_pseudoconcave(InterpParameter::power(-0.5)).ok);
  // psi derived from an RO weight with s0 < sigma0 <= sigma1 < s1
  CHECK(check_pseudoconcave(psi_from_phi(Weight::power_log(1.0, 1.0), 0.0, 2.0)).ok);
}
