#include <doctest.h>

#include <cmath>

#include "sobscale/errors.hpp"
#include "sobscale/interpolation.hpp"
#include "sobscale/rng.hpp"

using namespace sobscale;

namespace {

HilbertPair random_pair(int d, Rng& rng) {
  const MatrixC g0 = random_spd(d, 0.5, 2.0, rng);
  // G1 = G0^{1/2} S G0^{1/2} with S >= 1 keeps ||u||_0 <= ||u||_1.
  const MatrixC r = hermitian_sqrt(g0);
  MatrixC g1 = r * random_spd(d, 1.0, 50.0, rng) * r;
  g1 = 0.5 * (g1 + g1.adjoint());
  return HilbertPair(g0, g1);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("Hilbert pair validation") {
  MatrixC bad = MatrixC::Identity(3, 3);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(HilbertPair(bad, MatrixC::Identity(3, 3)), std::invalid_argument);
  MatrixC indefinite = MatrixC::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(HilbertPair(MatrixC::Identity(2, 2), indefinite), std::invalid_argument);
  CHECK_THROWS_AS(HilbertPair(MatrixC::Identity(2, 2), MatrixC::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("generating operator squares to G0^{-1} G1") {
  Rng rng(1);
  for (int d : {1, 4, 9}) {
    const auto pair = random_pair(d, rng);
    const auto op = generating_operator(pair);
    const MatrixC& j = op.matrix();
    const MatrixC target = pair.g0().inverse() * pair.g1();
    CHECK((j * j - target).norm() <= 1e-10 * target.norm());
    CHECK((j.adjoint() * pair.g0() * j - pair.g1()).norm() <= 1e-10 * pair.g1().norm());
    CHECK(op.eigenvalues().minCoeff() > 0.0);
    // G0-orthonormal eigenvectors
    const MatrixC gram = op.eigenvectors().adjoint() * pair.g0() * op.eigenvectors();
    CHECK((gram - MatrixC::Identity(d, d)).norm() < 1e-10);
  }
}

TEST_CASE("ill-conditioned pencils are rejected") {
  MatrixC g0 = MatrixC::Identity(2, 2);
  g0(1, 1) = 1e-9;
  MatrixC g1 = MatrixC::Identity(2, 2);
  g1(0, 0) = 1e-9;
  CHECK_THROWS_AS(generating_operator(HilbertPair(g0, g1)), ConditioningError);
}

TEST_CASE("diagonal pairs interpolate coordinatewise") {
  const int d = 5;
  MatrixC g1 = MatrixC::Zero(d, d);
  for (int i = 0; i < d; ++i) g1(i, i) = std::pow(1.0 + i, 2.0);
  const auto op = generating_operator(HilbertPair(MatrixC::Identity(d, d), g1));
  const auto psi = InterpParameter::tabulated({{1.0, 1.0}, {3.0, 2.0}, {5.0, 2.5}}, 0.0, 0.5);
  Rng rng(2);
  const VectorC u = random_vector(d, rng);
  double expected = 0.0;
  for (int i = 0; i < d; ++i) expected += std::pow(psi(1.0 + i), 2) * std::norm(u(i));
  CHECK(rel(interp_norm(op, psi, u), std::sqrt(expected)) < 1e-12);
}

TEST_CASE("commuting pairs: power parameters give G0^{1-theta} G1^theta") {
  Rng rng(3);
  const MatrixC q = Eigen::HouseholderQR<MatrixC>(random_matrix(6, 6, rng)).householderQ();
  Eigen::VectorXd a(6), b(6);
  for (int i = 0; i < 6; ++i) {
    a(i) = rng.uniform(0.5, 2.0);
    b(i) = a(i) * rng.uniform(1.0, 30.0);
  }
  const MatrixC g0 = q * a.asDiagonal() * q.adjoint();
  const MatrixC g1 = q * b.asDiagonal() * q.adjoint();
  const auto op = generating_operator(HilbertPair(g0, g1));
  const double theta = 0.3;
  Eigen::VectorXd c(6);
  for (int i = 0; i < 6; ++i) c(i) = std::pow(a(i), 1 - theta) * std::pow(b(i), theta);
  const MatrixC expected = q * c.asDiagonal() * q.adjoint();
  CHECK((op.interpolated_gram(InterpParameter::power_theta(theta)) - expected).norm() < 1e-10 * expected.norm());
}

TEST_CASE("endpoint recovery") {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto pair = random_pair(7, rng);
    const auto op = generating_operator(pair);
    const VectorC u = random_vector(7, rng);
    CHECK(rel(interp_norm(op, InterpParameter::power_theta(0.0), u), gram_norm(pair.g0(), u)) < 1e-12);
    CHECK(rel(interp_norm(op, InterpParameter::power_theta(1.0), u), gram_norm(pair.g1(), u)) < 1e-12);
  }
}

TEST_CASE("operator norm matches the largest singular value") {
  Rng rng(5);
  const MatrixC t = random_matrix(4, 6, rng);
  Eigen::SelfAdjointEigenSolver<MatrixC> es(t.adjoint() * t);
  const double expected = std::sqrt(es.eigenvalues().maxCoeff());
  CHECK(rel(operator_norm(t, MatrixC::Identity(6, 6), MatrixC::Identity(4, 4)), expected) < 1e-12);
  CHECK_THROWS_AS(operator_norm(t, MatrixC::Identity(4, 4), MatrixC::Identity(4, 4)), std::invalid_argument);
}

TEST_CASE("property: power-parameter interpolation inequality") {
  Rng rng(6);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Rng s = rng.stream(static_cast<std::uint64_t>(trial));
    const int dh = 5 + static_cast<int>(s.uniform() * 6);
    const int dk = 5 + static_cast<int>(s.uniform() * 6);
    const auto h = random_pair(dh, s);
    const auto k = random_pair(dk, s);
    const MatrixC t = random_matrix(dk, dh, s);
    const double theta = s.uniform();
    const auto b = interpolation_bound(h, k, t, InterpParameter::power_theta(theta));
    CHECK(b.power_parameter);
    CHECK(b.r_psi <= b.bound + 1e-10);
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("general parameters use the configured constant") {
  Rng rng(7);
  const auto h = random_pair(5, rng);
  const auto psi = psi_from_phi(Weight::power_log(1.0, 1.0), 0.0, 2.0);
  const auto b = interpolation_bound(h, h, MatrixC::Identity(5, 5), psi, 4.0);
  CHECK_FALSE(b.power_parameter);
  CHECK(b.bound == doctest::Approx(4.0 * std::max(b.r0, b.r1)));
  CHECK(b.r_psi == doctest::Approx(1.0).epsilon(1e-10));  // identity on the same pair
}

TEST_CASE("reiteration reproduces the composed parameter") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Rng s = rng.stream(static_cast<std::uint64_t>(trial));
    const auto op = generating_operator(random_pair(6, s));
    const auto lambda = InterpParameter::power_theta(s.uniform(0.0, 0.4));
    const auto eta = InterpParameter::power_theta(s.uniform(0.6, 1.0));
    const auto psi = InterpParameter::power_theta(s.uniform());
    CHECK(reiteration(op, lambda, eta, psi, 5, s).max_relative_gap <= 1e-10);
    const auto psi2 = psi_from_phi(Weight::power_log(0.5, 1.0), 0.0, 1.0);
    CHECK(reiteration(op, lambda, eta, psi2, 5, s).max_relative_gap <= 1e-10);
  }
}

TEST_CASE("direct sums interpolate blockwise") {
  Rng rng(9);
  const auto pair = random_pair(4, rng);
  const auto psi = psi_from_phi(Weight::power_log(0.5, -1.0), 0.0, 1.0);
  for (int copies : {1, 3, 16}) {
    CHECK(direct_sum_interp(pair, copies, psi, 10, rng).max_relative_gap <= 1e-10);
  }
  CHECK_THROWS_AS((DirectSumPair{pair, 0}.block_pair()), std::invalid_argument);
}

TEST_CASE("dual of an interpolation space is the dual-pair interpolation") {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pair = random_pair(6, rng);
    const auto op = generating_operator(pair);
    const auto dual_op = generating_operator(dual_pair(pair));
    const auto psi = psi_from_phi(Weight::power_log(0.5, 1.0), 0.0, 1.0);
    const VectorC f = random_vector(6, rng);
    CHECK(rel(dual_norm(op, psi, f), interp_norm(dual_op, InterpParameter::dual(psi), f)) < 1e-9);
    // sup over u is attained at u = M_psi^{-1} f
    const MatrixC m = op.interpolated_gram(psi);
    const VectorC u = m.llt().solve(f);
    CHECK(rel(std::abs(f.dot(u)) / interp_norm(op, psi, u), dual_norm(op, psi, f)) < 1e-10);
  }
}

TEST_CASE("property: embedding chain constants bound the norms") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pair = random_pair(6, rng);
    const auto op = generating_operator(pair);
    const auto psi = InterpParameter::power_theta(rng.uniform());
    const auto chain = embedding_chain(op, psi);
    const VectorC u = random_vector(6, rng);
    const double n0 = gram_norm(pair.g0(), u);
    const double np = interp_norm(op, psi, u);
    const double n1 = gram_norm(pair.g1(), u);
    CHECK(n0 <= chain.h0_by_psi * np * (1 + 1e-12));
    CHECK(np <= chain.psi_by_h1 * n1 * (1 + 1e-12));
  }
}
