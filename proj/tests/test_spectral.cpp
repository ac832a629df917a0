#include <doctest.h>

#include <cmath>

#include "sobscale/rng.hpp"
#include "sobscale/simd/kernels.hpp"
#include "sobscale/spectral.hpp"

using namespace sobscale;

namespace {

// Direct O(N^2n) evaluation of u_hat(xi_k) = h^n sum_x e^{-i x.xi_k} u(x).
std::vector<cplx> brute_dft(const GridFunction& u) {
  const Grid& g = u.grid;
  std::vector<cplx> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto ki = g.unflatten(k);
    cplx acc{};
    for (std::size_t x = 0; x < g.size(); ++x) {
      const auto xi = g.unflatten(x);
      double phase = 0.0;
      for (int a = 0; a < g.n; ++a) {
        phase += xi[static_cast<std::size_t>(a)] * g.spacing(a) * g.frequency(a, ki[static_cast<std::size_t>(a)]);
      }
      acc += std::polar(1.0, -phase) * u.values[x];
    }
    out[k] = acc * g.cell_volume();
  }
  return out;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid::make(1, 12, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(4, 8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(1, 8, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(3, 512, 1.0), std::invalid_argument);  // 2^27 points
  const Grid g = Grid::make(2, 8, {1.0, 2.0, 0.0});
  CHECK(g.size() == 64);
  CHECK(g.cell_volume() == doctest::Approx(2.0 / 64));
  CHECK(g.frequency_index(3) == 3);
  CHECK(g.frequency_index(4) == -4);
  CHECK(g.frequency(1, 7) == doctest::Approx(-2 * M_PI / 2.0));
  CHECK_FALSE(g.isotropic());
}

TEST_CASE("transform matches a brute-force DFT") {
  Rng rng(3);
  for (const Grid& g : {Grid::make(1, 16, 5.0), Grid::make(2, 8, {3.0, 7.0, 0.0}), Grid::make(3, 4, 2.0)}) {
    const GridFunction u = random_grid_function(g, rng);
    const Spectrum s = transform(u);
    CHECK(max_diff(s.coefficients, brute_dft(u)) < 1e-12);
    CHECK(max_diff(inverse_transform(s).values, u.values) < 1e-13);
  }
}

TEST_CASE("single Fourier modes have closed-form norms") {
  const Grid g = Grid::make(1, 64, 2 * M_PI);
  const Weight phi = Weight::power_log(1.5, 1.0);
  for (int k : {0, 3, -7, 20}) {
    GridFunction u(g);
    for (std::size_t i = 0; i < g.size(); ++i) u.values[i] = std::polar(1.0, k * u.coordinate(i, 0));
    const double jb = std::sqrt(1.0 + k * k);
    CHECK(hphi_norm(u, phi) == doctest::Approx(phi(jb) * std::sqrt(2 * M_PI)).epsilon(1e-13));
  }
}

TEST_CASE("Parseval: the t^0 norm is the L2 norm") {
  Rng rng(5);
  const Grid g = Grid::make(2, 16, {4.0, 9.0, 0.0});
  const GridFunction u = random_grid_function(g, rng);
  CHECK(hphi_norm(u, Weight::power(0.0)) == doctest::Approx(l2_norm(u)).epsilon(1e-13));
}

TEST_CASE("Gaussian H^1 norm matches the continuum value") {
  // u = exp(-x^2 / 2): ||u||_{H^1}^2 = (3/2) sqrt(pi)
  const Grid g = Grid::make(1, 512, 40.0);
  GridFunction u(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = u.coordinate(i, 0) - 20.0;
    u.values[i] = std::exp(-0.5 * x * x);
  }
  const double expected = std::sqrt(1.5 * std::sqrt(M_PI));
  CHECK(std::abs(hphi_norm(u, Weight::power(1.0)) - expected) < 1e-10);
}

TEST_CASE("duality pairing bound and maximizer") {
  Rng rng(9);
  const Grid g = Grid::make(1, 128, 10.0);
  for (const Weight& phi : {Weight::power(1.0), Weight::power_log(-0.5, 1.0), Weight::power(2.0)}) {
    const Weight dual = Weight::reciprocal(phi);
    for (int t = 0; t < 20; ++t) {
      const GridFunction u = random_grid_function(g, rng);
      const GridFunction v = random_grid_function(g, rng);
      CHECK(std::abs(duality_pair(u, v)) <= hphi_norm(u, phi) * hphi_norm(v, dual) * (1 + 1e-12));
    }
    const GridFunction u = random_grid_function(g, rng);
    Spectrum s = transform(u);
    const auto w = spectral_weights(g, phi);
    for (std::size_t i = 0; i < w.size(); ++i) s.coefficients[i] *= w[i] * w[i];
    const GridFunction v = inverse_transform(s);
    const double pair = std::abs(duality_pair(u, v));
    CHECK(pair == doctest::Approx(hphi_norm(u, phi) * hphi_norm(v, dual)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(duality_pair(GridFunction(g), GridFunction(Grid::make(1, 64, 10.0))), std::invalid_argument);
}

TEST_CASE("embedding integral: closed forms and the divergence threshold") {
  // int_1^inf t^{-2s} dt = 1 / (2s - 1) for s > 1/2
  CHECK(embedding_constant(Weight::power(1.0), 1, 0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(embedding_constant(Weight::power(1.5), 1, 0).value == doctest::Approx(0.5).epsilon(1e-12));
  // n = 2, k = 1, phi = t^3: int t^{-3} dt = 1/2
  CHECK(embedding_constant(Weight::power(3.0), 2, 1).value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(embedding_constant(Weight::power(0.5), 1, 0).diverged);
  CHECK(embedding_constant(Weight::power(0.4999), 1, 0).diverged);
  CHECK_FALSE(embedding_constant(Weight::power(0.5001), 1, 0).diverged);
  // a log factor on the threshold with exponent > 1/2 converges
  CHECK_FALSE(embedding_constant(Weight::power_log(0.5, 1.0), 1, 0).diverged);
}

TEST_CASE("sup bound holds and is attained by an impulse for constant weights") {
  Rng rng(21);
  const Grid g = Grid::make(1, 256, 2 * M_PI);
  for (const Weight& phi : {Weight::power(1.0), Weight::power_log(0.75, 1.0)}) {
    for (int t = 0; t < 50; ++t) {
      const auto b = sup_bound_check(random_grid_function(g, rng), phi);
      CHECK(b.lhs <= b.rhs);
    }
  }
  GridFunction delta(g);
  delta.values[17] = 1.0;
  const auto b = sup_bound_check(delta, Weight::power(0.0));
  CHECK(b.rhs == doctest::Approx(b.lhs).epsilon(1e-14));
}

TEST_CASE("band-limited trials describe the same function on every resolution") {
  const Grid coarse = Grid::make(1, 64, 8.0);
  const Grid fine = Grid::make(1, 128, 8.0);
  Rng a(4);
  Rng b(4);
  const auto uc = band_limited_trial(coarse, 10, a);
  const auto uf = band_limited_trial(fine, 10, b);
  for (std::size_t i = 0; i < coarse.size(); ++i) CHECK(std::abs(uc.values[i] - uf.values[2 * i]) < 1e-12);
  CHECK_THROWS_AS(band_limited_trial(coarse, 32, a), std::invalid_argument);
}

TEST_CASE("norms agree across simd paths") {
  Rng rng(2);
  const Grid g = Grid::make(2, 32, 3.0);
  const auto u = random_grid_function(g, rng);
  const Weight phi = Weight::power_log(1.0, -1.0);
  simd::force_isa(simd::Isa::scalar);
  const double a = hphi_norm(u, phi);
  simd::force_isa(simd::best_available_isa());
  const double b = hphi_norm(u, phi);
  CHECK(std::abs(a - b) <= 1e-13 * a);
}
