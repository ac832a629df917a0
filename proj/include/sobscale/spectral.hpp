#pragma once

// Periodic-grid model of H^phi: a torus of period L per axis sampled at N
// points per axis, with the continuum-matching Fourier normalization
//
//   u_hat(xi_k) = (L/N)^n sum_x e^{-i x.xi_k} u(x),   xi_k = 2 pi k / L,
//   u(x)        = L^{-n} sum_k e^{i x.xi_k} u_hat(xi_k).

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "sobscale/weights.hpp"

namespace sobscale {

class Rng;

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxGridPoints = std::size_t{1} << 24;

struct Grid {
  int n = 1;
  int N = 64;
  std::array<double, 3> L{2 * M_PI, 2 * M_PI, 2 * M_PI};

  /// Validates n in {1,2,3}, N a power of two, L > 0, and the memory budget.
  static Grid make(int n, int N, double L);
  static Grid make(int n, int N, std::array<double, 3> L);

  std::size_t size() const;
  double spacing(int axis) const { return L[static_cast<std::size_t>(axis)] / N; }
  double cell_volume() const;  // prod_a L_a / N
  double volume() const;       // prod_a L_a
  bool isotropic() const;

  /// Signed integer frequency of storage index i along an axis: [-N/2, N/2).
  int frequency_index(int i) const { return i < N / 2 ? i : i - N; }
  double frequency(int axis, int i) const;
  /// Per-axis storage indices of flat index `flat` (axis 0 slowest).
  std::array<int, 3> unflatten(std::size_t flat) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.n == b.n && a.N == b.N && a.L == b.L;
  }
};

struct GridFunction {
  Grid grid;
  std::vector<cplx> values;

  GridFunction() = default;
  GridFunction(Grid g, std::vector<cplx> v);
  explicit GridFunction(Grid g);  // zeros

  /// Coordinate of grid point `flat` along `axis`, in [0, L).
  double coordinate(std::size_t flat, int axis) const;
};

struct Spectrum {
  Grid grid;
  std::vector<cplx> coefficients;  // storage order matches GridFunction

  Spectrum() = default;
  Spectrum(Grid g, std::vector<cplx> c);
};

Spectrum transform(const GridFunction& u);
GridFunction inverse_transform(const Spectrum& s);

/// <xi> = (1 + |xi|^2)^{1/2}
double bracket(std::span<const double> xi);
/// <xi_k> for every storage index of the grid's spectrum.
std::vector<double> bracket_table(const Grid& grid);
/// phi(<xi_k>) for every storage index.
std::vector<double> spectral_weights(const Grid& grid, const Weight& phi);

/// (h^n sum_x |u|^2)^{1/2}
double l2_norm(const GridFunction& u);
/// (L^{-n} sum_k phi(<xi_k>)^2 |u_hat_k|^2)^{1/2}
double hphi_norm(const Spectrum& s, const Weight& phi);
double hphi_norm(const GridFunction& u, const Weight& phi);

/// h^n sum_x u(x) conj(v(x)); throws std::invalid_argument on grid mismatch.
cplx duality_pair(const GridFunction& u, const GridFunction& v);

struct EmbeddingIntegral {
  double value = 0.0;  // integral over [1, e^{log_upper}], +inf when diverged
  bool diverged = false;
  double tail_exponent = 0.0;  // power-law fit of the integrand over the last two decades
  double log_upper = 0.0;
};

/// int_1^T t^{2k+n-1} / phi(t)^2 dt with T = e^{log_upper}; the integral is
/// reported divergent when the tail exponent is >= -1.
EmbeddingIntegral embedding_constant(const Weight& phi, int n, int k, double log_upper = 1e4);

struct SupBound {
  double lhs = 0.0;       // max_x |u(x)|
  double rhs = 0.0;       // grid_constant * ||u||_phi
  double grid_constant = 0.0;
};

/// C_grid(phi) = (L^{-n} sum_k phi(<xi_k>)^{-2})^{1/2}; lhs <= rhs always.
SupBound sup_bound_check(const GridFunction& u, const Weight& phi);

/// Random trigonometric polynomial with complex Gaussian coefficients on
/// integer frequencies |k_a| <= kmax. Coefficients are drawn in an order
/// independent of N, so the same seed yields the same continuum function on
/// every resolution with kmax < N/2.
GridFunction band_limited_trial(const Grid& grid, int kmax, Rng& rng);

/// Unstructured random grid values (complex Gaussian at every point).
GridFunction random_grid_function(const Grid& grid, Rng& rng);

}  // namespace sobscale
