#include "sobscale/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "sobscale/rng.hpp"
#include "sobscale/simd/kernels.hpp"

namespace sobscale {

// ---------------------------------------------------------------------------
// Grid

Grid Grid::make(int n, int N, double L) { return make(n, N, {L, L, L}); }

Grid Grid::make(int n, int N, std::array<double, 3> L) {
  if (n < 1 || n > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (N < 2 || (N & (N - 1)) != 0) {
    throw std::invalid_argument("points per axis must be a power of two >= 2");
  }
  for (int a = 0; a < n; ++a) {
    if (!(L[static_cast<std::size_t>(a)] > 0.0) || !std::isfinite(L[static_cast<std::size_t>(a)])) {
      throw std::invalid_argument("grid period must be positive");
    }
  }
  for (int a = n; a < 3; ++a) L[static_cast<std::size_t>(a)] = L[0];
  Grid g;
  g.n = n;
  g.N = N;
  g.L = L;
  if (g.size() > kMaxGridPoints) throw std::invalid_argument("grid exceeds the memory budget");
  return g;
}

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < n; ++a) s *= static_cast<std::size_t>(N);
  return s;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= spacing(a);
  return v;
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= L[static_cast<std::size_t>(a)];
  return v;
}

bool Grid::isotropic() const {
  for (int a = 1; a < n; ++a) {
    if (L[static_cast<std::size_t>(a)] != L[0]) return false;
  }
  return true;
}

double Grid::frequency(int axis, int i) const {
  return 2.0 * M_PI * frequency_index(i) / L[static_cast<std::size_t>(axis)];
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = n - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(N));
    flat /= static_cast<std::size_t>(N);
  }
  return idx;
}

GridFunction::GridFunction(Grid g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("grid function size mismatch");
}

GridFunction::GridFunction(Grid g) : grid(g), values(g.size()) {}

double GridFunction::coordinate(std::size_t flat, int axis) const {
  return grid.unflatten(flat)[static_cast<std::size_t>(axis)] * grid.spacing(axis);
}

Spectrum::Spectrum(Grid g, std::vector<cplx> c) : grid(g), coefficients(std::move(c)) {
  if (coefficients.size() != grid.size()) throw std::invalid_argument("spectrum size mismatch");
}

// ---------------------------------------------------------------------------
// Transforms (FFTW, plans cached per shape and direction)

namespace {

fftw_plan cached_plan(const Grid& g, int sign) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mu);
  auto key = std::make_tuple(g.n, g.N, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::vector<cplx> scratch(g.size());
  int dims[3] = {g.N, g.N, g.N};
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan p = fftw_plan_dft(g.n, dims, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) throw std::runtime_error("fftw planning failed");
  plans.emplace(key, p);
  return p;
}

void run_fft(const Grid& g, std::vector<cplx>& data, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(cached_plan(g, sign), buf, buf);
}

}  // namespace

Spectrum transform(const GridFunction& u) {
  if (u.values.size() != u.grid.size()) throw std::invalid_argument("transform: size mismatch");
  std::vector<cplx> data = u.values;
  run_fft(u.grid, data, FFTW_FORWARD);
  const double scale = u.grid.cell_volume();
  for (auto& z : data) z *= scale;
  return Spectrum(u.grid, std::move(data));
}

GridFunction inverse_transform(const Spectrum& s) {
  if (s.coefficients.size() != s.grid.size()) {
    throw std::invalid_argument("inverse_transform: size mismatch");
  }
  std::vector<cplx> data = s.coefficients;
  run_fft(s.grid, data, FFTW_BACKWARD);
  const double scale = 1.0 / s.grid.volume();
  for (auto& z : data) z *= scale;
  return GridFunction(s.grid, std::move(data));
}

// ---------------------------------------------------------------------------
// Brackets and weighted norms

double bracket(std::span<const double> xi) {
  double s = 1.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

std::vector<double> bracket_table(const Grid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    const auto idx = grid.unflatten(f);
    std::array<double, 3> xi{};
    for (int a = 0; a < grid.n; ++a) {
      xi[static_cast<std::size_t>(a)] = grid.frequency(a, idx[static_cast<std::size_t>(a)]);
    }
    out[f] = bracket(std::span<const double>(xi.data(), static_cast<std::size_t>(grid.n)));
  }
  return out;
}

std::vector<double> spectral_weights(const Grid& grid, const Weight& phi) {
  auto out = bracket_table(grid);
  for (auto& b : out) b = phi(b);
  return out;
}

double l2_norm(const GridFunction& u) {
  const std::vector<double> ones(u.values.size(), 1.0);
  return std::sqrt(u.grid.cell_volume() * simd::weighted_energy(ones, u.values));
}

double hphi_norm(const Spectrum& s, const Weight& phi) {
  const auto w = spectral_weights(s.grid, phi);
  return std::sqrt(simd::weighted_energy(w, s.coefficients) / s.grid.volume());
}

double hphi_norm(const GridFunction& u, const Weight& phi) { return hphi_norm(transform(u), phi); }

cplx duality_pair(const GridFunction& u, const GridFunction& v) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("duality_pair: grid mismatch");
  std::vector<cplx> conj_v(v.values.size());
  std::transform(v.values.begin(), v.values.end(), conj_v.begin(),
                 [](cplx z) { return std::conj(z); });
  return simd::dot(u.values, conj_v) * u.grid.cell_volume();
}

// ---------------------------------------------------------------------------
// C_b embedding integral

EmbeddingIntegral embedding_constant(const Weight& phi, int n, int k, double log_upper) {
  if (k < 0) throw std::invalid_argument("embedding_constant: k must be >= 0");
  if (n < 1) throw std::invalid_argument("embedding_constant: n must be >= 1");
  const double two_decades = std::log(100.0);
  if (!(log_upper > two_decades)) {
    throw std::invalid_argument("embedding_constant: upper limit must exceed 100");
  }
  const double power = 2.0 * k + n;  // exponent of t in t^{2k+n-1} dt = t^{2k+n} dx, x = ln t

  EmbeddingIntegral out;
  out.log_upper = log_upper;
  // ln of the integrand in t at x = ln t
  auto log_integrand = [&](double x) { return (power - 1.0) * x - 2.0 * phi.log_at(x); };
  out.tail_exponent = (log_integrand(log_upper) - log_integrand(log_upper - two_decades)) /
                      two_decades;
  // Tolerance for rounding in the exact-threshold case (pure powers).
  out.diverged = out.tail_exponent > -1.0 - 1e-9;
  if (out.diverged) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }

  auto integrand = [&](double x) { return std::exp(power * x - 2.0 * phi.log_at(x)); };
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  double a = 0.0;
  double b = 1.0;
  while (a < log_upper) {
    b = std::min(b, log_upper);
    total += gauss_kronrod<double, 31>::integrate(integrand, a, b, 15, 1e-13);
    a = b;
    b *= 2.0;
  }
  out.value = total;
  return out;
}

SupBound sup_bound_check(const GridFunction& u, const Weight& phi) {
  const auto w = spectral_weights(u.grid, phi);
  double inv_sum = 0.0;
  for (double v : w) inv_sum += 1.0 / (v * v);
  SupBound out;
  out.grid_constant = std::sqrt(inv_sum / u.grid.volume());
  out.lhs = simd::max_abs(u.values);
  out.rhs = out.grid_constant * hphi_norm(u, phi);
  return out;
}

// ---------------------------------------------------------------------------
// Trial functions

GridFunction band_limited_trial(const Grid& grid, int kmax, Rng& rng) {
  if (kmax < 0 || 2 * kmax >= grid.N) {
    throw std::invalid_argument("band_limited_trial: kmax must satisfy 0 <= kmax < N/2");
  }
  std::vector<cplx> coef(grid.size());
  const int width = 2 * kmax + 1;
  int total = 1;
  for (int a = 0; a < grid.n; ++a) total *= width;
  for (int m = 0; m < total; ++m) {
    int rem = m;
    std::size_t flat = 0;
    for (int a = 0; a < grid.n; ++a) {
      int stride = 1;
      for (int b = a + 1; b < grid.n; ++b) stride *= width;
      const int k = rem / stride - kmax;
      rem %= stride;
      const int idx = k < 0 ? k + grid.N : k;
      flat = flat * static_cast<std::size_t>(grid.N) + static_cast<std::size_t>(idx);
    }
    coef[flat] = rng.complex_normal() * grid.volume();
  }
  return inverse_transform(Spectrum(grid, std::move(coef)));
}

GridFunction random_grid_function(const Grid& grid, Rng& rng) {
  GridFunction u(grid);
  for (auto& z : u.values) z = rng.complex_normal();
  return u;
}

}  // namespace sobscale
