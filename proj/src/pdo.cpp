#include "sobscale/pdo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sobscale/rng.hpp"
#include "sobscale/simd/kernels.hpp"

namespace sobscale {

namespace {

std::size_t dense_size(const Grid& g) { return g.size(); }

Point frequency_at(const Grid& g, std::size_t flat) {
  const auto idx = g.unflatten(flat);
  Point xi{0, 0, 0};
  for (int a = 0; a < g.n; ++a) xi[static_cast<std::size_t>(a)] = g.frequency(a, idx[static_cast<std::size_t>(a)]);
  return xi;
}

Point position_at(const Grid& g, std::size_t flat) {
  const auto idx = g.unflatten(flat);
  Point x{0, 0, 0};
  for (int a = 0; a < g.n; ++a) x[static_cast<std::size_t>(a)] = idx[static_cast<std::size_t>(a)] * g.spacing(a);
  return x;
}

double bracket3(const Point& xi) { return std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]); }

double norm3(const Point& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

// e^{i x.xi_k} with the phase reduced exactly on the integer lattice.
cplx grid_phase(const Grid& g, std::size_t x_flat, std::size_t k_flat) {
  const auto xi = g.unflatten(x_flat);
  const auto ki = g.unflatten(k_flat);
  long long acc = 0;
  for (int a = 0; a < g.n; ++a) {
    acc += static_cast<long long>(xi[static_cast<std::size_t>(a)]) *
           g.frequency_index(ki[static_cast<std::size_t>(a)]);
  }
  const long long N = g.N;
  const long long r = ((acc % N) + N) % N;
  const double angle = 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(N);
  return {std::cos(angle), std::sin(angle)};
}

double periodic_distance(const Grid& g, std::size_t a, std::size_t b) {
  const auto ia = g.unflatten(a);
  const auto ib = g.unflatten(b);
  double r2 = 0.0;
  for (int ax = 0; ax < g.n; ++ax) {
    int d = std::abs(ia[static_cast<std::size_t>(ax)] - ib[static_cast<std::size_t>(ax)]);
    d = std::min(d, g.N - d);
    const double y = d * g.spacing(ax);
    r2 += y * y;
  }
  return std::sqrt(r2);
}

// Central-difference stencils on a unit lattice (orders 0..3).
const std::vector<std::pair<int, double>>& stencil(int order) {
  static const std::vector<std::pair<int, double>> table[4] = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
  };
  return table[order];
}

std::vector<Point> directions(int n) {
  std::vector<Point> out;
  if (n == 1) return {{1, 0, 0}, {-1, 0, 0}};
  if (n == 2) {
    for (int k = 0; k < 16; ++k) {
      const double t = k * M_PI / 8.0;
      out.push_back({std::cos(t), std::sin(t), 0});
    }
    return out;
  }
  for (int a = 0; a < 3; ++a) {
    for (int s : {-1, 1}) {
      Point p{0, 0, 0};
      p[static_cast<std::size_t>(a)] = s;
      out.push_back(p);
    }
  }
  const double c = 1.0 / std::sqrt(3.0);
  for (int m = 0; m < 8; ++m) {
    out.push_back({(m & 1) ? c : -c, (m & 2) ? c : -c, (m & 4) ? c : -c});
  }
  return out;
}

struct Sample {
  Point x{};
  std::size_t flat = 0;  // grid index for separable symbols
};

std::vector<Sample> x_samples(const Symbol& s, int n, int budget) {
  std::vector<Sample> out;
  if (!s.depends_on_x()) {
    out.push_back({});
    return out;
  }
  const int per_axis = std::max(2, static_cast<int>(std::lround(std::pow(budget, 1.0 / n))));
  if (s.form() == Symbol::Form::separable) {
    const Grid& g = s.chi()->grid;
    const int stride = std::max(1, g.N / per_axis);
    for (std::size_t f = 0; f < g.size(); ++f) {
      const auto idx = g.unflatten(f);
      bool keep = true;
      for (int a = 0; a < n; ++a) keep = keep && idx[static_cast<std::size_t>(a)] % stride == 0;
      if (keep) out.push_back({position_at(g, f), f});
    }
    return out;
  }
  // General symbols: a lattice of [0, 2 pi)^n.
  const int total = static_cast<int>(std::pow(per_axis, n));
  for (int m = 0; m < total; ++m) {
    Sample smp;
    int rem = m;
    for (int a = n - 1; a >= 0; --a) {
      smp.x[static_cast<std::size_t>(a)] = 2.0 * M_PI * (rem % per_axis) / per_axis;
      rem /= per_axis;
    }
    out.push_back(smp);
  }
  return out;
}

std::size_t shift_index(const Grid& g, std::size_t flat, const std::array<int, 3>& off) {
  auto idx = g.unflatten(flat);
  std::size_t f = 0;
  for (int a = 0; a < g.n; ++a) {
    const auto i = static_cast<std::size_t>(a);
    const int v = ((idx[i] + off[i]) % g.N + g.N) % g.N;
    f = f * static_cast<std::size_t>(g.N) + static_cast<std::size_t>(v);
  }
  return f;
}

// d_xi^alpha d_x^beta a at (x, xi) by tensor central differences.
double symbol_derivative(const Symbol& s, int n, const Sample& at, const Point& xi,
                         const std::array<int, 3>& alpha, const std::array<int, 3>& beta,
                         double dxi, double dx) {
  const bool separable = s.form() == Symbol::Form::separable;
  const Grid* g = separable ? &s.chi()->grid : nullptr;
  double scale = 1.0;
  for (int a = 0; a < n; ++a) {
    const auto i = static_cast<std::size_t>(a);
    scale /= std::pow(dxi, alpha[i]);
    scale /= std::pow(separable ? g->spacing(a) : dx, beta[i]);
  }
  std::array<int, 6> off{};
  double acc = 0.0;
  auto recurse = [&](auto&& self, int axis, double w) -> void {
    if (axis == 2 * n) {
      Point q = xi;
      std::array<int, 3> xoff{0, 0, 0};
      Point x = at.x;
      for (int a = 0; a < n; ++a) {
        const auto i = static_cast<std::size_t>(a);
        q[i] += off[i] * dxi;
        xoff[i] = off[static_cast<std::size_t>(n + a)];
        x[i] += xoff[i] * dx;
      }
      acc += w * (separable ? s.eval_at_index(*g, shift_index(*g, at.flat, xoff), q) : s.eval(x, q));
      return;
    }
    const int order = axis < n ? alpha[static_cast<std::size_t>(axis)]
                               : beta[static_cast<std::size_t>(axis - n)];
    for (const auto& [o, c] : stencil(order)) {
      off[static_cast<std::size_t>(axis)] = o;
      self(self, axis + 1, w * c);
    }
    off[static_cast<std::size_t>(axis)] = 0;
  };
  recurse(recurse, 0, 1.0);
  return acc * scale;
}

// (alpha, beta) with |alpha| + |beta| <= k, ordered by total order.
std::vector<std::pair<std::array<int, 3>, std::array<int, 3>>> derivative_indices(int n, int k) {
  std::vector<std::pair<std::array<int, 3>, std::array<int, 3>>> out;
  for (int total = 0; total <= k; ++total) {
    std::array<int, 6> e{};
    auto recurse = [&](auto&& self, int axis, int left) -> void {
      if (axis == 2 * n - 1) {
        e[static_cast<std::size_t>(axis)] = left;
        std::array<int, 3> a{0, 0, 0};
        std::array<int, 3> b{0, 0, 0};
        for (int i = 0; i < n; ++i) {
          a[static_cast<std::size_t>(i)] = e[static_cast<std::size_t>(i)];
          b[static_cast<std::size_t>(i)] = e[static_cast<std::size_t>(n + i)];
        }
        out.emplace_back(a, b);
        return;
      }
      for (int v = left; v >= 0; --v) {
        e[static_cast<std::size_t>(axis)] = v;
        self(self, axis + 1, left - v);
      }
    };
    recurse(recurse, 0, total);
  }
  return out;
}

int sum3(const std::array<int, 3>& a) { return a[0] + a[1] + a[2]; }

void check_compatible(const Symbol& s, const Grid& g) {
  if (s.dim() != 0 && s.dim() != g.n) throw std::invalid_argument("symbol dimension does not match the grid");
  if (s.form() == Symbol::Form::separable && !(s.chi()->grid == g)) {
    throw std::invalid_argument("separable symbol sampled on a different grid");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Symbol

Symbol Symbol::multiplier(const Weight& f, double order) {
  Symbol s;
  s.form_ = Form::multiplier;
  s.order_ = order;
  s.dim_ = 0;
  s.f_ = f;
  return s;
}

Symbol Symbol::separable(const GridFunction& chi, const Weight& f, double order) {
  for (const auto& z : chi.values) {
    if (z.imag() != 0.0) throw std::invalid_argument("separable symbol: chi must be real");
  }
  Symbol s;
  s.form_ = Form::separable;
  s.order_ = order;
  s.dim_ = chi.grid.n;
  s.f_ = f;
  s.chi_ = chi;
  return s;
}

Symbol Symbol::general(const std::string& expr, double order, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("symbol dimension must be 1, 2 or 3");
  auto e = SymbolExpr::parse(expr);
  if (e.min_dimension() > dim) {
    throw std::invalid_argument("symbol expression references a coordinate beyond its dimension");
  }
  Symbol s;
  s.form_ = Form::general;
  s.order_ = order;
  s.dim_ = dim;
  s.expr_ = std::move(e);
  return s;
}

Symbol Symbol::with_properness_radius(double radius) const {
  if (!(radius >= 0.0)) throw std::invalid_argument("properness radius must be >= 0");
  Symbol s = *this;
  s.radius_ = radius;
  return s;
}

bool Symbol::depends_on_x() const {
  switch (form_) {
    case Form::multiplier: return false;
    case Form::separable: return true;
    case Form::general: return expr_->depends_on_x();
  }
  return true;
}

double Symbol::eval(const Point& x, const Point& xi) const {
  switch (form_) {
    case Form::multiplier: return (*f_)(bracket3(xi));
    case Form::general: return expr_->eval(x, xi);
    case Form::separable: break;
  }
  throw std::logic_error("separable symbols are evaluated at grid indices");
}

double Symbol::eval_at_index(const Grid& grid, std::size_t flat, const Point& xi) const {
  if (form_ == Form::separable) return chi_->values[flat].real() * (*f_)(bracket3(xi));
  return eval(position_at(grid, flat), xi);
}

// ---------------------------------------------------------------------------
// PdoOperator

PdoOperator::PdoOperator(Symbol symbol, Grid grid) : symbol_(std::move(symbol)), grid_(grid) {
  check_compatible(symbol_, grid_);
  const std::size_t M = dense_size(grid_);
  if (symbol_.form() == Symbol::Form::general && M <= kDenseLimit) {
    // Column x holds L^{-n} a(x, xi_k) e^{i x.xi_k} over k.
    MatrixC k(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
    const double inv_vol = 1.0 / grid_.volume();
    for (std::size_t x = 0; x < M; ++x) {
      const Point px = position_at(grid_, x);
      for (std::size_t f = 0; f < M; ++f) {
        k(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(x)) =
            inv_vol * symbol_.eval(px, frequency_at(grid_, f)) * grid_phase(grid_, x, f);
      }
    }
    kernel_ = std::move(k);
  }
  if (symbol_.properness_radius()) {
    if (M > kDenseLimit) throw std::invalid_argument("properness truncation needs a dense operator");
    MatrixC d = dense_matrix();
    const double r = *symbol_.properness_radius();
    for (std::size_t x = 0; x < M; ++x) {
      for (std::size_t y = 0; y < M; ++y) {
        if (periodic_distance(grid_, x, y) > r) {
          d(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = 0.0;
        }
      }
    }
    dense_ = std::move(d);
  }
}

GridFunction PdoOperator::apply(const GridFunction& u) const {
  if (!(u.grid == grid_)) throw std::invalid_argument("apply: grid mismatch");
  if (dense_) {
    VectorC v = Eigen::Map<const VectorC>(u.values.data(), static_cast<Eigen::Index>(u.values.size()));
    VectorC r = (*dense_) * v;
    return GridFunction(grid_, std::vector<cplx>(r.data(), r.data() + r.size()));
  }
  Spectrum s = transform(u);
  switch (symbol_.form()) {
    case Symbol::Form::multiplier:
    case Symbol::Form::separable: {
      simd::scale(spectral_weights(grid_, *symbol_.weight()), s.coefficients);
      GridFunction out = inverse_transform(s);
      if (symbol_.form() == Symbol::Form::separable) {
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= symbol_.chi()->values[i].real();
      }
      return out;
    }
    case Symbol::Form::general: break;
  }
  const std::size_t M = grid_.size();
  GridFunction out(grid_);
  if (kernel_) {
    for (std::size_t x = 0; x < M; ++x) {
      const cplx* col = kernel_->data() + x * M;
      out.values[x] = simd::dot(std::span<const cplx>(col, M), s.coefficients);
    }
    return out;
  }
  const double inv_vol = 1.0 / grid_.volume();
  for (std::size_t x = 0; x < M; ++x) {
    const Point px = position_at(grid_, x);
    cplx acc{};
    for (std::size_t f = 0; f < M; ++f) {
      acc += symbol_.eval(px, frequency_at(grid_, f)) * grid_phase(grid_, x, f) * s.coefficients[f];
    }
    out.values[x] = acc * inv_vol;
  }
  return out;
}

GridFunction PdoOperator::apply_adjoint(const GridFunction& w) const {
  if (!(w.grid == grid_)) throw std::invalid_argument("apply_adjoint: grid mismatch");
  if (dense_) {
    VectorC v = Eigen::Map<const VectorC>(w.values.data(), static_cast<Eigen::Index>(w.values.size()));
    VectorC r = dense_->adjoint() * v;
    return GridFunction(grid_, std::vector<cplx>(r.data(), r.data() + r.size()));
  }
  switch (symbol_.form()) {
    case Symbol::Form::multiplier:
      return apply(w);
    case Symbol::Form::separable: {
      GridFunction cw = w;
      for (std::size_t i = 0; i < cw.values.size(); ++i) cw.values[i] *= symbol_.chi()->values[i].real();
      Spectrum s = transform(cw);
      simd::scale(spectral_weights(grid_, *symbol_.weight()), s.coefficients);
      return inverse_transform(s);
    }
    case Symbol::Form::general: break;
  }
  // Op = K^T T with T the forward transform; T^H = (h L)^n T^{-1}.
  const std::size_t M = grid_.size();
  std::vector<cplx> v(M);
  if (kernel_) {
    VectorC wv = Eigen::Map<const VectorC>(w.values.data(), static_cast<Eigen::Index>(M));
    VectorC r = kernel_->conjugate() * wv;
    v.assign(r.data(), r.data() + r.size());
  } else {
    const double inv_vol = 1.0 / grid_.volume();
    for (std::size_t f = 0; f < M; ++f) {
      const Point xi = frequency_at(grid_, f);
      cplx acc{};
      for (std::size_t x = 0; x < M; ++x) {
        acc += std::conj(symbol_.eval(position_at(grid_, x), xi) * grid_phase(grid_, x, f)) * w.values[x];
      }
      v[f] = acc * inv_vol;
    }
  }
  GridFunction out = inverse_transform(Spectrum(grid_, std::move(v)));
  const double factor = grid_.cell_volume() * grid_.volume();
  for (auto& z : out.values) z *= factor;
  return out;
}

MatrixC PdoOperator::dense_matrix() const {
  if (dense_) return *dense_;
  const std::size_t M = grid_.size();
  if (M > kDenseLimit) throw std::invalid_argument("dense_matrix: grid too large");
  const auto Mi = static_cast<Eigen::Index>(M);
  // M = K^T F_h with K(k, x) = L^{-n} a(x, xi_k) e^{i x.xi_k}, F_h(k, y) = h^n e^{-i y.xi_k}.
  MatrixC k(Mi, Mi);
  if (kernel_) {
    k = *kernel_;
  } else {
    const double inv_vol = 1.0 / grid_.volume();
    for (std::size_t x = 0; x < M; ++x) {
      for (std::size_t f = 0; f < M; ++f) {
        k(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(x)) =
            inv_vol * symbol_.eval_at_index(grid_, x, frequency_at(grid_, f)) * grid_phase(grid_, x, f);
      }
    }
  }
  MatrixC fh(Mi, Mi);
  const double h = grid_.cell_volume();
  for (std::size_t f = 0; f < M; ++f) {
    for (std::size_t y = 0; y < M; ++y) {
      fh(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(y)) = h * std::conj(grid_phase(grid_, y, f));
    }
  }
  return k.transpose() * fh;
}

// ---------------------------------------------------------------------------
// Certificates

SymbolCertificate certify_symbol(const Symbol& s, int k, const SymbolSampling& sampling) {
  if (k < 0 || k > 3) throw std::invalid_argument("certify_symbol: k must be in [0, 3]");
  if (sampling.blocks < 2 || sampling.per_block < 1) {
    throw std::invalid_argument("certify_symbol: need at least two blocks");
  }
  const int n = std::max(1, s.dim());
  const auto xs = x_samples(s, n, sampling.x_samples);
  const auto dirs = directions(n);
  const auto indices = derivative_indices(n, k);

  SymbolCertificate cert;
  cert.k = k;
  cert.sampling = sampling;
  for (const auto& [alpha, beta] : indices) {
    SymbolBound b;
    b.alpha = alpha;
    b.beta = beta;
    b.block_max.assign(static_cast<std::size_t>(sampling.blocks), 0.0);
    const bool x_free = !s.depends_on_x() && sum3(beta) > 0;
    if (!x_free) {
      for (int blk = 0; blk < sampling.blocks; ++blk) {
        std::vector<double> mags;
        if (blk == 0) mags.push_back(0.0);
        for (int q = 0; q < sampling.per_block; ++q) {
          mags.push_back(std::pow(2.0, blk + (q + 0.5) / sampling.per_block));
        }
        double& slot = b.block_max[static_cast<std::size_t>(blk)];
        for (double r : mags) {
          for (const auto& d : dirs) {
            const Point xi{r * d[0], r * d[1], r * d[2]};
            const double jb = bracket3(xi);
            const double norm = std::pow(jb, s.order() - sum3(alpha));
            for (const auto& smp : xs) {
              const double v = symbol_derivative(s, n, smp, xi, alpha, beta,
                                                 sampling.xi_step * jb, sampling.x_step);
              slot = std::max(slot, std::abs(v) / norm);
            }
            if (r == 0.0) break;  // every direction gives the same point
          }
        }
      }
    }
    b.constant = *std::max_element(b.block_max.begin(), b.block_max.end());
    const double last = b.block_max.back();
    const double prev = b.block_max[b.block_max.size() - 2];
    b.growth = last > sampling.growth_floor && last > sampling.growth_ratio * prev;
    cert.bounds.push_back(std::move(b));
  }
  cert.ok = std::none_of(cert.bounds.begin(), cert.bounds.end(),
                         [](const SymbolBound& b) { return b.growth; });
  return cert;
}

EllipticCertificate certify_elliptic(const Symbol& s, double R, const SymbolSampling& sampling) {
  if (!(R > 0.0)) throw std::invalid_argument("certify_elliptic: R must be positive");
  if (sampling.blocks < 2 || sampling.per_block < 1) {
    throw std::invalid_argument("certify_elliptic: need at least two blocks");
  }
  const int n = std::max(1, s.dim());
  const auto xs = x_samples(s, n, sampling.x_samples);
  const auto dirs = directions(n);
  std::vector<double> block_min(static_cast<std::size_t>(sampling.blocks),
                                std::numeric_limits<double>::infinity());
  for (int blk = 0; blk < sampling.blocks; ++blk) {
    for (int q = 0; q < sampling.per_block; ++q) {
      const double r = R * std::pow(2.0, blk + (q + 0.5) / sampling.per_block);
      for (const auto& d : dirs) {
        const Point xi{r * d[0], r * d[1], r * d[2]};
        const double denom = std::pow(norm3(xi), s.order());
        for (const auto& smp : xs) {
          const double a = s.form() == Symbol::Form::separable
                               ? s.eval_at_index(s.chi()->grid, smp.flat, xi)
                               : s.eval(smp.x, xi);
          auto& slot = block_min[static_cast<std::size_t>(blk)];
          slot = std::min(slot, std::abs(a) / denom);
        }
      }
    }
  }
  EllipticCertificate out;
  out.constant = *std::min_element(block_min.begin(), block_min.end());
  out.last_block_min = block_min.back();
  out.previous_block_min = block_min[block_min.size() - 2];
  out.ok = out.constant > 1e-10 &&
           out.last_block_min * sampling.growth_ratio >= out.previous_block_min;
  return out;
}

FamilyCertificate certify_family(const std::vector<Symbol>& family, int k,
                                 const SymbolSampling& sampling) {
  FamilyCertificate out;
  out.ok = !family.empty();
  for (const auto& s : family) {
    out.members.push_back(certify_symbol(s, k, sampling));
    out.ok = out.ok && out.members.back().ok;
    for (const auto& b : out.members.back().bounds) out.common_bound = std::max(out.common_bound, b.constant);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mapping norm

MappingNorm mapping_norm(const PdoOperator& op, const Weight& phi, Rng& rng, int max_iterations,
                         double tolerance) {
  if (max_iterations < 1) throw std::invalid_argument("mapping_norm: need at least one iteration");
  const Grid& g = op.grid();
  const auto w1 = spectral_weights(g, phi);
  const auto w2 = spectral_weights(g, Weight::shifted(phi, op.symbol().order()));
  std::vector<double> inv_w1(w1.size());
  for (std::size_t i = 0; i < w1.size(); ++i) inv_w1[i] = 1.0 / w1[i];

  // Multipliers are diagonal on coefficients; skipping the grid round trip
  // keeps FFT noise from being amplified by the weight ratio.
  std::optional<std::vector<double>> diagonal;
  if (op.symbol().form() == Symbol::Form::multiplier) diagonal = spectral_weights(g, *op.symbol().weight());

  auto apply_op = [&](Spectrum s, bool adjoint) {
    if (diagonal) {
      simd::scale(*diagonal, s.coefficients);
      return s;
    }
    const GridFunction u = inverse_transform(s);
    return transform(adjoint ? op.apply_adjoint(u) : op.apply(u));
  };
  auto apply_b = [&](const std::vector<cplx>& z) {
    Spectrum s(g, z);
    simd::scale(inv_w1, s.coefficients);
    Spectrum out = apply_op(std::move(s), false);
    simd::scale(w2, out.coefficients);
    return out.coefficients;
  };
  auto apply_bh = [&](const std::vector<cplx>& y) {
    Spectrum s(g, y);
    simd::scale(w2, s.coefficients);
    Spectrum out = apply_op(std::move(s), true);
    simd::scale(inv_w1, out.coefficients);
    return out.coefficients;
  };
  auto norm = [](const std::vector<cplx>& v) {
    const std::vector<double> ones(v.size(), 1.0);
    return std::sqrt(simd::weighted_energy(ones, v));
  };

  std::vector<cplx> z(g.size());
  for (auto& c : z) c = rng.complex_normal();
  double nz = norm(z);
  for (auto& c : z) c /= nz;

  MappingNorm out;
  double previous = -1.0;
  for (int it = 1; it <= max_iterations; ++it) {
    const auto y = apply_b(z);
    const double sigma = norm(y);
    out.iterations = it;
    out.norm = sigma;
    if (sigma == 0.0) {
      out.residual = 0.0;
      out.converged = true;
      return out;
    }
    auto x = apply_bh(y);
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r2 += std::norm(x[i] - sigma * sigma * z[i]);
    out.residual = std::sqrt(r2) / (sigma * sigma);
    if (previous >= 0.0 && std::abs(sigma - previous) <= tolerance * sigma) {
      out.converged = true;
      return out;
    }
    previous = sigma;
    const double nx = norm(x);
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] / nx;
  }
  return out;
}

// ---------------------------------------------------------------------------
// A-scale

AScaleGenerator build_ascale(const Grid& grid, const std::vector<double>& v) {
  if (grid.n != 1) throw std::invalid_argument("build_ascale: only n = 1 is supported");
  if (grid.N > 1024) throw std::invalid_argument("build_ascale: N must be <= 1024");
  if (v.size() != grid.size()) throw std::invalid_argument("build_ascale: perturbation size mismatch");
  const int N = grid.N;
  // <D> is circulant: c[d] = N^{-1} sum_k <xi_k> e^{2 pi i k d / N} (real).
  std::vector<double> c(static_cast<std::size_t>(N), 0.0);
  for (int d = 0; d < N; ++d) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      const int k = grid.frequency_index(i);
      const long long r = ((static_cast<long long>(k) * d) % N + N) % N;
      acc += std::sqrt(1.0 + std::pow(grid.frequency(0, i), 2)) * std::cos(2.0 * M_PI * r / N);
    }
    c[static_cast<std::size_t>(d)] = acc / N;
  }
  AScaleGenerator gen;
  gen.grid = grid;
  gen.a.resize(N, N);
  for (int x = 0; x < N; ++x) {
    for (int y = 0; y < N; ++y) gen.a(x, y) = c[static_cast<std::size_t>(((x - y) % N + N) % N)];
    gen.a(x, x) += v[static_cast<std::size_t>(x)];
  }
  gen.hermitian_defect = (gen.a - gen.a.transpose()).norm();
  gen.a = 0.5 * (gen.a + gen.a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gen.a);
  if (es.info() != Eigen::Success) throw std::runtime_error("build_ascale: eigensolve failed");
  gen.eigenvalues = es.eigenvalues();
  gen.eigenvectors = es.eigenvectors();
  const double lmin = gen.eigenvalues.minCoeff();
  if (lmin < 1.0 - 1e-12) {
    gen.shift = 1.0 - lmin + 1e-6;
    gen.a += gen.shift * Eigen::MatrixXd::Identity(N, N);
    gen.eigenvalues.array() += gen.shift;
  }
  return gen;
}

double ascale_norm(const AScaleGenerator& gen, const Weight& phi, const GridFunction& u) {
  if (!(u.grid == gen.grid)) throw std::invalid_argument("ascale_norm: grid mismatch");
  const auto M = static_cast<Eigen::Index>(u.values.size());
  const VectorC uv = Eigen::Map<const VectorC>(u.values.data(), M);
  const VectorC c = gen.eigenvectors.transpose().cast<cplx>() * uv;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < M; ++i) {
    // Rounding can leave the flat floor a few ulps below 1.
    const double f = phi(std::max(1.0, gen.eigenvalues(i)));
    acc += f * f * std::norm(c(i));
  }
  return std::sqrt(acc * gen.grid.cell_volume());
}

RatioInterval ascale_equivalence(const AScaleGenerator& gen, const Weight& phi, int trials, int kmax,
                                 Rng& rng) {
  if (trials < 1) throw std::invalid_argument("ascale_equivalence: trials must be >= 1");
  RatioInterval out;
  out.trials = trials;
  out.c_low = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Rng stream = rng.stream(static_cast<std::uint64_t>(t));
    const GridFunction u = band_limited_trial(gen.grid, kmax, stream);
    const double r = ascale_norm(gen, phi, u) / hphi_norm(u, phi);
    out.c_low = std::min(out.c_low, r);
    out.c_high = std::max(out.c_high, r);
  }
  return out;
}

}  // namespace sobscale
