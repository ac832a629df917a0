#include "sobscale/atlas.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sobscale/errors.hpp"
#include "sobscale/rng.hpp"

namespace sobscale {

namespace {

using Offsets = std::array<int, 3>;

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  return r;
}

double minimal_image(double d, double period) {
  d = std::fmod(d, period);
  if (d >= 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

// Central differences on a unit lattice; scale by step^-order separately.
const std::vector<std::pair<int, double>>& stencil(int order) {
  static const std::vector<std::pair<int, double>> table[5] = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
      {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
  };
  return table[order];
}

// sum over the tensor stencil of D^alpha; f receives integer offsets.
template <class F>
double mixed_difference(F&& f, const Offsets& alpha, int n, const std::array<double, 3>& step) {
  double scale = 1.0;
  for (int a = 0; a < n; ++a) scale /= std::pow(step[static_cast<std::size_t>(a)], alpha[static_cast<std::size_t>(a)]);
  double acc = 0.0;
  Offsets off{0, 0, 0};
  auto recurse = [&](auto&& self, int axis, double w) -> void {
    if (axis == n) {
      acc += w * f(off);
      return;
    }
    for (const auto& [o, c] : stencil(alpha[static_cast<std::size_t>(axis)])) {
      off[static_cast<std::size_t>(axis)] = o;
      self(self, axis + 1, w * c);
    }
    off[static_cast<std::size_t>(axis)] = 0;
  };
  recurse(recurse, 0, 1.0);
  return acc * scale;
}

// All multi-indices with |alpha| == m in n dimensions.
std::vector<Offsets> multi_indices(int n, int m) {
  std::vector<Offsets> out;
  for (int a0 = 0; a0 <= m; ++a0) {
    if (n == 1) {
      if (a0 == m) out.push_back({a0, 0, 0});
      continue;
    }
    for (int a1 = 0; a0 + a1 <= m; ++a1) {
      if (n == 2) {
        if (a0 + a1 == m) out.push_back({a0, a1, 0});
        continue;
      }
      out.push_back({a0, a1, m - a0 - a1});
    }
  }
  return out;
}

std::size_t flatten(const Offsets& idx, int n, int N) {
  std::size_t f = 0;
  for (int a = 0; a < n; ++a) {
    f = f * static_cast<std::size_t>(N) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  }
  return f;
}

int positive_mod(int i, int m) { return ((i % m) + m) % m; }

void require_grid(const Grid& expected, const Grid& got, const char* what) {
  if (!(expected == got)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

// ---------------------------------------------------------------------------
// Model and charts

Model Model::line(double period, int N) {
  Model m;
  m.kind = Kind::line;
  m.period_x = period;
  m.circumference = period;
  m.N = N;
  return m;
}

Model Model::cylinder(double period_x, double circumference, int N) {
  Model m;
  m.kind = Kind::cylinder;
  m.period_x = period_x;
  m.circumference = circumference;
  m.N = N;
  return m;
}

Grid Model::grid() const { return Grid::make(dim(), N, {period_x, circumference, period_x}); }

Point Model::displacement(const Point& a, const Point& b) const {
  Point d{0, 0, 0};
  for (int ax = 0; ax < dim(); ++ax) {
    const auto i = static_cast<std::size_t>(ax);
    d[i] = minimal_image(a[i] - b[i], period(ax));
  }
  return d;
}

double Model::distance(const Point& a, const Point& b) const {
  const Point d = displacement(a, b);
  return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

Chart translation_chart(const Model& model, int id, const Point& center, double radius) {
  Chart c;
  c.id = id;
  c.center = center;
  c.radius = radius;
  c.gamma = [model, center](const Point& y) {
    Point x{0, 0, 0};
    for (int a = 0; a < model.dim(); ++a) {
      const auto i = static_cast<std::size_t>(a);
      x[i] = wrap(center[i] + y[i], model.period(a));
    }
    return x;
  };
  c.kappa = [model, center](const Point& x) { return model.displacement(x, center); };
  return c;
}

Chart warped_chart(const Model& model, const Chart& base, double amplitude) {
  if (!(std::abs(amplitude) < 1.0)) throw std::invalid_argument("warp amplitude must be < 1");
  Chart c = base;
  const Point center = base.center;
  const double r = base.radius;
  c.gamma = [model, center, r, amplitude](const Point& y) {
    Point x{0, 0, 0};
    for (int a = 0; a < model.dim(); ++a) {
      const auto i = static_cast<std::size_t>(a);
      x[i] = wrap(center[i] + y[i] + amplitude * r * std::sin(y[i] / r), model.period(a));
    }
    return x;
  };
  c.kappa = [model, center, r, amplitude](const Point& x) {
    Point z = model.displacement(x, center);
    for (int a = 0; a < model.dim(); ++a) {
      const auto i = static_cast<std::size_t>(a);
      double w = z[i];
      for (int it = 0; it < 60; ++it) {
        const double g = w + amplitude * r * std::sin(w / r) - z[i];
        const double dg = 1.0 + amplitude * std::cos(w / r);
        const double step = g / dg;
        w -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
      }
      z[i] = w;
    }
    return z;
  };
  return c;
}

double chart_roundtrip_error(const Model& model, const Chart& chart, int samples_per_axis) {
  if (samples_per_axis < 2) throw std::invalid_argument("need at least two samples per axis");
  const int n = model.dim();
  double worst = 0.0;
  Offsets idx{0, 0, 0};
  const int total = static_cast<int>(std::pow(samples_per_axis, n));
  for (int m = 0; m < total; ++m) {
    int rem = m;
    Point y{0, 0, 0};
    double r2 = 0.0;
    for (int a = n - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = rem % samples_per_axis;
      rem /= samples_per_axis;
      const double t = -1.0 + 2.0 * idx[static_cast<std::size_t>(a)] / (samples_per_axis - 1);
      y[static_cast<std::size_t>(a)] = t * chart.radius;
      r2 += t * t;
    }
    if (r2 >= 1.0) continue;
    const Point back = chart.kappa(chart.gamma(y));
    for (int a = 0; a < n; ++a) {
      const auto i = static_cast<std::size_t>(a);
      worst = std::max(worst, std::abs(back[i] - y[i]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Atlas construction

namespace {

struct Hit {
  int chart;
  double h;
};

// Point lists of every chart ball plus the per-grid-point chart membership.
void finish_partition(std::vector<std::vector<PatchPoint>>& patches,
                      const std::vector<std::vector<int>>& overlaps,
                      const std::vector<double>& weight_sum, std::size_t grid_size) {
  std::vector<std::vector<Hit>> hits(grid_size);
  for (std::size_t j = 0; j < patches.size(); ++j) {
    for (auto& p : patches[j]) {
      p.h = p.h / weight_sum[p.global];
      hits[p.global].push_back({static_cast<int>(j), p.h});
    }
  }
  for (std::size_t j = 0; j < patches.size(); ++j) {
    for (auto& p : patches[j]) {
      double s = 0.0;
      for (const auto& hit : hits[p.global]) {
        const auto& a = overlaps[j];
        if (std::find(a.begin(), a.end(), hit.chart) != a.end()) s += hit.h;
      }
      p.overlap_sum = s;
    }
  }
}

}  // namespace

Atlas build_atlas(const Model& model, double epsilon, double spacing, double sharpness) {
  if (!(epsilon > 0.0) || !(spacing > 0.0) || !(sharpness > 0.0)) {
    throw std::invalid_argument("epsilon, spacing and sharpness must be positive");
  }
  if (spacing > epsilon) throw CoverGapError("spacing exceeds epsilon: the balls leave gaps");
  const int n = model.dim();
  for (int a = 0; a < n; ++a) {
    if (epsilon > 0.5 * model.period(a)) {
      throw std::invalid_argument("epsilon must not exceed half a period");
    }
  }

  Atlas atlas;
  atlas.model_ = model;
  atlas.grid_ = model.grid();
  atlas.epsilon_ = epsilon;
  atlas.spacing_ = spacing;
  atlas.sharpness_ = sharpness;
  const Grid& grid = atlas.grid_;
  const int N = grid.N;

  // Lattice centers snapped to grid points.
  std::array<std::vector<int>, 3> centers_1d;
  std::array<int, 3> radius_steps{0, 0, 0};
  int max_width = 1;
  for (int a = 0; a < n; ++a) {
    const auto i = static_cast<std::size_t>(a);
    const double P = model.period(a);
    const double h = grid.spacing(a);
    const int count = std::max(1, static_cast<int>(std::ceil(P / spacing - 1e-12)));
    for (int c = 0; c < count; ++c) {
      centers_1d[i].push_back(positive_mod(static_cast<int>(std::lround(c * P / count / h)), N));
    }
    radius_steps[i] = static_cast<int>(std::ceil(epsilon / h));
    max_width = std::max(max_width, 2 * radius_steps[i] + 1);
  }
  const int Np = static_cast<int>(std::bit_ceil(static_cast<unsigned>(max_width)));
  std::array<double, 3> patch_L{};
  for (int a = 0; a < 3; ++a) patch_L[static_cast<std::size_t>(a)] = Np * grid.spacing(std::min(a, n - 1));
  atlas.patch_grid_ = Grid::make(n, Np, patch_L);

  // Charts in row-major center order (axis 0 slowest).
  std::vector<Offsets> center_idx;
  {
    Offsets c{0, 0, 0};
    auto recurse = [&](auto&& self, int axis) -> void {
      if (axis == n) {
        center_idx.push_back(c);
        return;
      }
      for (int v : centers_1d[static_cast<std::size_t>(axis)]) {
        c[static_cast<std::size_t>(axis)] = v;
        self(self, axis + 1);
      }
    };
    recurse(recurse, 0);
  }
  for (std::size_t j = 0; j < center_idx.size(); ++j) {
    Point p{0, 0, 0};
    for (int a = 0; a < n; ++a) {
      p[static_cast<std::size_t>(a)] = center_idx[j][static_cast<std::size_t>(a)] * grid.spacing(a);
    }
    atlas.charts_.push_back(translation_chart(model, static_cast<int>(j), p, epsilon));
  }

  // Bumps on each ball; p.h holds the raw profile until normalization.
  std::vector<double> weight_sum(grid.size(), 0.0);
  atlas.patches_.resize(center_idx.size());
  for (std::size_t j = 0; j < center_idx.size(); ++j) {
    Offsets d{0, 0, 0};
    auto recurse = [&](auto&& self, int axis) -> void {
      if (axis == n) {
        double r2 = 0.0;
        Offsets g{0, 0, 0};
        Offsets l{0, 0, 0};
        for (int a = 0; a < n; ++a) {
          const auto i = static_cast<std::size_t>(a);
          const double y = d[i] * grid.spacing(a);
          r2 += y * y;
          g[i] = positive_mod(center_idx[j][i] + d[i], N);
          l[i] = positive_mod(d[i], Np);
        }
        const double q = r2 / (epsilon * epsilon);
        if (q >= 1.0) return;
        const double beta = std::exp(-sharpness / (1.0 - q));
        PatchPoint p;
        p.global = flatten(g, n, N);
        p.local = flatten(l, n, Np);
        p.h = beta;
        weight_sum[p.global] += beta;
        atlas.patches_[j].push_back(p);
        return;
      }
      const int R = radius_steps[static_cast<std::size_t>(axis)];
      for (int v = -R; v <= R; ++v) {
        d[static_cast<std::size_t>(axis)] = v;
        self(self, axis + 1);
      }
    };
    recurse(recurse, 0);
  }
  for (double s : weight_sum) {
    if (!(s > 0.0)) throw CoverGapError("a grid point lies outside every chart ball");
  }
  // Overlap sets and cover order.
  atlas.overlaps_.resize(atlas.charts_.size());
  for (std::size_t j = 0; j < atlas.charts_.size(); ++j) {
    for (std::size_t k = 0; k < atlas.charts_.size(); ++k) {
      if (model.distance(atlas.charts_[j].center, atlas.charts_[k].center) < 2.0 * epsilon) {
        atlas.overlaps_[j].push_back(static_cast<int>(k));
      }
    }
    atlas.cover_order_ = std::max(atlas.cover_order_, static_cast<int>(atlas.overlaps_[j].size()));
  }

  finish_partition(atlas.patches_, atlas.overlaps_, weight_sum, grid.size());


  // Half-radius cover: nearest lattice center per axis gives the nearest center.
  atlas.half_cover_ = true;
  for (std::size_t f = 0; f < grid.size() && atlas.half_cover_; ++f) {
    const auto idx = grid.unflatten(f);
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const auto i = static_cast<std::size_t>(a);
      double best = std::numeric_limits<double>::infinity();
      for (int c : centers_1d[i]) {
        best = std::min(best, std::abs(minimal_image((idx[i] - c) * grid.spacing(a), model.period(a))));
      }
      r2 += best * best;
    }
    if (std::sqrt(r2) > 0.5 * epsilon * (1.0 + 1e-12)) atlas.half_cover_ = false;
  }

  // Finite-difference bounds of h_j o gamma_j on the zero-extended patch grid.
  const std::size_t patch_size = atlas.patch_grid_.size();
  std::array<double, 3> step{};
  for (int a = 0; a < 3; ++a) step[static_cast<std::size_t>(a)] = grid.spacing(std::min(a, n - 1));
  for (const auto& patch : atlas.patches_) {
    std::vector<double> dense(patch_size, 0.0);
    for (const auto& p : patch) dense[p.local] = p.h;
    for (int m = 0; m <= 4; ++m) {
      for (const auto& alpha : multi_indices(n, m)) {
        for (std::size_t f = 0; f < patch_size; ++f) {
          const auto base = atlas.patch_grid_.unflatten(f);
          auto at = [&](const Offsets& off) {
            Offsets q{0, 0, 0};
            for (int a = 0; a < n; ++a) {
              const auto i = static_cast<std::size_t>(a);
              q[i] = positive_mod(base[i] + off[i], Np);
            }
            return dense[flatten(q, n, Np)];
          };
          const double v = std::abs(mixed_difference(at, alpha, n, step));
          auto& slot = atlas.derivative_bounds_[static_cast<std::size_t>(m)];
          slot = std::max(slot, v);
        }
      }
    }
  }
  return atlas;
}

Atlas build_global_atlas(const Model& model) {
  Atlas atlas;
  atlas.model_ = model;
  atlas.grid_ = model.grid();
  atlas.patch_grid_ = atlas.grid_;
  atlas.global_ = true;
  double half = 0.5 * model.period(0);
  for (int a = 1; a < model.dim(); ++a) half = std::min(half, 0.5 * model.period(a));
  atlas.epsilon_ = half;
  atlas.spacing_ = 0.0;
  atlas.sharpness_ = 0.0;
  atlas.half_cover_ = true;
  atlas.charts_.push_back(translation_chart(model, 0, Point{0, 0, 0}, half));
  atlas.patches_.resize(1);
  atlas.patches_[0].reserve(atlas.grid_.size());
  for (std::size_t f = 0; f < atlas.grid_.size(); ++f) {
    atlas.patches_[0].push_back(PatchPoint{f, f, 1.0, 1.0});
  }
  atlas.overlaps_ = {{0}};
  atlas.cover_order_ = 1;
  atlas.derivative_bounds_ = {1.0, 0.0, 0.0, 0.0, 0.0};
  return atlas;
}

std::vector<double> Atlas::bump(int j) const {
  std::vector<double> out(grid_.size(), 0.0);
  for (const auto& p : patches_.at(static_cast<std::size_t>(j))) out[p.global] = p.h;
  return out;
}

double Atlas::partition_defect() const {
  std::vector<double> sum(grid_.size(), 0.0);
  for (const auto& patch : patches_) {
    for (const auto& p : patch) sum[p.global] += p.h;
  }
  double worst = 0.0;
  for (double s : sum) worst = std::max(worst, std::abs(s - 1.0));
  return worst;
}

Atlas Atlas::with_charts(std::vector<Chart> charts) const {
  if (charts.size() != charts_.size()) throw std::invalid_argument("with_charts: chart count mismatch");
  Atlas copy = *this;
  copy.charts_ = std::move(charts);
  return copy;
}

// ---------------------------------------------------------------------------
// Transition certificates

TransitionCertificate certify_bounded_geometry(const Atlas& atlas, int order) {
  if (order < 0 || order > 4) throw std::invalid_argument("certify_bounded_geometry: order must be in [0, 4]");
  const Model& model = atlas.model();
  const int n = model.dim();
  const double eps = atlas.epsilon();
  const double delta = eps / 16.0;
  const double sample_step = eps / 8.0;
  const double margin = 4.0 * delta * std::sqrt(static_cast<double>(n));
  const int per_axis = static_cast<int>(std::floor(eps / sample_step));
  const std::array<double, 3> step{delta, delta, delta};

  TransitionCertificate cert;
  cert.order = order;
  cert.min_by_order.fill(std::numeric_limits<double>::infinity());

  std::vector<Point> samples;
  {
    Offsets idx{0, 0, 0};
    auto recurse = [&](auto&& self, int axis) -> void {
      if (axis == n) {
        Point y{0, 0, 0};
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) {
          const auto i = static_cast<std::size_t>(a);
          y[i] = idx[i] * sample_step;
          r2 += y[i] * y[i];
        }
        if (std::sqrt(r2) + margin < eps) samples.push_back(y);
        return;
      }
      for (int v = -per_axis; v <= per_axis; ++v) {
        idx[static_cast<std::size_t>(axis)] = v;
        self(self, axis + 1);
      }
    };
    recurse(recurse, 0);
  }

  const auto& charts = atlas.charts();
  for (std::size_t j = 0; j < charts.size(); ++j) {
    for (int i_chart : atlas.overlaps()[j]) {
      const Chart& ci = charts[static_cast<std::size_t>(i_chart)];
      const Chart& cj = charts[j];
      std::array<double, 5> pair_max{};
      double pair_jac = 0.0;
      bool any = false;
      for (const Point& y : samples) {
        if (model.distance(cj.gamma(y), ci.center) + 2.0 * margin >= ci.radius) continue;
        any = true;
        for (int c = 0; c < n; ++c) {
          auto component = [&](const Offsets& off) {
            Point z = y;
            for (int a = 0; a < n; ++a) z[static_cast<std::size_t>(a)] += off[static_cast<std::size_t>(a)] * delta;
            return ci.kappa(cj.gamma(z))[static_cast<std::size_t>(c)];
          };
          for (int m = 0; m <= order; ++m) {
            for (const auto& alpha : multi_indices(n, m)) {
              const double v = mixed_difference(component, alpha, n, step);
              pair_max[static_cast<std::size_t>(m)] = std::max(pair_max[static_cast<std::size_t>(m)], std::abs(v));
              if (m == 1) {
                const double expected = alpha[static_cast<std::size_t>(c)] == 1 ? 1.0 : 0.0;
                pair_jac = std::max(pair_jac, std::abs(v - expected));
              }
            }
          }
        }
      }
      if (!any) continue;
      ++cert.pairs_checked;
      cert.jacobian_identity_error = std::max(cert.jacobian_identity_error, pair_jac);
      for (int m = 0; m <= order; ++m) {
        const auto k = static_cast<std::size_t>(m);
        cert.max_by_order[k] = std::max(cert.max_by_order[k], pair_max[k]);
        cert.min_by_order[k] = std::min(cert.min_by_order[k], pair_max[k]);
      }
    }
  }
  for (auto& v : cert.min_by_order) {
    if (std::isinf(v)) v = 0.0;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// F, G and the patch norm

Localized localize_F(const Atlas& atlas, const GridFunction& u, const Weight& phi) {
  require_grid(atlas.grid(), u.grid, "localize_F");
  Localized out;
  double acc = 0.0;
  for (std::size_t j = 0; j < atlas.patches().size(); ++j) {
    GridFunction p(atlas.patch_grid());
    for (const auto& pt : atlas.patches()[j]) p.values[pt.local] = pt.h * u.values[pt.global];
    const double nj = hphi_norm(p, phi);
    acc += nj * nj;
    out.patches.chart_ids.push_back(atlas.charts()[j].id);
    out.patches.entries.push_back(std::move(p));
  }
  out.norm = std::sqrt(acc);
  return out;
}

GridFunction glue_G(const Atlas& atlas, const PatchVector& v) {
  if (v.entries.size() != atlas.patches().size()) {
    throw std::invalid_argument("glue_G: patch count does not match the atlas");
  }
  GridFunction out(atlas.grid());
  for (std::size_t j = 0; j < v.entries.size(); ++j) {
    require_grid(atlas.patch_grid(), v.entries[j].grid, "glue_G");
    for (const auto& pt : atlas.patches()[j]) {
      out.values[pt.global] += pt.overlap_sum * v.entries[j].values[pt.local];
    }
  }
  return out;
}

double patch_norm(const Atlas& atlas, const GridFunction& u, const Weight& phi) {
  require_grid(atlas.grid(), u.grid, "patch_norm");
  double acc = 0.0;
  GridFunction p(atlas.patch_grid());
  for (const auto& patch : atlas.patches()) {
    std::fill(p.values.begin(), p.values.end(), cplx{});
    for (const auto& pt : patch) p.values[pt.local] = pt.h * u.values[pt.global];
    const double nj = hphi_norm(p, phi);
    acc += nj * nj;
  }
  return std::sqrt(acc);
}

NormRatios patch_norm_equivalence(const Atlas& atlas, const Atlas& reference, const Weight& phi,
                                  int trials, int kmax, Rng& rng) {
  require_grid(atlas.grid(), reference.grid(), "patch_norm_equivalence");
  if (trials < 1) throw std::invalid_argument("patch_norm_equivalence: trials must be >= 1");
  NormRatios out;
  out.trials = trials;
  out.c_low = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Rng stream = rng.stream(static_cast<std::uint64_t>(t));
    const GridFunction u = band_limited_trial(atlas.grid(), kmax, stream);
    const double r = patch_norm(atlas, u, phi) / patch_norm(reference, u, phi);
    out.c_low = std::min(out.c_low, r);
    out.c_high = std::max(out.c_high, r);
  }
  return out;
}

double multiplier_bound(const GridFunction& chi, const Weight& phi, int trials, int kmax, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("multiplier_bound: trials must be >= 1");
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng stream = rng.stream(static_cast<std::uint64_t>(t));
    GridFunction u = band_limited_trial(chi.grid, kmax, stream);
    const double base = hphi_norm(u, phi);
    for (std::size_t f = 0; f < u.values.size(); ++f) u.values[f] *= chi.values[f];
    worst = std::max(worst, hphi_norm(u, phi) / base);
  }
  return worst;
}

L2Sandwich l2_sandwich(const Atlas& atlas) {
  std::vector<double> sq(atlas.grid().size(), 0.0);
  for (const auto& patch : atlas.patches()) {
    for (const auto& pt : patch) sq[pt.global] += pt.h * pt.h;
  }
  const auto [lo, hi] = std::minmax_element(sq.begin(), sq.end());
  return L2Sandwich{std::sqrt(*lo), std::sqrt(*hi)};
}

}  // namespace sobscale
