// Acceptance gate: one pass/fail line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sobscale/atlas.hpp"
#include "sobscale/cli.hpp"
#include "sobscale/interpolation.hpp"
#include "sobscale/pdo.hpp"
#include "sobscale/rng.hpp"
#include "sobscale/spectral.hpp"
#include "sobscale/weights.hpp"

using namespace sobscale;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Parametric {
  double s;
  double r;
  Weight weight() const { return r == 0.0 ? Weight::power(s) : Weight::power_log(s, r); }
};

std::vector<Parametric> parametric() {
  std::vector<Parametric> out;
  for (double s : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    for (double r : {-1.0, 0.0, 1.0}) out.push_back({s, r});
  }
  return out;
}

std::vector<Weight> parametric_weights() {
  std::vector<Weight> out;
  for (const auto& p : parametric()) out.push_back(p.weight());
  return out;
}

const std::vector<Weight> kNormFamily{Weight::power(0.0), Weight::power(1.0), Weight::power_log(1.0, 1.0)};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// exp of max over y in [0, ln a] of max(|s y|, |s y + r log(1 + y)|)
double analytic_ro_constant(double s, double r, double a) {
  double best = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double y = std::log(a) * i / 20000.0;
    best = std::max({best, std::abs(s * y), std::abs(s * y + r * std::log1p(y))});
  }
  return std::exp(best);
}

HilbertPair random_pair(int d, Rng& rng) {
  const MatrixC g0 = random_spd(d, 0.5, 2.0, rng);
  const MatrixC root = hermitian_sqrt(g0);
  MatrixC g1 = root * random_spd(d, 1.0, 50.0, rng) * root;
  g1 = 0.5 * (g1 + g1.adjoint());
  return HilbertPair(g0, g1);
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

double interval_change(const std::vector<NormRatios>& v) {
  double s = 0.0;
  for (const auto& x : v) {
    s = std::max({s, std::abs(x.c_low / v[0].c_low - 1.0), std::abs(x.c_high / v[0].c_high - 1.0)});
  }
  return s;
}

Outcome ro_calculus() {
  IndexSampling is;
  is.t_max = 1e8;
  RoSampling rs;
  rs.a = 2.0;
  rs.t_max = 1e100;
  double index_err = 0.0;
  double c_err = 0.0;
  for (const auto& p : parametric()) {
    const auto m = matuszewska_indices(p.weight(), is);
    index_err = std::max({index_err, std::abs(m.sigma0 - p.s), std::abs(m.sigma1 - p.s)});
    const auto c = certify_ro(p.weight(), rs);
    c_err = std::max(c_err, std::abs(c.c / analytic_ro_constant(p.s, p.r, 2.0) - 1.0));
  }
  return {index_err <= 2e-3 && c_err <= 1e-2,
          "index error " + fmt("%.2e", index_err) + " (<= 2e-3), c error " + fmt("%.2e", c_err) + " (<= 1e-2)"};
}

Outcome phi_psi_roundtrip() {
  double worst = 0.0;
  for (const Weight& w : parametric_weights()) {
    const auto m = matuszewska_indices(w);
    const double s0 = m.sigma0 - 1.0;
    const double s1 = m.sigma1 + 1.0;
    const Weight back = phi_from_psi(psi_from_phi(w, s0, s1), s0, s1);
    for (int i = 0; i < 400; ++i) {
      const double t = std::pow(1e6, i / 399.0);
      worst = std::max(worst, std::abs(back(t) / w(t) - 1.0));
    }
  }
  return {worst <= 1e-12, "max relative error " + fmt("%.2e", worst) + " (<= 1e-12)"};
}

Outcome interpolation() {
  Rng base(3);
  double excess = -1.0;
  for (int t = 0; t < 200; ++t) {
    Rng s = base.stream(static_cast<std::uint64_t>(t));
    const auto h = random_pair(5 + static_cast<int>(s.uniform() * 6), s);
    const auto k = random_pair(5 + static_cast<int>(s.uniform() * 6), s);
    const MatrixC op = random_matrix(k.dim(), h.dim(), s);
    const double theta = s.uniform();
    const auto b = interpolation_bound(h, k, op, InterpParameter::power_theta(theta));
    excess = std::max(excess, b.r_psi - std::pow(b.r0, 1 - theta) * std::pow(b.r1, theta));
  }
  double reit = 0.0;
  double endpoint = 0.0;
  for (int t = 0; t < 50; ++t) {
    Rng s = base.stream(1000 + static_cast<std::uint64_t>(t));
    const auto pair = random_pair(5 + static_cast<int>(s.uniform() * 6), s);
    const auto op = generating_operator(pair);
    const auto lambda = InterpParameter::power_theta(s.uniform(0.0, 0.4));
    const auto eta = InterpParameter::power_theta(s.uniform(0.6, 1.0));
    const auto psi = t % 2 ? psi_from_phi(Weight::power_log(0.5, 1.0), 0.0, 1.0)
                           : InterpParameter::power_theta(s.uniform());
    reit = std::max(reit, reiteration(op, lambda, eta, psi, 3, s).max_relative_gap);
    const VectorC u = random_vector(pair.dim(), s);
    endpoint = std::max({endpoint,
                         std::abs(interp_norm(op, InterpParameter::power_theta(0.0), u) / gram_norm(pair.g0(), u) - 1),
                         std::abs(interp_norm(op, InterpParameter::power_theta(1.0), u) / gram_norm(pair.g1(), u) - 1)});
  }
  return {excess <= 1e-10 && reit <= 1e-10 && endpoint <= 1e-12,
          "bound excess " + fmt("%.2e", excess) + " over 200 trials, reiteration " + fmt("%.2e", reit) +
              ", endpoints " + fmt("%.2e", endpoint)};
}

Outcome direct_sums() {
  Rng rng(4);
  const auto pair = random_pair(6, rng);
  const auto psi = psi_from_phi(Weight::power_log(0.5, -1.0), 0.0, 1.0);
  double worst = 0.0;
  for (int k : {1, 3, 16}) worst = std::max(worst, direct_sum_interp(pair, k, psi, 10, rng).max_relative_gap);
  return {worst <= 1e-10, "max relative gap " + fmt("%.2e", worst) + " for K in {1, 3, 16}"};
}

Outcome localization() {
  Rng rng(5);
  double glue = 0.0;
  double defect = 0.0;
  bool order_ok = true;
  std::string orders;
  for (const Model& m : {Model::line(32.0, 256), Model::cylinder(16.0, 16.0, 64)}) {
    const Atlas a = build_atlas(m, 4.0, 4.0);
    for (int t = 0; t < 100; ++t) {
      const auto u = random_grid_function(a.grid(), rng);
      const auto g = glue_G(a, localize_F(a, u, Weight::power(0.0)).patches);
      for (std::size_t i = 0; i < u.values.size(); ++i) glue = std::max(glue, std::abs(g.values[i] - u.values[i]));
    }
    defect = std::max(defect, a.partition_defect());
    order_ok = order_ok && a.cover_order() <= (m.dim() == 1 ? 3 : 9);
    orders += (orders.empty() ? "" : "/") + std::to_string(a.cover_order());
  }
  return {glue <= 1e-10 && defect <= 1e-10 && order_ok,
          "G F error " + fmt("%.2e", glue) + ", partition defect " + fmt("%.2e", defect) + ", N0 " + orders};
}

Outcome norm_equivalence() {
  double worst_global = 0.0;
  double worst_pair = 0.0;
  for (std::size_t i = 0; i < kNormFamily.size(); ++i) {
    std::vector<NormRatios> global;
    std::vector<NormRatios> pair;
    for (int N : {256, 512}) {
      const Model m = Model::line(32.0, N);
      const Atlas coarse = build_atlas(m, 4.0, 4.0);
      Rng r1(60 + i);
      Rng r2(70 + i);
      global.push_back(patch_norm_equivalence(coarse, build_global_atlas(m), kNormFamily[i], 100, 24, r1));
      pair.push_back(patch_norm_equivalence(coarse, build_atlas(m, 2.0, 2.0), kNormFamily[i], 100, 24, r2));
    }
    worst_global = std::max(worst_global, interval_change(global));
    worst_pair = std::max(worst_pair, interval_change(pair));
  }
  return {worst_global < 0.2 && worst_pair < 0.2,
          "interval change " + fmt("%.2e", worst_global) + " vs Fourier, " + fmt("%.2e", worst_pair) +
              " between atlases (< 0.2)"};
}

Outcome pdo_mapping() {
  const Grid g = Grid::make(1, 128, 2 * M_PI);
  double worst = 0.0;
  for (int m = -2; m <= 2; ++m) {
    const PdoOperator op(Symbol::multiplier(Weight::power(m), m), g);
    for (const Weight& w : parametric_weights()) {
      Rng rng(7);
      worst = std::max(worst, std::abs(mapping_norm(op, w, rng).norm - 1.0));
    }
  }
  double var = 0.0;
  for (const Weight& w : kNormFamily) {
    std::vector<double> norms;
    for (int N : {128, 256, 512}) {
      const PdoOperator op(Symbol::general("jb(xi) * (1 + 0.5 * sin(x))", 1.0, 1), Grid::make(1, N, 2 * M_PI));
      Rng rng(8);
      norms.push_back(mapping_norm(op, w, rng, 1000).norm);
    }
    var = std::max(var, spread(norms));
  }
  return {worst <= 1e-10 && var < 0.2,
          "multiplier error " + fmt("%.2e", worst) + " (<= 1e-10), variable-symbol spread " + fmt("%.2e", var)};
}

Outcome embedding() {
  const Grid g = Grid::make(1, 256, 2 * M_PI);
  int violations = 0;
  for (const Weight& w : parametric_weights()) {
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
      const auto r = sup_bound_check(random_grid_function(g, rng), w);
      if (r.lhs > r.rhs) ++violations;
    }
  }
  bool flips = true;
  for (double s : {0.0, 0.25, 0.4, 0.49, 0.4999, 0.5, 0.5001, 0.51, 0.6, 1.0, 2.0}) {
    flips = flips && embedding_constant(Weight::power(s), 1, 0).diverged == (s <= 0.5);
  }
  return {violations == 0 && flips,
          std::to_string(violations) + " sup-bound violations, divergence flag " +
              (flips ? "flips at s = 1/2" : "misplaced")};
}

Outcome ascale() {
  const Grid g0 = Grid::make(1, 64, 2 * M_PI);
  const auto flat = build_ascale(g0, std::vector<double>(64, 0.0));
  double worst = 0.0;
  for (const Weight& w : parametric_weights()) {
    Rng rng(10);
    for (int t = 0; t < 20; ++t) {
      const auto u = random_grid_function(g0, rng);
      worst = std::max(worst, std::abs(ascale_norm(flat, w, u) / hphi_norm(u, w) - 1.0));
    }
  }
  double change = 0.0;
  double lo = 1e300;
  double hi = 0.0;
  for (const Weight& w : kNormFamily) {
    std::vector<NormRatios> r;
    for (int N : {64, 128, 256}) {
      const Grid g = Grid::make(1, N, 2 * M_PI);
      std::vector<double> v(static_cast<std::size_t>(N));
      for (int i = 0; i < N; ++i) v[static_cast<std::size_t>(i)] = 0.3 * std::sin(i * g.spacing(0));
      Rng rng(11);
      const auto iv = ascale_equivalence(build_ascale(g, v), w, 50, 10, rng);
      r.push_back({iv.c_low, iv.c_high, iv.trials});
      lo = std::min(lo, iv.c_low);
      hi = std::max(hi, iv.c_high);
    }
    change = std::max(change, interval_change(r));
  }
  return {worst <= 1e-10 && lo >= 0.2 && hi <= 5.0 && change < 0.2,
          "v = 0 gap " + fmt("%.2e", worst) + ", interval [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) +
              "], change " + fmt("%.2e", change)};
}

Outcome duality() {
  const Grid g = Grid::make(1, 256, 2 * M_PI);
  int violations = 0;
  double gap = 0.0;
  for (const Weight& w : parametric_weights()) {
    const Weight dual = Weight::reciprocal(w);
    const auto sw = spectral_weights(g, w);
    Rng rng(12);
    for (int t = 0; t < 50; ++t) {
      const auto u = random_grid_function(g, rng);
      const auto v = random_grid_function(g, rng);
      if (std::abs(duality_pair(u, v)) > hphi_norm(u, w) * hphi_norm(v, dual)) ++violations;
      Spectrum s = transform(u);
      for (std::size_t k = 0; k < sw.size(); ++k) s.coefficients[k] *= sw[k] * sw[k];
      const auto vmax = inverse_transform(s);
      gap = std::max(gap, std::abs(std::abs(duality_pair(u, vmax)) / (hphi_norm(u, w) * hphi_norm(vmax, dual)) - 1));
    }
  }
  return {violations == 0 && gap <= 1e-10,
          std::to_string(violations) + " violations, maximizer gap " + fmt("%.2e", gap) + " (<= 1e-10)"};
}

Outcome cli_determinism() {
  std::string first;
  std::string second;
  for (std::string* out : {&first, &second}) {
    std::ostringstream ss;
    cli::write_report(ss, cli::run_suite("all", Json::object(), 7));
    *out = ss.str();
  }
  return {first == second && !first.empty(), first == second ? "two runs of `all` byte-identical" : "reports differ"};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  struct Criterion {
    int id;
    const char* name;
    double budget;  // seconds, 0 when the criterion has none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "ro-calculus", 5.0, ro_calculus},
      {2, "phi-psi round trip", 0.0, phi_psi_roundtrip},
      {3, "interpolation", 10.0, interpolation},
      {4, "l2 interpolation", 0.0, direct_sums},
      {5, "localization", 0.0, localization},
      {6, "norm equivalence", 0.0, norm_equivalence},
      {7, "pdo mapping", 0.0, pdo_mapping},
      {8, "embedding", 0.0, embedding},
      {9, "a-scale", 30.0, ascale},
      {10, "duality", 0.0, duality},
      // the budget covers both runs
      {11, "cli determinism", 240.0, cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    bool pass = o.pass;
    if (c.budget > 0.0 && secs >= c.budget) {
      pass = false;
      o.detail += ", over the time budget";
    }
    if (!pass) ++failed;
    std::printf("criterion %2d %s  %-18s %s [%.2f s]\n", c.id, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
