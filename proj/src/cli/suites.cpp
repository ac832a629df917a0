#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "sobscale/cli.hpp"
#include "sobscale/errors.hpp"
#include "sobscale/rng.hpp"
#include "sobscale/simd/kernels.hpp"
#include "suite_support.hpp"

namespace sobscale::cli {

using detail::Records;

namespace {

// Weights

struct WeightEntry {
  Weight phi;
  Json spec;
  std::optional<std::array<double, 2>> indices;
  std::optional<double> ro_c;
};

std::vector<WeightEntry> weight_entries(const Json& section) {
  std::vector<WeightEntry> out;
  if (!section.contains("phis")) {
    for (const auto& p : detail::parametric_family()) {
      WeightEntry e{p.weight(), to_json(p.weight()), std::array<double, 2>{p.s, p.s},
                    detail::analytic_ro_constant(p.s, p.r, 2.0)};
      out.push_back(std::move(e));
    }
    return out;
  }
  for (const auto& j : section.at("phis")) {
    const bool wrapped = j.is_object() && j.contains("weight");
    WeightEntry e{detail::parse_weight(wrapped ? j.at("weight") : j), wrapped ? j.at("weight") : j, {}, {}};
    if (wrapped && j.contains("indices")) e.indices = std::array<double, 2>{j.at("indices").at(0), j.at("indices").at(1)};
    if (wrapped && j.contains("ro_c")) e.ro_c = j.at("ro_c").get<double>();
    out.push_back(std::move(e));
  }
  return out;
}

void weights_suite(const Json& sec, std::uint64_t, Records& out) {
  RoSampling ro;
  ro.a = sec.value("ro_a", 2.0);
  ro.t_max = number_from(sec.value("ro_t_max", Json(1e100)));
  IndexSampling idx;
  idx.t_max = sec.value("t_max", 1e8);
  const double index_tol = sec.value("index_tolerance", 2e-3);
  const double ro_tol = sec.value("ro_tolerance", 1e-2);
  const double roundtrip_tol = sec.value("roundtrip_tolerance", 1e-12);
  const auto entries = weight_entries(sec);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string id = detail::index_tag(i);

    const auto cert = certify_ro(e.phi, ro);
    bool ok = cert.positive && std::isfinite(cert.c) && cert.max_violation <= 1e-12;
    Json bound{{"max_violation", 1e-12}};
    if (e.ro_c) {
      ok = ok && std::abs(cert.c / *e.ro_c - 1.0) <= ro_tol;
      bound["c"] = *e.ro_c;
      bound["relative"] = ro_tol;
    }
    out.add({"weights/ro/" + id, "ro-sandwich", {{"phi", e.spec}, {"a", ro.a}, {"t_max", number(ro.t_max)}},
             to_json(cert), bound, ok});

    const auto m = matuszewska_indices(e.phi, idx);
    ok = m.stable && m.sigma0 <= m.sigma1 + 1e-12;
    bound = Json{{"stable", true}};
    if (e.indices) {
      ok = ok && std::abs(m.sigma0 - (*e.indices)[0]) <= index_tol &&
           std::abs(m.sigma1 - (*e.indices)[1]) <= index_tol;
      bound["sigma0"] = (*e.indices)[0];
      bound["sigma1"] = (*e.indices)[1];
      bound["absolute"] = index_tol;
    }
    out.add({"weights/indices/" + id, "matuszewska-indices", {{"phi", e.spec}, {"t_max", idx.t_max}},
             to_json(m), bound, ok});

    const double s0 = m.sigma0 - 1.0;
    const double s1 = m.sigma1 + 1.0;
    const auto psi = psi_from_phi(e.phi, s0, s1);
    const Weight back = phi_from_psi(psi, s0, s1);
    double worst = 0.0;
    for (double t : detail::log_samples(1.0, 1e6, 200)) {
      worst = std::max(worst, std::abs(back(t) / e.phi(t) - 1.0));
    }
    out.add({"weights/phi_psi/" + id, "phi-psi-correspondence",
             {{"phi", e.spec}, {"s0", s0}, {"s1", s1}, {"t", {1.0, 1e6}}},
             {{"max_relative_error", number(worst)}}, {{"max_relative_error", roundtrip_tol}},
             worst <= roundtrip_tol});

    const auto pc = check_pseudoconcave(psi);
    out.add({"weights/pseudoconcave/" + id, "pseudoconcave-parameter", {{"phi", e.spec}, {"s0", s0}, {"s1", s1}},
             {{"worst_excess", number(pc.worst_excess)}, {"tau", pc.tau}, {"lambda", pc.lambda}},
             {{"worst_excess", 0.0}}, pc.ok});
  }
}

// Fourier-side norms

void norms_suite(const Json& sec, std::uint64_t seed, Records& out) {
  const Grid g = detail::grid_setting(sec, 1, 256, 2 * M_PI);
  const int trials = sec.value("trials", 100);
  const int duality_trials = sec.value("duality_trials", 50);
  const auto phis = detail::weight_list(sec, "phis", detail::norm_family());
  Rng base(seed, 2);

  {
    Rng rng = base.stream(0);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto u = random_grid_function(g, rng);
      worst = std::max(worst, std::abs(hphi_norm(u, Weight::power(0.0)) / l2_norm(u) - 1.0));
    }
    out.add({"norms/parseval/00", "plumbing", {{"grid", to_json(g)}, {"trials", trials}},
             {{"max_relative_gap", worst}}, {{"max_relative_gap", 1e-12}}, worst <= 1e-12});
  }

  for (std::size_t i = 0; i < phis.size(); ++i) {
    const Weight& phi = phis[i].first;
    const Json& spec = phis[i].second;
    const std::string id = detail::index_tag(i);
    const Weight dual = Weight::reciprocal(phi);

    Rng rng = base.stream(100 + i);
    int violations = 0;
    double worst_ratio = 0.0;
    double worst_equality = 0.0;
    for (int t = 0; t < duality_trials; ++t) {
      const auto u = random_grid_function(g, rng);
      const auto v = random_grid_function(g, rng);
      const double bound = hphi_norm(u, phi) * hphi_norm(v, dual);
      const double pair = std::abs(duality_pair(u, v));
      worst_ratio = std::max(worst_ratio, pair / bound);
      if (pair > bound * (1 + 1e-12)) ++violations;
      Spectrum s = transform(u);
      const auto w = spectral_weights(g, phi);
      for (std::size_t k = 0; k < w.size(); ++k) s.coefficients[k] *= w[k] * w[k];
      const auto vmax = inverse_transform(s);
      const double attained = std::abs(duality_pair(u, vmax)) / (hphi_norm(u, phi) * hphi_norm(vmax, dual));
      worst_equality = std::max(worst_equality, std::abs(attained - 1.0));
    }
    out.add({"norms/duality/" + id, "duality-pairing",
             {{"phi", spec}, {"grid", to_json(g)}, {"trials", duality_trials}},
             {{"violations", violations}, {"max_ratio", worst_ratio}, {"maximizer_gap", worst_equality}},
             {{"violations", 0}, {"maximizer_gap", 1e-10}}, violations == 0 && worst_equality <= 1e-10});

    Rng srng = base.stream(200 + i);
    violations = 0;
    double worst_sup = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto r = sup_bound_check(random_grid_function(g, srng), phi);
      worst_sup = std::max(worst_sup, r.lhs / r.rhs);
      if (r.lhs > r.rhs * (1 + 1e-12)) ++violations;
    }
    out.add({"norms/sup_bound/" + id, "sup-embedding", {{"phi", spec}, {"grid", to_json(g)}, {"trials", trials}},
             {{"violations", violations}, {"max_ratio", worst_sup}}, {{"violations", 0}}, violations == 0});

    Rng brng = base.stream(300 + i);
    Rng brng2 = brng;
    const Grid fine = Grid::make(g.n, 2 * g.N, g.L);
    const int kmax = std::min(16, g.N / 2 - 1);
    const double coarse = hphi_norm(band_limited_trial(g, kmax, brng), phi);
    const double refined = hphi_norm(band_limited_trial(fine, kmax, brng2), phi);
    const double gap = std::abs(refined / coarse - 1.0);
    out.add({"norms/refinement/" + id, "sobolev-norm",
             {{"phi", spec}, {"N", {g.N, fine.N}}, {"kmax", kmax}},
             {{"coarse", coarse}, {"refined", refined}, {"relative_gap", gap}}, {{"relative_gap", 1e-10}},
             gap <= 1e-10});
  }

  const double delta = sec.value("threshold_offset", 1e-4);
  Json flags = Json::array();
  bool ok = true;
  for (double s : {0.5 - delta, 0.5, 0.5 + delta}) {
    const auto e = embedding_constant(Weight::power(s), 1, 0);
    flags.push_back({{"s", s}, {"diverged", e.diverged}, {"value", number(e.value)}});
    ok = ok && (e.diverged == (s <= 0.5));
  }
  out.add({"norms/embedding_threshold/00", "embedding-integral", {{"n", 1}, {"k", 0}, {"phi", "t^s"}},
           {{"flags", flags}}, {{"threshold", 0.5}}, ok});
}

// Abstract interpolation

void interp_suite(const Json& sec, std::uint64_t seed, Records& out) {
  const int trials = sec.value("trials", 200);
  const int reiteration_trials = sec.value("reiteration_trials", 50);
  const int dmin = sec.value("dim_min", 5);
  const int dmax = sec.value("dim_max", 10);
  if (dmin < 1 || dmax < dmin) throw UsageError("interp: need 1 <= dim_min <= dim_max");
  Rng base(seed, 3);
  auto dim = [&](Rng& r) { return dmin + static_cast<int>(r.uniform() * (dmax - dmin + 1)); };

  {
    int violations = 0;
    double worst = -1.0;
    for (int t = 0; t < trials; ++t) {
      Rng s = base.stream(static_cast<std::uint64_t>(t));
      const auto h = detail::random_pair(dim(s), s);
      const auto k = detail::random_pair(dim(s), s);
      const MatrixC op = random_matrix(k.dim(), h.dim(), s);
      const auto b = interpolation_bound(h, k, op, InterpParameter::power_theta(s.uniform()));
      worst = std::max(worst, b.r_psi - b.bound);
      if (!(b.r_psi <= b.bound + 1e-10)) ++violations;
    }
    out.add({"interp/operator_bound/00", "interpolation-inequality",
             {{"trials", trials}, {"dims", {dmin, dmax}}, {"parameter", "tau^theta"}},
             {{"violations", violations}, {"max_excess", worst}}, {{"violations", 0}, {"slack", 1e-10}},
             violations == 0});
  }
  {
    double worst = 0.0;
    double endpoint = 0.0;
    for (int t = 0; t < reiteration_trials; ++t) {
      Rng s = base.stream(10000 + static_cast<std::uint64_t>(t));
      const auto pair = detail::random_pair(dim(s), s);
      const auto op = generating_operator(pair);
      const auto lambda = InterpParameter::power_theta(s.uniform(0.0, 0.4));
      const auto eta = InterpParameter::power_theta(s.uniform(0.6, 1.0));
      const auto psi = (t % 2 == 0) ? InterpParameter::power_theta(s.uniform())
                                    : psi_from_phi(Weight::power_log(0.5, 1.0), 0.0, 1.0);
      worst = std::max(worst, reiteration(op, lambda, eta, psi, 3, s).max_relative_gap);
      const VectorC u = random_vector(pair.dim(), s);
      const double n0 = gram_norm(pair.g0(), u);
      const double n1 = gram_norm(pair.g1(), u);
      endpoint = std::max({endpoint, std::abs(interp_norm(op, InterpParameter::power_theta(0.0), u) / n0 - 1.0),
                           std::abs(interp_norm(op, InterpParameter::power_theta(1.0), u) / n1 - 1.0)});
    }
    out.add({"interp/reiteration/00", "reiteration", {{"trials", reiteration_trials}},
             {{"max_relative_gap", worst}}, {{"max_relative_gap", 1e-10}}, worst <= 1e-10});
    out.add({"interp/endpoints/00", "interpolation-space", {{"trials", reiteration_trials}},
             {{"max_relative_gap", endpoint}}, {{"max_relative_gap", 1e-12}}, endpoint <= 1e-12});
  }
  {
    const std::vector<int> copies = sec.value("copies", std::vector<int>{1, 3, 16});
    Rng s = base.stream(20000);
    const auto pair = detail::random_pair(dmin, s);
    const auto psi = psi_from_phi(Weight::power_log(0.5, -1.0), 0.0, 1.0);
    for (std::size_t i = 0; i < copies.size(); ++i) {
      if (copies[i] < 1) throw UsageError("interp: copies must be positive");
      const auto r = direct_sum_interp(pair, copies[i], psi, 10, s);
      out.add({"interp/direct_sum/" + detail::index_tag(i), "l2-interpolation",
               {{"copies", copies[i]}, {"dim", pair.dim()}, {"trials", r.trials}},
               {{"max_relative_gap", r.max_relative_gap}}, {{"max_relative_gap", 1e-10}},
               r.max_relative_gap <= 1e-10});
    }
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      Rng s = base.stream(30000 + static_cast<std::uint64_t>(t));
      const auto pair = detail::random_pair(dim(s), s);
      const auto op = generating_operator(pair);
      const auto dual_op = generating_operator(dual_pair(pair));
      const auto psi = psi_from_phi(Weight::power_log(0.5, 1.0), 0.0, 1.0);
      const VectorC f = random_vector(pair.dim(), s);
      const double a = dual_norm(op, psi, f);
      const double b = interp_norm(dual_op, InterpParameter::dual(psi), f);
      worst = std::max(worst, std::abs(a / b - 1.0));
    }
    out.add({"interp/dual/00", "interpolation-duality", {{"trials", 20}}, {{"max_relative_gap", worst}},
             {{"max_relative_gap", 1e-9}}, worst <= 1e-9});
  }
}

// Atlas

struct AtlasSpec {
  Model model;
  double epsilon;
  double spacing;
  Json spec;
};

std::vector<AtlasSpec> atlas_specs(const Json& sec) {
  if (!sec.contains("atlases")) {
    return {{Model::line(32.0, 256), 4.0, 4.0, {{"model", to_json(Model::line(32.0, 256))}, {"epsilon", 4.0}, {"spacing", 4.0}}},
            {Model::cylinder(16.0, 16.0, 64), 4.0, 4.0,
             {{"model", to_json(Model::cylinder(16.0, 16.0, 64))}, {"epsilon", 4.0}, {"spacing", 4.0}}}};
  }
  std::vector<AtlasSpec> out;
  for (const auto& j : sec.at("atlases")) {
    out.push_back({model_from_json(j.at("model")), j.at("epsilon").get<double>(), j.at("spacing").get<double>(), j});
  }
  return out;
}

void atlas_suite(const Json& sec, std::uint64_t seed, Records& out) {
  const int trials = sec.value("trials", 100);
  const int order = sec.value("transition_order", 4);
  Rng base(seed, 4);
  const auto specs = atlas_specs(sec);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& sp = specs[i];
    const std::string id = detail::index_tag(i);
    const Atlas a = build_atlas(sp.model, sp.epsilon, sp.spacing);

    Rng rng = base.stream(i);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto u = random_grid_function(a.grid(), rng);
      const auto g = glue_G(a, localize_F(a, u, Weight::power(0.0)).patches);
      for (std::size_t k = 0; k < u.values.size(); ++k) worst = std::max(worst, std::abs(g.values[k] - u.values[k]));
    }
    out.add({"atlas/glue/" + id, "localization-gluing", {{"atlas", sp.spec}, {"trials", trials}},
             {{"max_abs_error", worst}}, {{"max_abs_error", 1e-10}}, worst <= 1e-10});

    const double defect = a.partition_defect();
    out.add({"atlas/partition/" + id, "partition-of-unity", {{"atlas", sp.spec}},
             {{"max_defect", defect}, {"derivative_bounds", a.derivative_bounds()}}, {{"max_defect", 1e-10}},
             defect <= 1e-10});

    const int limit = sp.model.dim() == 1 ? 3 : 9;
    out.add({"atlas/cover_order/" + id, "finite-cover-order", {{"atlas", sp.spec}},
             {{"cover_order", a.cover_order()}}, {{"cover_order", limit}}, a.cover_order() <= limit});

    const auto cert = certify_bounded_geometry(a, order);
    bool finite = true;
    for (double c : cert.max_by_order) finite = finite && std::isfinite(c);
    out.add({"atlas/transitions/" + id, "bounded-transitions", {{"atlas", sp.spec}, {"order", order}},
             {{"pairs", cert.pairs_checked},
              {"max_by_order", cert.max_by_order},
              {"jacobian_identity_error", cert.jacobian_identity_error}},
             {{"finite", true}}, finite && cert.pairs_checked > 0});

    const auto sandwich = l2_sandwich(a);
    const double floor = 1.0 / std::sqrt(static_cast<double>(a.cover_order()));
    out.add({"atlas/l2_sandwich/" + id, "patch-norm", {{"atlas", sp.spec}},
             {{"lower", sandwich.lower}, {"upper", sandwich.upper}}, {{"lower", floor}, {"upper", 1.0}},
             sandwich.lower >= floor - 1e-12 && sandwich.upper <= 1.0 + 1e-12});
  }

  // refinement stability of the patch norm against the Fourier norm and between two atlases
  const double period = sec.value("equivalence_period", 32.0);
  const std::vector<int> sizes = sec.value("equivalence_N", std::vector<int>{256, 512});
  const int eq_trials = sec.value("equivalence_trials", 100);
  const int kmax = sec.value("equivalence_kmax", 24);
  const double stability = sec.value("stability", 0.2);
  const auto phis = detail::weight_list(sec, "phis", detail::norm_family());
  if (sizes.size() < 2) throw UsageError("atlas: equivalence_N needs two sizes");
  for (std::size_t i = 0; i < phis.size(); ++i) {
    Json global_rows = Json::array();
    Json pair_rows = Json::array();
    std::vector<NormRatios> vs_global;
    std::vector<NormRatios> vs_atlas;
    for (int N : sizes) {
      const Model m = Model::line(period, N);
      const Atlas coarse = build_atlas(m, 4.0, 4.0);
      const Atlas fine = build_atlas(m, 2.0, 2.0);
      Rng r1 = base.stream(1000 + i);
      Rng r2 = base.stream(2000 + i);
      vs_global.push_back(patch_norm_equivalence(coarse, build_global_atlas(m), phis[i].first, eq_trials, kmax, r1));
      vs_atlas.push_back(patch_norm_equivalence(coarse, fine, phis[i].first, eq_trials, kmax, r2));
      global_rows.push_back({{"N", N}, {"c_low", vs_global.back().c_low}, {"c_high", vs_global.back().c_high}});
      pair_rows.push_back({{"N", N}, {"c_low", vs_atlas.back().c_low}, {"c_high", vs_atlas.back().c_high}});
    }
    auto spread = [](const std::vector<NormRatios>& v) {
      double s = 0.0;
      for (std::size_t k = 1; k < v.size(); ++k) {
        s = std::max({s, std::abs(v[k].c_low / v[0].c_low - 1.0), std::abs(v[k].c_high / v[0].c_high - 1.0)});
      }
      return s;
    };
    const double sg = spread(vs_global);
    const double sa = spread(vs_atlas);
    const Json inputs{{"phi", phis[i].second}, {"period", period}, {"N", sizes}, {"trials", eq_trials}, {"kmax", kmax}};
    out.add({"atlas/equivalence/" + detail::index_tag(i), "patch-norm-equivalence", inputs,
             {{"intervals", global_rows}, {"spread", sg}}, {{"spread", stability}}, sg < stability});
    out.add({"atlas/two_atlas/" + detail::index_tag(i), "trivialization-independence", inputs,
             {{"intervals", pair_rows}, {"spread", sa}}, {{"spread", stability}}, sa < stability});
  }
}

// Pseudo-differential operators

void pdo_suite(const Json& sec, std::uint64_t seed, Records& out) {
  const int N = sec.value("N", 128);
  const Grid g = Grid::make(1, N, 2 * M_PI);
  Rng base(seed, 5);
  const auto family = detail::weight_list(sec, "phis", detail::parametric_weights());
  const std::vector<int> orders = sec.value("orders", std::vector<int>{-2, -1, 0, 1, 2});
  {
    double worst = 0.0;
    bool converged = true;
    int count = 0;
    for (int m : orders) {
      const PdoOperator op(Symbol::multiplier(Weight::power(m), m), g);
      for (std::size_t i = 0; i < family.size(); ++i) {
        Rng rng = base.stream(static_cast<std::uint64_t>(100 * (m + 10)) + i);
        const auto r = mapping_norm(op, family[i].first, rng);
        worst = std::max(worst, std::abs(r.norm - 1.0));
        converged = converged && r.converged;
        ++count;
      }
    }
    out.add({"pdo/mapping_multiplier/00", "pdo-mapping", {{"orders", orders}, {"weights", count}, {"N", N}},
             {{"max_abs_error", worst}, {"converged", converged}}, {{"max_abs_error", 1e-10}},
             worst <= 1e-10 && converged});
  }
  {
    const std::string expr = sec.value("variable_symbol", std::string("jb(xi) * (1 + 0.5 * sin(x))"));
    const double order = sec.value("variable_order", 1.0);
    const std::vector<int> sizes = sec.value("variable_N", std::vector<int>{128, 256, 512});
    const auto phis = detail::weight_list(sec, "variable_phis", detail::norm_family());
    for (std::size_t i = 0; i < phis.size(); ++i) {
      std::vector<double> norms;
      bool converged = true;
      for (int n : sizes) {
        const PdoOperator op(detail::parse_symbol(Json{{"expr", expr}, {"order", order}}, 1), Grid::make(1, n, 2 * M_PI));
        Rng rng = base.stream(5000 + i);
        const auto r = mapping_norm(op, phis[i].first, rng, 1000, 1e-12);
        norms.push_back(r.norm);
        converged = converged && std::isfinite(r.norm);
      }
      const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
      const double spread = *hi / *lo - 1.0;
      out.add({"pdo/mapping_variable/" + detail::index_tag(i), "pdo-mapping",
               {{"symbol", expr}, {"order", order}, {"phi", phis[i].second}, {"N", sizes}},
               {{"norms", norms}, {"spread", spread}}, {{"spread", 0.2}}, converged && spread < 0.2});
    }
  }
  {
    Json symbols = sec.value("symbols", Json::array({Json{{"expr", "jb(xi)^1.5"}, {"order", 1.5}},
                                                     Json{{"expr", "(1 + 0.5 * sin(x)) * jb(xi)"}, {"order", 1.0}}}));
    const int k = sec.value("symbol_k", 2);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      const Symbol s = detail::parse_symbol(symbols[i], 1);
      const auto cert = certify_symbol(s, k);
      Json constants = Json::array();
      for (const auto& b : cert.bounds) {
        constants.push_back({{"alpha", b.alpha[0]}, {"beta", b.beta[0]}, {"C", b.constant}, {"growth", b.growth}});
      }
      out.add({"pdo/certify_symbol/" + detail::index_tag(i), "hormander-class", {{"symbol", symbols[i]}, {"k", k}},
               {{"bounds", constants}}, {{"growth", false}}, cert.ok});
    }
  }
  {
    Json cases = sec.value("elliptic", Json::array({Json{{"expr", "jb(xi)^2"}, {"order", 2.0}, {"R", 1.0}},
                                                    Json{{"expr", "(2 + sin(x)) * jb(xi)"}, {"order", 1.0}, {"R", 1.0}}}));
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const Symbol s = detail::parse_symbol(cases[i], 1);
      const double R = cases[i].value("R", 1.0);
      const auto e = certify_elliptic(s, R);
      out.add({"pdo/certify_elliptic/" + detail::index_tag(i), "ellipticity", {{"symbol", cases[i]}, {"R", R}},
               {{"constant", e.constant}, {"last_block_min", e.last_block_min}, {"previous_block_min", e.previous_block_min}},
               {{"constant", 1e-10}}, e.ok});
    }
  }
}

// A-scale

void ascale_suite(const Json& sec, std::uint64_t seed, Records& out) {
  Rng base(seed, 6);
  const int trials = sec.value("trials", 30);
  {
    const int N = sec.value("N", 64);
    const Grid g = Grid::make(1, N, 2 * M_PI);
    const auto gen = build_ascale(g, std::vector<double>(static_cast<std::size_t>(N), 0.0));
    const auto family = detail::weight_list(sec, "phis", detail::parametric_weights());
    double worst = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
      Rng rng = base.stream(i);
      for (int t = 0; t < trials; ++t) {
        const auto u = random_grid_function(g, rng);
        worst = std::max(worst, std::abs(ascale_norm(gen, family[i].first, u) / hphi_norm(u, family[i].first) - 1.0));
      }
    }
    out.add({"ascale/fourier/00", "a-scale", {{"N", N}, {"v", "0"}, {"weights", family.size()}, {"trials", trials}},
             {{"max_relative_gap", worst}}, {{"max_relative_gap", 1e-10}}, worst <= 1e-10});
  }
  {
    const std::string vexpr = sec.value("v", std::string("0.3 * sin(x)"));
    const auto v = SymbolExpr::parse(vexpr);
    if (v.min_dimension() > 1) throw UsageError("ascale: v must depend on x only");
    const std::vector<int> sizes = sec.value("equivalence_N", std::vector<int>{64, 128, 256});
    const int kmax = sec.value("kmax", 10);
    const auto phis = detail::weight_list(sec, "equivalence_phis", detail::norm_family());
    for (std::size_t i = 0; i < phis.size(); ++i) {
      Json rows = Json::array();
      std::vector<RatioInterval> r;
      for (int N : sizes) {
        const Grid g = Grid::make(1, N, 2 * M_PI);
        std::vector<double> vals(static_cast<std::size_t>(N));
        for (int k = 0; k < N; ++k) vals[static_cast<std::size_t>(k)] = v.eval({k * g.spacing(0), 0, 0}, {});
        const auto gen = build_ascale(g, vals);
        Rng rng = base.stream(1000 + i);
        r.push_back(ascale_equivalence(gen, phis[i].first, trials, kmax, rng));
        rows.push_back({{"N", N}, {"c_low", r.back().c_low}, {"c_high", r.back().c_high}, {"shift", gen.shift}});
      }
      double spread = 0.0;
      bool inside = true;
      for (const auto& x : r) {
        spread = std::max({spread, std::abs(x.c_low / r[0].c_low - 1.0), std::abs(x.c_high / r[0].c_high - 1.0)});
        inside = inside && x.c_low >= 0.2 && x.c_high <= 5.0;
      }
      out.add({"ascale/equivalence/" + detail::index_tag(i), "a-scale-equivalence",
               {{"v", vexpr}, {"phi", phis[i].second}, {"N", sizes}, {"trials", trials}, {"kmax", kmax}},
               {{"intervals", rows}, {"spread", spread}}, {{"interval", {0.2, 5.0}}, {"spread", 0.2}},
               inside && spread < 0.2});
    }
  }
}

using SuiteFn = void (*)(const Json&, std::uint64_t, Records&);

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> r{{"weights", weights_suite}, {"norms", norms_suite},
                                                {"interp", interp_suite},   {"atlas", atlas_suite},
                                                {"pdo", pdo_suite},         {"ascale", ascale_suite}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"weights", "norms", "interp", "atlas", "pdo", "ascale", "all"};
  return names;
}

int Report::failed() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return !r.pass; }));
}

Report run_suite(const std::string& suite, const Json& config, std::uint64_t seed) {
  if (!config.is_object()) throw UsageError("config must be a JSON object");
  std::vector<std::string> selected;
  if (suite == "all") {
    for (const auto& [name, fn] : registry()) selected.push_back(name);
  } else if (registry().count(suite)) {
    selected.push_back(suite);
  } else {
    throw UsageError("unknown suite \"" + suite + "\"");
  }
  Report report;
  report.suite = suite;
  report.seed = seed;
  report.environment = detail::environment_stamp();
  Records records;
  for (const auto& name : selected) {
    const Json section = config.value(name, Json::object());
    if (!section.is_object()) throw UsageError("config section \"" + name + "\" must be an object");
    try {
      registry().at(name)(section, seed, records);
    } catch (const UsageError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(name + ": malformed config: " + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(name + ": " + e.what());
    }
  }
  report.records = std::move(records.items);
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const CheckRecord& a, const CheckRecord& b) { return a.check < b.check; });
  return report;
}

}  // namespace sobscale::cli
