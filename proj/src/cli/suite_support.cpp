#include "suite_support.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstdio>

#include "sobscale/rng.hpp"
#include "sobscale/simd/kernels.hpp"

namespace sobscale::cli::detail {

Weight ParametricWeight::weight() const { return r == 0.0 ? Weight::power(s) : Weight::power_log(s, r); }

const std::vector<ParametricWeight>& parametric_family() {
  static const std::vector<ParametricWeight> family = [] {
    std::vector<ParametricWeight> out;
    for (double s : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      for (double r : {-1.0, 0.0, 1.0}) out.push_back({s, r});
    }
    return out;
  }();
  return family;
}

std::vector<NamedWeight> parametric_weights() {
  std::vector<NamedWeight> out;
  for (const auto& p : parametric_family()) out.emplace_back(p.weight(), to_json(p.weight()));
  return out;
}

std::vector<NamedWeight> norm_family() {
  std::vector<NamedWeight> out;
  for (const Weight& w : {Weight::power(0.0), Weight::power(1.0), Weight::power_log(1.0, 1.0)}) {
    out.emplace_back(w, to_json(w));
  }
  return out;
}

double analytic_ro_constant(double s, double r, double a) {
  // log ratio = s y + r log(1 + y / x), y = ln lambda, x = 1 + ln t >= 1;
  // monotone in x, so the extremes sit at x = 1 and x -> infinity
  double best = 0.0;
  const int steps = 20000;
  for (int i = 0; i <= steps; ++i) {
    const double y = std::log(a) * i / steps;
    best = std::max({best, std::abs(s * y), std::abs(s * y + r * std::log1p(y))});
  }
  return std::exp(best);
}

Weight parse_weight(const Json& j) {
  try {
    return weight_from_json(j);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad weight spec: ") + e.what());
  }
}

Symbol parse_symbol(const Json& j, int dim) {
  try {
    return symbol_from_json(j, dim);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad symbol spec: ") + e.what());
  }
}

std::vector<NamedWeight> weight_list(const Json& section, const char* key, std::vector<NamedWeight> fallback) {
  if (!section.contains(key)) return fallback;
  std::vector<NamedWeight> out;
  for (const auto& j : section.at(key)) out.emplace_back(parse_weight(j), j);
  if (out.empty()) throw UsageError(std::string("empty weight list \"") + key + "\"");
  return out;
}

Grid grid_setting(const Json& section, int n, int N, double L) {
  try {
    return Grid::make(section.value("n", n), section.value("N", N), section.value("L", L));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("bad grid: ") + e.what());
  }
}

std::string index_tag(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return buf;
}

std::vector<double> log_samples(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return out;
}

HilbertPair random_pair(int dim, Rng& rng) {
  const MatrixC g0 = random_spd(dim, 0.5, 2.0, rng);
  const MatrixC r = hermitian_sqrt(g0);
  MatrixC g1 = r * random_spd(dim, 1.0, 50.0, rng) * r;
  g1 = 0.5 * (g1 + g1.adjoint());
  return HilbertPair(g0, g1);
}

Json environment_stamp() {
  return Json{{"library", "sobscale 0.1.0"},
              {"compiler", __VERSION__},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"simd", std::string(simd::isa_name(simd::active_isa()))}};
}

}  // namespace sobscale::cli::detail
