#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sobscale/cli.hpp"

namespace sobscale::cli::detail {

struct Records {
  std::vector<CheckRecord> items;
  void add(CheckRecord r) { items.push_back(std::move(r)); }
};

/// t^s (1 + ln t)^r
struct ParametricWeight {
  double s;
  double r;
  Weight weight() const;
};

/// s in {-2, ..., 2}, r in {-1, 0, 1}
const std::vector<ParametricWeight>& parametric_family();
using NamedWeight = std::pair<Weight, Json>;
std::vector<NamedWeight> parametric_weights();
/// t^0, t^1, t (1 + ln t)
std::vector<NamedWeight> norm_family();

/// sup over lambda in [1, a] and t >= 1 of the two-sided ratio bound for
/// t^s (1 + ln t)^r, attained at t = 1 or t -> infinity.
double analytic_ro_constant(double s, double r, double a);

Weight parse_weight(const Json& j);
Symbol parse_symbol(const Json& j, int dim);
std::vector<NamedWeight> weight_list(const Json& section, const char* key, std::vector<NamedWeight> fallback);
Grid grid_setting(const Json& section, int n, int N, double L);

std::string index_tag(std::size_t i);
std::vector<double> log_samples(double lo, double hi, int count);
HilbertPair random_pair(int dim, Rng& rng);
Json environment_stamp();

}  // namespace sobscale::cli::detail
