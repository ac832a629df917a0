#include "sobscale/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "weights_node.hpp"

namespace sobscale {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Json knots_to_json(const std::vector<Knot>& knots) {
  Json a = Json::array();
  for (const auto& k : knots) a.push_back(Json::array({number(k.t), number(k.value)}));
  return a;
}

std::vector<Knot> knots_from_json(const Json& j) {
  std::vector<Knot> out;
  for (const auto& k : j.at("knots")) out.push_back({number_from(k.at(0)), number_from(k.at(1))});
  return out;
}

const std::string& form_of(const Json& j) {
  if (!j.is_object() || !j.contains("form") || !j.at("form").is_string()) {
    throw std::invalid_argument("expected an object with a string \"form\" field");
  }
  return j.at("form").get_ref<const std::string&>();
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("grid function: truncated payload");
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 |
         std::uint32_t{b[3]} << 24;
}

Json header_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing header line");
  return Json::parse(line);
}

}  // namespace

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("expected a number, got " + j.dump());
}

// ---------------------------------------------------------------------------
// Weights and parameters

Json to_json(const Weight& w) {
  using namespace detail;
  return std::visit(
      overloaded{
          [](const WPower& p) { return Json{{"form", "power"}, {"s", p.s}}; },
          [](const WPowerLog& p) { return Json{{"form", "power_log"}, {"s", p.s}, {"r", p.r}}; },
          [](const WPowerLogLog& p) {
            return Json{{"form", "power_log_log"}, {"s", p.s}, {"r", p.r}, {"q", p.q}};
          },
          [](const WTabulated& p) {
            return Json{{"form", "tabulated"},
                        {"knots", knots_to_json(p.table.knots)},
                        {"tail_exponent", p.tail_exponent}};
          },
          [](const WProduct& p) {
            return Json{{"form", "product"}, {"left", to_json(p.left)}, {"right", to_json(p.right)}};
          },
          [](const WReciprocal& p) { return Json{{"form", "reciprocal"}, {"inner", to_json(p.inner)}}; },
          [](const WShifted& p) {
            return Json{{"form", "shifted"}, {"inner", to_json(p.inner)}, {"m", p.m}};
          },
          [](const WFromParameter& p) {
            return Json{{"form", "from_parameter"}, {"psi", to_json(p.psi)}, {"s0", p.s0}, {"s1", p.s1}};
          },
          [](const WQuadratic& p) {
            return Json{{"form", "quadratic"},
                        {"phi0", to_json(p.phi0)},
                        {"phi1", to_json(p.phi1)},
                        {"psi", to_json(p.psi)}};
          },
      },
      w.node().form);
}

Weight weight_from_json(const Json& j) {
  const auto& f = form_of(j);
  if (f == "power") return Weight::power(j.at("s").get<double>());
  if (f == "power_log") return Weight::power_log(j.at("s").get<double>(), j.at("r").get<double>());
  if (f == "power_log_log") {
    return Weight::power_log_log(j.at("s").get<double>(), j.at("r").get<double>(),
                                 j.at("q").get<double>());
  }
  if (f == "tabulated") return Weight::tabulated(knots_from_json(j), j.at("tail_exponent").get<double>());
  if (f == "product") return Weight::product(weight_from_json(j.at("left")), weight_from_json(j.at("right")));
  if (f == "reciprocal") return Weight::reciprocal(weight_from_json(j.at("inner")));
  if (f == "shifted") return Weight::shifted(weight_from_json(j.at("inner")), j.at("m").get<double>());
  if (f == "from_parameter") {
    return Weight::from_parameter(parameter_from_json(j.at("psi")), j.at("s0").get<double>(),
                                  j.at("s1").get<double>());
  }
  if (f == "quadratic") {
    return Weight::quadratic(weight_from_json(j.at("phi0")), weight_from_json(j.at("phi1")),
                             parameter_from_json(j.at("psi")));
  }
  throw std::invalid_argument("unknown weight form \"" + f + "\"");
}

Json to_json(const InterpParameter& psi) {
  using namespace detail;
  return std::visit(
      overloaded{
          [](const PPower& p) {
            if (p.exponent >= 0.0 && p.exponent <= 1.0) return Json{{"form", "power_theta"}, {"theta", p.exponent}};
            return Json{{"form", "power"}, {"exponent", p.exponent}};
          },
          [](const PFromWeight& p) {
            return Json{{"form", "from_weight"}, {"phi", to_json(p.phi)}, {"s0", p.s0}, {"s1", p.s1}};
          },
          [](const PTabulated& p) {
            return Json{{"form", "tabulated"},
                        {"knots", knots_to_json(p.table.knots)},
                        {"left_exponent", p.left_exponent},
                        {"right_exponent", p.right_exponent}};
          },
          [](const PQuadratic& p) {
            return Json{{"form", "quadratic"},
                        {"lambda", to_json(p.lambda)},
                        {"eta", to_json(p.eta)},
                        {"psi", to_json(p.psi)}};
          },
          [](const PDual& p) { return Json{{"form", "dual"}, {"inner", to_json(p.inner)}}; },
      },
      psi.node().form);
}

InterpParameter parameter_from_json(const Json& j) {
  const auto& f = form_of(j);
  if (f == "power_theta") return InterpParameter::power_theta(j.at("theta").get<double>());
  if (f == "power") return InterpParameter::power(j.at("exponent").get<double>());
  if (f == "from_weight") {
    return InterpParameter::from_weight(weight_from_json(j.at("phi")), j.at("s0").get<double>(),
                                        j.at("s1").get<double>());
  }
  if (f == "tabulated") {
    return InterpParameter::tabulated(knots_from_json(j), j.at("left_exponent").get<double>(),
                                      j.at("right_exponent").get<double>());
  }
  if (f == "quadratic") {
    return InterpParameter::quadratic(parameter_from_json(j.at("lambda")),
                                      parameter_from_json(j.at("eta")),
                                      parameter_from_json(j.at("psi")));
  }
  if (f == "dual") return InterpParameter::dual(parameter_from_json(j.at("inner")));
  throw std::invalid_argument("unknown parameter form \"" + f + "\"");
}

Json to_json(const ROCertificate& c) {
  return Json{{"a", number(c.a)},
              {"c", number(c.c)},
              {"s0", number(c.s0)},
              {"s1", number(c.s1)},
              {"max_violation", number(c.max_violation)},
              {"positive", c.positive},
              {"sample_grid", c.sample_grid}};
}

Json to_json(const MatuszewskaEstimate& m) {
  return Json{{"sigma0", number(m.sigma0)}, {"sigma1", number(m.sigma1)}, {"stable", m.stable}};
}

// ---------------------------------------------------------------------------
// Matrices, grids, atlases, symbols

Json gram_to_json(const MatrixC& g) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < g.cols(); ++k) row.push_back(Json::array({g(i, k).real(), g(i, k).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixC gram_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("Gram matrix must be a non-empty array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  MatrixC g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("ragged Gram matrix");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& e = row.at(static_cast<std::size_t>(k));
      g(i, k) = e.is_array() ? cplx(e.at(0).get<double>(), e.at(1).get<double>()) : cplx(e.get<double>(), 0.0);
    }
  }
  return g;
}

Json to_json(const Grid& g) {
  Json L;
  if (g.isotropic()) {
    L = g.L[0];
  } else {
    L = Json::array();
    for (int a = 0; a < g.n; ++a) L.push_back(g.L[static_cast<std::size_t>(a)]);
  }
  return Json{{"n", g.n}, {"N", g.N}, {"L", L}};
}

Grid grid_from_json(const Json& j) {
  const int n = j.at("n").get<int>();
  const int N = j.at("N").get<int>();
  const auto& L = j.at("L");
  if (L.is_number()) return Grid::make(n, N, L.get<double>());
  std::array<double, 3> l{};
  if (static_cast<int>(L.size()) != n) throw std::invalid_argument("grid L must have n entries");
  for (int a = 0; a < n; ++a) l[static_cast<std::size_t>(a)] = L.at(static_cast<std::size_t>(a)).get<double>();
  return Grid::make(n, N, l);
}

Json to_json(const Model& m) {
  if (m.kind == Model::Kind::line) return Json{{"kind", "line"}, {"period", m.period_x}, {"N", m.N}};
  return Json{{"kind", "cylinder"}, {"period_x", m.period_x}, {"circumference", m.circumference}, {"N", m.N}};
}

Model model_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "line") return Model::line(j.at("period").get<double>(), j.at("N").get<int>());
  if (kind == "cylinder") {
    return Model::cylinder(j.at("period_x").get<double>(), j.at("circumference").get<double>(),
                           j.at("N").get<int>());
  }
  throw std::invalid_argument("unknown model kind \"" + kind + "\"");
}

Json describe_atlas(const Atlas& atlas, const TransitionCertificate* cert) {
  Json centers = Json::array();
  for (const auto& c : atlas.charts()) {
    Json p = Json::array();
    for (int a = 0; a < atlas.model().dim(); ++a) p.push_back(c.center[static_cast<std::size_t>(a)]);
    centers.push_back(std::move(p));
  }
  Json bounds = Json::array();
  for (double v : atlas.derivative_bounds()) bounds.push_back(number(v));
  Json out{{"model", to_json(atlas.model())},
           {"global", atlas.global()},
           {"epsilon", atlas.epsilon()},
           {"spacing", atlas.spacing()},
           {"sharpness", atlas.sharpness()},
           {"charts", atlas.charts().size()},
           {"centers", centers},
           {"cover_order", atlas.cover_order()},
           {"patch_grid", to_json(atlas.patch_grid())},
           {"bump_derivative_bounds", bounds}};
  if (cert != nullptr) {
    Json mx = Json::array();
    Json mn = Json::array();
    for (int m = 0; m <= cert->order; ++m) {
      mx.push_back(number(cert->max_by_order[static_cast<std::size_t>(m)]));
      mn.push_back(number(cert->min_by_order[static_cast<std::size_t>(m)]));
    }
    out["transition_certificate"] = Json{{"order", cert->order},
                                         {"pairs_checked", cert->pairs_checked},
                                         {"max_by_order", mx},
                                         {"min_by_order", mn},
                                         {"jacobian_identity_error", number(cert->jacobian_identity_error)}};
  }
  return out;
}

Json to_json(const Symbol& s) {
  Json out{{"order", s.order()}};
  if (s.properness_radius()) out["properness_radius"] = *s.properness_radius();
  switch (s.form()) {
    case Symbol::Form::general: out["expr"] = s.expr()->text(); break;
    case Symbol::Form::multiplier: out["multiplier"] = to_json(*s.weight()); break;
    case Symbol::Form::separable:
      out["separable"] = to_json(*s.weight());
      out["chi_grid"] = to_json(s.chi()->grid);
      break;
  }
  return out;
}

Symbol symbol_from_json(const Json& j, int dim) {
  const double order = j.at("order").get<double>();
  Symbol s = [&] {
    if (j.contains("expr")) return Symbol::general(j.at("expr").get<std::string>(), order, dim);
    if (j.contains("multiplier")) return Symbol::multiplier(weight_from_json(j.at("multiplier")), order);
    throw std::invalid_argument("symbol needs \"expr\" or \"multiplier\"");
  }();
  if (j.contains("properness_radius")) s = s.with_properness_radius(j.at("properness_radius").get<double>());
  return s;
}

// ---------------------------------------------------------------------------
// Binary grid functions

void write_grid_function(std::ostream& out, const GridFunction& u) {
  out << to_json(u.grid).dump() << '\n';
  for (const auto& z : u.values) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.real())));
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.imag())));
  }
  if (!out) throw std::runtime_error("grid function: write failed");
}

GridFunction read_grid_function(std::istream& in) {
  const Grid g = grid_from_json(header_line(in));
  GridFunction u(g);
  for (auto& z : u.values) {
    const float re = std::bit_cast<float>(get_u32(in));
    const float im = std::bit_cast<float>(get_u32(in));
    z = cplx(re, im);
  }
  return u;
}

void write_patch_vector(std::ostream& out, const PatchVector& v) {
  if (v.chart_ids.size() != v.entries.size()) throw std::invalid_argument("patch vector: id count mismatch");
  out << Json{{"format", "patch_vector"}, {"count", v.entries.size()}, {"charts", v.chart_ids}}.dump() << '\n';
  for (const auto& e : v.entries) write_grid_function(out, e);
}

PatchVector read_patch_vector(std::istream& in) {
  const Json h = header_line(in);
  if (h.value("format", "") != "patch_vector") throw std::runtime_error("not a patch vector stream");
  PatchVector v;
  v.chart_ids = h.at("charts").get<std::vector<int>>();
  const auto count = h.at("count").get<std::size_t>();
  if (count != v.chart_ids.size()) throw std::runtime_error("patch vector: header count mismatch");
  for (std::size_t i = 0; i < count; ++i) v.entries.push_back(read_grid_function(in));
  return v;
}

}  // namespace sobscale
