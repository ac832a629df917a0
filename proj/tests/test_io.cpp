#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "sobscale/io.hpp"
#include "sobscale/rng.hpp"

using namespace sobscale;

namespace {

void check_weight_roundtrip(const Weight& w) {
  const Json j = to_json(w);
  const Weight back = weight_from_json(Json::parse(j.dump()));
  CHECK(to_json(back) == j);
  for (double t : {1.0, 1.7, 10.0, 1e3, 1e6}) CHECK(back(t) == doctest::Approx(w(t)).epsilon(1e-12));
}

}  // namespace

TEST_CASE("non-finite numbers") {
  CHECK(number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::isnan(number_from(number(std::nan("")))));
  CHECK(number_from(number(2.5)) == 2.5);
  CHECK(std::isinf(number_from(Json("inf"))));
}

TEST_CASE("weight round trips") {
  check_weight_roundtrip(Weight::power(1.5));
  check_weight_roundtrip(Weight::power_log(0.5, -1.0));
  check_weight_roundtrip(Weight::power_log_log(1.0, 0.5, 2.0));
  check_weight_roundtrip(Weight::tabulated({{1.0, 1.0}, {2.0, 3.0}, {4.0, 5.0}}, 0.5));
  check_weight_roundtrip(Weight::product(Weight::power(1.0), Weight::power_log(0.0, 1.0)));
  check_weight_roundtrip(Weight::reciprocal(Weight::power_log(1.0, 1.0)));
  check_weight_roundtrip(Weight::shifted(Weight::power(2.0), 0.5));
  check_weight_roundtrip(Weight::from_parameter(InterpParameter::power_theta(0.3), -1.0, 2.0));
  CHECK_THROWS_AS(weight_from_json(Json{{"form", "nope"}}), std::invalid_argument);
  CHECK_THROWS(weight_from_json(Json{{"s", 1.0}}));
}

TEST_CASE("parameter round trips") {
  for (const auto& p : {InterpParameter::power_theta(0.25), InterpParameter::power(1.5),
                        InterpParameter::dual(InterpParameter::power_theta(0.7)),
                        InterpParameter::quadratic(InterpParameter::power(0.2), InterpParameter::power(0.8),
                                                   InterpParameter::power_theta(0.5)),
                        InterpParameter::from_weight(Weight::power_log(0.5, 1.0), 0.0, 1.0)}) {
    const Json j = to_json(p);
    const auto back = parameter_from_json(Json::parse(j.dump()));
    CHECK(to_json(back) == j);
    for (double tau : {0.01, 1.0, 3.0, 1e4}) CHECK(back(tau) == doctest::Approx(p(tau)).epsilon(1e-12));
  }
}

TEST_CASE("gram round trip") {
  Rng rng(1);
  const MatrixC g = random_spd(5, 1.0, 10.0, rng);
  CHECK((gram_from_json(Json::parse(gram_to_json(g).dump())) - g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("grid and model round trips") {
  const Grid g = Grid::make(2, 16, {3.0, 4.0, 0.0});
  CHECK(grid_from_json(to_json(g)) == g);
  CHECK(to_json(Grid::make(1, 8, 2.0)).at("L").is_number());
  for (const Model& m : {Model::line(32.0, 256), Model::cylinder(16.0, 12.0, 64)}) {
    const Model back = model_from_json(to_json(m));
    CHECK(to_json(back) == to_json(m));
  }
}

TEST_CASE("atlas description") {
  const Atlas a = build_atlas(Model::line(32.0, 256), 4.0, 4.0);
  const auto cert = certify_bounded_geometry(a, 2);
  const Json j = describe_atlas(a, &cert);
  CHECK(j.at("charts") == 8);
  CHECK(j.at("centers").size() == 8);
  CHECK(j.contains("transition_certificate"));
  CHECK_FALSE(describe_atlas(a).contains("transition_certificate"));
}

TEST_CASE("symbol round trips") {
  const Symbol g = Symbol::general("(2 + cos(x)) * jb(xi)^2", 2, 1).with_properness_radius(1.5);
  const Symbol back = symbol_from_json(Json::parse(to_json(g).dump()), 1);
  CHECK(back.expr()->text() == g.expr()->text());
  CHECK(back.order() == 2);
  CHECK(*back.properness_radius() == 1.5);
  const Symbol m = Symbol::multiplier(Weight::power(1.0), 1);
  const Symbol mb = symbol_from_json(to_json(m), 1);
  CHECK(mb.form() == Symbol::Form::multiplier);
  CHECK(mb.eval({}, {3.0, 0, 0}) == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("grid function binary format") {
  Rng rng(2);
  const Grid g = Grid::make(2, 8, {1.0, 2.0, 0.0});
  const auto u = random_grid_function(g, rng);
  std::stringstream ss;
  write_grid_function(ss, u);
  const std::string blob = ss.str();
  const auto nl = blob.find('\n');
  REQUIRE(nl != std::string::npos);
  CHECK(blob.size() - nl - 1 == g.size() * 8);
  const auto back = read_grid_function(ss);
  CHECK(back.grid == g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(back.values[i].real() == static_cast<float>(u.values[i].real()));
    CHECK(back.values[i].imag() == static_cast<float>(u.values[i].imag()));
  }
  std::stringstream truncated(blob.substr(0, blob.size() - 3));
  CHECK_THROWS(read_grid_function(truncated));
}

TEST_CASE("patch vector binary format") {
  const Atlas a = build_atlas(Model::line(32.0, 256), 4.0, 4.0);
  Rng rng(3);
  const auto loc = localize_F(a, random_grid_function(a.grid(), rng), Weight::power(0.0));
  std::stringstream ss;
  write_patch_vector(ss, loc.patches);
  const auto back = read_patch_vector(ss);
  CHECK(back.chart_ids == loc.patches.chart_ids);
  REQUIRE(back.entries.size() == loc.patches.entries.size());
  for (std::size_t j = 0; j < back.entries.size(); ++j) {
    CHECK(back.entries[j].grid == loc.patches.entries[j].grid);
    for (std::size_t i = 0; i < back.entries[j].values.size(); ++i) {
      CHECK(std::abs(back.entries[j].values[i] - loc.patches.entries[j].values[i]) <=
            1e-6 * (1 + std::abs(loc.patches.entries[j].values[i])));
    }
  }
}
