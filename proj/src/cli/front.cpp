#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sobscale/cli.hpp"
#include "sobscale/rng.hpp"
#include "sobscale/simd/kernels.hpp"
#include "suite_support.hpp"

namespace sobscale::cli {

namespace {

Json record_json(const CheckRecord& r) {
  return Json{{"check", r.check},     {"anchor", r.anchor}, {"inputs", r.inputs},
              {"measured", r.measured}, {"bound", r.bound},   {"pass", r.pass}};
}

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config \"" + path + "\"");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config \"" + path + "\" is not valid JSON: " + e.what());
  }
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad sweep value \"" + item + "\"");
    }
  }
  return out;
}

int integer_value(double v, const char* axis) {
  if (v != std::floor(v) || v < 1 || v > 1 << 20) throw UsageError(std::string(axis) + " values must be positive integers");
  return static_cast<int>(v);
}

// Writes either to the named file or to stdout.
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output \"" + path + "\"");
  write(out);
}

}  // namespace

void write_report(std::ostream& out, const Report& report) {
  const Json header{{"suite", report.suite},
                    {"seed", report.seed},
                    {"environment", report.environment},
                    {"checks", report.records.size()},
                    {"failed", report.failed()}};
  out << header.dump() << '\n';
  for (const auto& r : report.records) out << record_json(r).dump() << '\n';
}

SweepTable emit_sweep(const std::string& axis, const std::vector<double>& values, const Json& config,
                      std::uint64_t seed) {
  if (values.empty()) throw UsageError("sweep: empty axis");
  const Json sec = config.value("sweep", Json::object());
  const Weight phi = sec.contains("phi") ? detail::parse_weight(sec.at("phi")) : Weight::power(1.0);
  const int trials = sec.value("trials", 100);
  const int kmax = sec.value("kmax", 24);
  const double period = sec.value("period", 32.0);
  Rng base(seed, 7);
  SweepTable t;
  if (axis == "N") {
    t.columns = {"N", "charts", "c_low", "c_high"};
    for (double v : values) {
      const int N = integer_value(v, "N");
      if (kmax >= N / 2) throw UsageError("sweep: N must exceed 2 kmax");
      const Model m = Model::line(period, N);
      const Atlas a = build_atlas(m, 4.0, 4.0);
      Rng rng = base.stream(0);
      const auto r = patch_norm_equivalence(a, build_global_atlas(m), phi, trials, kmax, rng);
      t.rows.push_back({N, a.charts().size(), r.c_low, r.c_high});
    }
  } else if (axis == "eps") {
    const int N = sec.value("N", 256);
    t.columns = {"eps", "charts", "cover_order", "c_low", "c_high"};
    for (double eps : values) {
      const Model m = Model::line(period, N);
      Atlas a = [&] {
        try {
          return build_atlas(m, eps, eps);
        } catch (const std::invalid_argument& e) {
          throw UsageError(std::string("sweep: ") + e.what());
        }
      }();
      Rng rng = base.stream(0);
      const auto r = patch_norm_equivalence(a, build_global_atlas(m), phi, trials, kmax, rng);
      t.rows.push_back({eps, a.charts().size(), a.cover_order(), r.c_low, r.c_high});
    }
  } else if (axis == "theta") {
    t.columns = {"theta", "interp_norm", "h0_norm", "h1_norm"};
    Rng rng = base.stream(0);
    const auto pair = detail::random_pair(sec.value("dim", 6), rng);
    const auto op = generating_operator(pair);
    const VectorC u = random_vector(pair.dim(), rng);
    const double n0 = gram_norm(pair.g0(), u);
    const double n1 = gram_norm(pair.g1(), u);
    for (double theta : values) {
      if (theta < 0.0 || theta > 1.0) throw UsageError("sweep: theta must lie in [0, 1]");
      t.rows.push_back({theta, interp_norm(op, InterpParameter::power_theta(theta), u), n0, n1});
    }
  } else if (axis == "s") {
    t.columns = {"s", "diverged", "value", "tail_exponent"};
    for (double s : values) {
      const auto e = embedding_constant(Weight::power(s), 1, 0);
      t.rows.push_back({s, e.diverged, number(e.value), e.tail_exponent});
    }
  } else {
    throw UsageError("unknown sweep axis \"" + axis + "\" (expected N, eps, theta or s)");
  }
  return t;
}

void write_csv(std::ostream& out, const SweepTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << (row[i].is_string() ? row[i].get<std::string>() : row[i].dump());
    }
    out << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& err) {
  CLI::App app{"Numerical checks for extended Sobolev scales on periodic grids and flat atlases"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  std::string isa = "auto";
  std::string axis;
  std::string values;

  std::vector<CLI::App*> suites;
  for (const auto& name : suite_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " checks");
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out_path, "report path (default stdout)");
    sub->add_option("--isa", isa, "kernel variant")->check(CLI::IsMember({"auto", "scalar", "avx2"}));
    suites.push_back(sub);
  }
  auto* sweep = app.add_subcommand("sweep", "tabulate one quantity against a parameter");
  sweep->add_option("--axis", axis, "N, eps, theta or s")->required();
  sweep->add_option("--values", values, "comma-separated axis values")->required();
  sweep->add_option("--config", config_path, "JSON configuration file");
  sweep->add_option("--seed", seed, "random seed");
  sweep->add_option("--out", out_path, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    err << o.str() << e2.str();
    return code == 0 ? 0 : 2;
  }

  try {
    if (isa == "scalar") simd::force_isa(simd::Isa::scalar);
    if (isa == "avx2") simd::force_isa(simd::Isa::avx2);
    const Json config = load_config(config_path);
    if (sweep->parsed()) {
      const auto table = emit_sweep(axis, parse_values(values), config, seed);
      with_output(out_path, [&](std::ostream& o) { write_csv(o, table); });
      return 0;
    }
    for (auto* sub : suites) {
      if (!sub->parsed()) continue;
      const Report report = run_suite(sub->get_name(), config, seed);
      with_output(out_path, [&](std::ostream& o) { write_report(o, report); });
      for (const auto& r : report.records) {
        if (!r.pass) err << "FAIL " << r.check << " " << record_json(r).dump() << '\n';
      }
      return report.failed() == 0 ? 0 : 1;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace sobscale::cli
