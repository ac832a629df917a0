#include "sobscale/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "weights_node.hpp"

namespace sobscale {

using namespace detail;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

LogTable make_table(std::vector<Knot> knots) {
  if (knots.empty()) throw std::invalid_argument("tabulated function needs at least one knot");
  LogTable table;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const auto& k = knots[i];
    if (!(k.t > 0.0) || !std::isfinite(k.t) || !(k.value > 0.0) || !std::isfinite(k.value)) {
      throw std::invalid_argument("tabulated knots need finite positive abscissae and values");
    }
    if (i > 0 && !(k.t > knots[i - 1].t)) {
      throw std::invalid_argument("tabulated knots must be strictly increasing");
    }
    table.log_t.push_back(std::log(k.t));
    table.log_v.push_back(std::log(k.value));
  }
  table.knots = std::move(knots);
  return table;
}

// Piecewise-linear interpolation on the log-log scale with power tails.
double table_log_at(const LogTable& table, double y, double left_exponent,
                    double right_exponent) {
  const auto& xs = table.log_t;
  const auto& vs = table.log_v;
  if (y <= xs.front()) return vs.front() + left_exponent * (y - xs.front());
  if (y >= xs.back()) return vs.back() + right_exponent * (y - xs.back());
  const auto it = std::upper_bound(xs.begin(), xs.end(), y);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double f = (y - xs[lo]) / (xs[hi] - xs[lo]);
  return vs[lo] + f * (vs[hi] - vs[lo]);
}

void require_increasing(double s0, double s1) {
  if (!(s0 < s1)) throw std::invalid_argument("need s0 < s1");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Weight

Weight Weight::power(double s) {
  return Weight(std::make_shared<const WeightNode>(WeightNode{WPower{s}}));
}

Weight Weight::power_log(double s, double r) {
  return Weight(std::make_shared<const WeightNode>(WeightNode{WPowerLog{s, r}}));
}

Weight Weight::power_log_log(double s, double r, double q) {
  return Weight(std::make_shared<const WeightNode>(WeightNode{WPowerLogLog{s, r, q}}));
}

Weight Weight::tabulated(std::vector<Knot> knots, double tail_exponent) {
  if (knots.empty() || knots.front().t != 1.0) {
    throw std::invalid_argument("tabulated weight must start with a knot at t = 1");
  }
  return Weight(std::make_shared<const WeightNode>(
      WeightNode{WTabulated{make_table(std::move(knots)), tail_exponent}}));
}

Weight Weight::product(const Weight& left, const Weight& right) {
  return Weight(std::make_shared<const WeightNode>(WeightNode{WProduct{left, right}}));
}

Weight Weight::reciprocal(const Weight& inner) {
  return Weight(std::make_shared<const WeightNode>(WeightNode{WReciprocal{inner}}));
}

Weight Weight::shifted(const Weight& inner, double m) {
  return Weight(std::make_shared<const WeightNode>(WeightNode{WShifted{inner, m}}));
}

Weight Weight::from_parameter(const InterpParameter& psi, double s0, double s1) {
  require_increasing(s0, s1);
  return Weight(std::make_shared<const WeightNode>(WeightNode{WFromParameter{psi, s0, s1}}));
}

Weight Weight::quadratic(const Weight& phi0, const Weight& phi1, const InterpParameter& psi) {
  return Weight(std::make_shared<const WeightNode>(WeightNode{WQuadratic{phi0, phi1, psi}}));
}

double Weight::operator()(double t) const {
  if (!(t >= 1.0)) throw std::domain_error("weight evaluated below t = 1");
  return std::visit(
      overloaded{
          [&](const WPower& p) { return p.s == 0.0 ? 1.0 : std::pow(t, p.s); },
          [&](const WPowerLog& p) { return std::pow(t, p.s) * std::pow(1.0 + std::log(t), p.r); },
          [&](const WPowerLogLog& p) {
            const double l = 1.0 + std::log(t);
            return std::pow(t, p.s) * std::pow(l, p.r) * std::pow(1.0 + std::log(l), p.q);
          },
          [&](const WTabulated& p) {
            return std::exp(table_log_at(p.table, std::log(t), 0.0, p.tail_exponent));
          },
          [&](const WProduct& p) { return p.left(t) * p.right(t); },
          [&](const WReciprocal& p) { return 1.0 / p.inner(t); },
          [&](const WShifted& p) { return std::pow(t, -p.m) * p.inner(t); },
          [&](const WFromParameter& p) {
            return std::pow(t, p.s0) * p.psi(std::pow(t, p.s1 - p.s0));
          },
          [&](const WQuadratic& p) {
            const double base = p.phi0(t);
            return base * p.psi(p.phi1(t) / base);
          },
      },
      node_->form);
}

double Weight::log_at(double x) const {
  if (!(x >= 0.0)) throw std::domain_error("weight evaluated below t = 1");
  return std::visit(
      overloaded{
          [&](const WPower& p) { return p.s * x; },
          [&](const WPowerLog& p) { return p.s * x + p.r * std::log1p(x); },
          [&](const WPowerLogLog& p) {
            return p.s * x + p.r * std::log1p(x) + p.q * std::log1p(std::log1p(x));
          },
          [&](const WTabulated& p) { return table_log_at(p.table, x, 0.0, p.tail_exponent); },
          [&](const WProduct& p) { return p.left.log_at(x) + p.right.log_at(x); },
          [&](const WReciprocal& p) { return -p.inner.log_at(x); },
          [&](const WShifted& p) { return -p.m * x + p.inner.log_at(x); },
          [&](const WFromParameter& p) { return p.s0 * x + p.psi.log_at((p.s1 - p.s0) * x); },
          [&](const WQuadratic& p) {
            const double base = p.phi0.log_at(x);
            return base + p.psi.log_at(p.phi1.log_at(x) - base);
          },
      },
      node_->form);
}

Weight::Kind Weight::kind() const { return static_cast<Kind>(node_->form.index()); }

std::string Weight::describe() const {
  return std::visit(
      overloaded{
          [](const WPower& p) { return "t^" + fmt(p.s); },
          [](const WPowerLog& p) { return "t^" + fmt(p.s) + "(1+ln t)^" + fmt(p.r); },
          [](const WPowerLogLog& p) {
            return "t^" + fmt(p.s) + "(1+ln t)^" + fmt(p.r) + "(1+ln(1+ln t))^" + fmt(p.q);
          },
          [](const WTabulated& p) {
            return "tabulated[" + std::to_string(p.table.knots.size()) + " knots, tail " +
                   fmt(p.tail_exponent) + "]";
          },
          [](const WProduct& p) { return "(" + p.left.describe() + ")*(" + p.right.describe() + ")"; },
          [](const WReciprocal& p) { return "1/(" + p.inner.describe() + ")"; },
          [](const WShifted& p) { return "t^" + fmt(-p.m) + "*(" + p.inner.describe() + ")"; },
          [](const WFromParameter& p) {
            return "t^" + fmt(p.s0) + "*psi(t^" + fmt(p.s1 - p.s0) + "), psi=" + p.psi.describe();
          },
          [](const WQuadratic& p) {
            return "phi0*psi(phi1/phi0), phi0=" + p.phi0.describe() + ", phi1=" +
                   p.phi1.describe() + ", psi=" + p.psi.describe();
          },
      },
      node_->form);
}

// ---------------------------------------------------------------------------
// InterpParameter

InterpParameter InterpParameter::power_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0, 1]");
  return power(theta);
}

InterpParameter InterpParameter::power(double exponent) {
  return InterpParameter(std::make_shared<const ParamNode>(ParamNode{PPower{exponent}}));
}

InterpParameter InterpParameter::from_weight(const Weight& phi, double s0, double s1) {
  require_increasing(s0, s1);
  return InterpParameter(std::make_shared<const ParamNode>(ParamNode{PFromWeight{phi, s0, s1}}));
}

InterpParameter InterpParameter::tabulated(std::vector<Knot> knots, double left_exponent,
                                           double right_exponent) {
  return InterpParameter(std::make_shared<const ParamNode>(
      ParamNode{PTabulated{make_table(std::move(knots)), left_exponent, right_exponent}}));
}

InterpParameter InterpParameter::quadratic(const InterpParameter& lambda,
                                           const InterpParameter& eta,
                                           const InterpParameter& psi) {
  return InterpParameter(
      std::make_shared<const ParamNode>(ParamNode{PQuadratic{lambda, eta, psi}}));
}

InterpParameter InterpParameter::dual(const InterpParameter& psi) {
  return InterpParameter(std::make_shared<const ParamNode>(ParamNode{PDual{psi}}));
}

double InterpParameter::operator()(double tau) const {
  if (!(tau > 0.0)) throw std::domain_error("interpolation parameter evaluated at tau <= 0");
  return std::visit(
      overloaded{
          [&](const PPower& p) { return p.exponent == 0.0 ? 1.0 : std::pow(tau, p.exponent); },
          [&](const PFromWeight& p) {
            if (tau < 1.0) return p.phi(1.0);
            const double span = p.s1 - p.s0;
            return std::pow(tau, -p.s0 / span) * p.phi(std::pow(tau, 1.0 / span));
          },
          [&](const PTabulated& p) {
            return std::exp(
                table_log_at(p.table, std::log(tau), p.left_exponent, p.right_exponent));
          },
          [&](const PQuadratic& p) {
            const double base = p.lambda(tau);
            return base * p.psi(p.eta(tau) / base);
          },
          [&](const PDual& p) { return tau / p.inner(tau); },
      },
      node_->form);
}

double InterpParameter::log_at(double y) const {
  return std::visit(
      overloaded{
          [&](const PPower& p) { return p.exponent * y; },
          [&](const PFromWeight& p) {
            if (y < 0.0) return p.phi.log_at(0.0);
            const double span = p.s1 - p.s0;
            return -p.s0 / span * y + p.phi.log_at(y / span);
          },
          [&](const PTabulated& p) {
            return table_log_at(p.table, y, p.left_exponent, p.right_exponent);
          },
          [&](const PQuadratic& p) {
            const double base = p.lambda.log_at(y);
            return base + p.psi.log_at(p.eta.log_at(y) - base);
          },
          [&](const PDual& p) { return y - p.inner.log_at(y); },
      },
      node_->form);
}

InterpParameter::Kind InterpParameter::kind() const {
  return static_cast<Kind>(node_->form.index());
}

std::string InterpParameter::describe() const {
  return std::visit(
      overloaded{
          [](const PPower& p) { return "tau^" + fmt(p.exponent); },
          [](const PFromWeight& p) {
            return "from_weight(" + p.phi.describe() + ", s0=" + fmt(p.s0) + ", s1=" + fmt(p.s1) +
                   ")";
          },
          [](const PTabulated& p) {
            return "tabulated[" + std::to_string(p.table.knots.size()) + " knots]";
          },
          [](const PQuadratic& p) {
            return "lambda*psi(eta/lambda), lambda=" + p.lambda.describe() +
                   ", eta=" + p.eta.describe() + ", psi=" + p.psi.describe();
          },
          [](const PDual& p) { return "tau/(" + p.inner.describe() + ")"; },
      },
      node_->form);
}

// ---------------------------------------------------------------------------
// RO certification and Matuszewska indices

namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        (i == count - 1) ? hi : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return out;
}

}  // namespace

ROCertificate certify_ro(const Weight& w, const RoSampling& sampling) {
  if (!(sampling.a > 1.0)) throw std::invalid_argument("certify_ro: need a > 1");
  if (!(sampling.t_max > sampling.a)) throw std::invalid_argument("certify_ro: need t_max > a");
  if (sampling.t_samples < 2 || sampling.lambda_samples < 2) {
    throw std::invalid_argument("certify_ro: need at least two samples per axis");
  }

  ROCertificate cert;
  cert.a = sampling.a;
  std::ostringstream grid;
  grid << "t: log-uniform [1, " << sampling.t_max << "] x " << sampling.t_samples
       << "; lambda: log-uniform [1, " << sampling.a << "] x " << sampling.lambda_samples
       << "; two-sided power bound over all t-grid pairs";
  cert.sample_grid = grid.str();

  // Everything happens on the log scale, so t_max may exceed double range of t.
  const auto xs = linspace(0.0, std::log(sampling.t_max), sampling.t_samples);
  const auto ls = linspace(0.0, std::log(sampling.a), sampling.lambda_samples);

  std::vector<double> base(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) base[i] = w.log_at(xs[i]);

  double log_c = 0.0;
  double s0 = std::numeric_limits<double>::infinity();
  double s1 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ls.size(); ++j) {
      const double lr = w.log_at(xs[i] + ls[j]) - base[i];
      if (!std::isfinite(lr) || !std::isfinite(base[i])) {
        cert.positive = false;
        cert.c = std::numeric_limits<double>::infinity();
        return cert;
      }
      log_c = std::max(log_c, std::abs(lr));
      if (ls[j] > 0.0) {
        const double slope = lr / ls[j];
        s0 = std::min(s0, slope);
        s1 = std::max(s1, slope);
      }
    }
  }
  cert.c = std::exp(log_c);
  cert.s0 = s0;
  cert.s1 = s1;

  double violation = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t k = i + 1; k < xs.size(); ++k) {
      const double ll = xs[k] - xs[i];
      const double lr = base[k] - base[i];
      violation = std::max({violation, lr - log_c - s1 * ll, s0 * ll - log_c - lr});
    }
  }
  cert.max_violation = violation;
  return cert;
}

MatuszewskaEstimate matuszewska_indices(const Weight& w, const IndexSampling& sampling) {
  const double top = sampling.log_lambda_max;
  const double decade = std::log(10.0);
  if (!(top > decade)) throw std::invalid_argument("matuszewska_indices: need lambda_max > 10");
  if (sampling.t_samples < 1 || sampling.lambda_samples < 2) {
    throw std::invalid_argument("matuszewska_indices: sample counts too small");
  }

  const auto xs = linspace(0.0, std::log(sampling.t_max), sampling.t_samples);
  const auto ls = linspace(top - decade, top, sampling.lambda_samples);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double lo_bottom = lo, hi_bottom = hi, lo_top = lo, hi_top = hi;
  for (double x : xs) {
    const double base = w.log_at(x);
    for (std::size_t j = 0; j < ls.size(); ++j) {
      const double slope = (w.log_at(x + ls[j]) - base) / ls[j];
      lo = std::min(lo, slope);
      hi = std::max(hi, slope);
      if (j == 0) {
        lo_bottom = std::min(lo_bottom, slope);
        hi_bottom = std::max(hi_bottom, slope);
      }
      if (j + 1 == ls.size()) {
        lo_top = std::min(lo_top, slope);
        hi_top = std::max(hi_top, slope);
      }
    }
  }
  MatuszewskaEstimate est;
  est.sigma0 = lo;
  est.sigma1 = hi;
  est.stable = std::abs(lo_top - lo_bottom) <= sampling.stability_tol &&
               std::abs(hi_top - hi_bottom) <= sampling.stability_tol;
  return est;
}

// ---------------------------------------------------------------------------
// phi <-> psi

InterpParameter psi_from_phi(const Weight& phi, double s0, double s1) {
  return InterpParameter::from_weight(phi, s0, s1);
}

Weight phi_from_psi(const InterpParameter& psi, double s0, double s1) {
  require_increasing(s0, s1);
  if (const auto* p = std::get_if<PPower>(&psi.node().form)) {
    return Weight::power((1.0 - p->exponent) * s0 + p->exponent * s1);
  }
  return Weight::from_parameter(psi, s0, s1);
}

Weight compose_quad(const Weight& phi0, const Weight& phi1, const InterpParameter& psi) {
  return Weight::quadratic(phi0, phi1, psi);
}

PseudoconcavityResult check_pseudoconcave(const InterpParameter& psi,
                                          const PseudoconcavitySampling& sampling) {
  if (!(sampling.tau_max > 1.0)) throw std::invalid_argument("check_pseudoconcave: tau_max <= 1");
  const auto ys = linspace(0.0, std::log(sampling.tau_max), std::max(sampling.samples, 2));
  std::vector<double> vals(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) vals[i] = psi.log_at(ys[i]);

  const double log_upper = std::log(sampling.upper);
  const double log_lower = std::log(sampling.lower);
  PseudoconcavityResult res;
  res.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const double ll = ys[k] - ys[i];
      const double lr = vals[k] - vals[i];
      const double excess =
          std::max(lr - log_upper - std::max(0.0, ll), log_lower + std::min(0.0, ll) - lr);
      if (excess > res.worst_excess) {
        res.worst_excess = excess;
        res.tau = std::exp(ys[i]);
        res.lambda = std::exp(ll);
        res.ratio = std::exp(lr);
      }
    }
  }
  res.ok = res.worst_excess <= 0.0;
  return res;
}

}  // namespace sobscale
