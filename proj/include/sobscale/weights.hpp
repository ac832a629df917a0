#pragma once

// RO-varying weights phi: [1, inf) -> (0, inf), interpolation parameters
// psi: (0, inf) -> (0, inf), and the formulas that convert between them.
//
// Weights and parameters are immutable handles onto shared expression
// nodes; copying is cheap and every evaluation is a pure function.

#include <memory>
#include <string>
#include <vector>

namespace sobscale {

namespace detail {
struct WeightNode;
struct ParamNode;
}  // namespace detail

struct Knot {
  double t;
  double value;
};

class InterpParameter;

class Weight {
 public:
  enum class Kind {
    power,
    power_log,
    power_log_log,
    tabulated,
    product,
    reciprocal,
    shifted,
    from_parameter,
    quadratic,
  };

  /// t^s
  static Weight power(double s);
  /// t^s (1 + ln t)^r
  static Weight power_log(double s, double r);
  /// t^s (1 + ln t)^r (1 + ln(1 + ln t))^q
  static Weight power_log_log(double s, double r, double q);
  /// Log-log linear interpolation between knots; first knot at t = 1,
  /// power-law tail with `tail_exponent` past the last knot.
  static Weight tabulated(std::vector<Knot> knots, double tail_exponent);
  static Weight product(const Weight& left, const Weight& right);
  /// 1 / inner
  static Weight reciprocal(const Weight& inner);
  /// t^{-m} inner(t)
  static Weight shifted(const Weight& inner, double m);
  /// t^{s0} psi(t^{s1 - s0})
  static Weight from_parameter(const InterpParameter& psi, double s0, double s1);
  /// phi0(t) psi(phi1(t) / phi0(t))
  static Weight quadratic(const Weight& phi0, const Weight& phi1, const InterpParameter& psi);

  /// phi(t); throws std::domain_error for t < 1.
  double operator()(double t) const;
  /// ln phi(e^x) for x = ln t >= 0. Usable far beyond the range of double t.
  double log_at(double x) const;

  Kind kind() const;
  std::string describe() const;
  const detail::WeightNode& node() const { return *node_; }

 private:
  explicit Weight(std::shared_ptr<const detail::WeightNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::WeightNode> node_;
};

class InterpParameter {
 public:
  enum class Kind { power, from_weight, tabulated, quadratic, dual };

  /// tau^theta with theta in [0, 1].
  static InterpParameter power_theta(double theta);
  /// tau^p for any real p (class-B functions that are not necessarily
  /// interpolation parameters, e.g. reiteration endpoints).
  static InterpParameter power(double exponent);
  /// tau^{-s0/(s1-s0)} phi(tau^{1/(s1-s0)}) for tau >= 1, phi(1) below.
  static InterpParameter from_weight(const Weight& phi, double s0, double s1);
  /// Log-log interpolation over tau > 0 with power tails on both sides.
  static InterpParameter tabulated(std::vector<Knot> knots, double left_exponent,
                                   double right_exponent);
  /// lambda(tau) psi(eta(tau) / lambda(tau))
  static InterpParameter quadratic(const InterpParameter& lambda, const InterpParameter& eta,
                                   const InterpParameter& psi);
  /// tau / psi(tau)
  static InterpParameter dual(const InterpParameter& psi);

  /// psi(tau); throws std::domain_error for tau <= 0.
  double operator()(double tau) const;
  /// ln psi(e^y) for any real y.
  double log_at(double y) const;

  Kind kind() const;
  std::string describe() const;
  const detail::ParamNode& node() const { return *node_; }

 private:
  explicit InterpParameter(std::shared_ptr<const detail::ParamNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const detail::ParamNode> node_;
};

// ---------------------------------------------------------------------------
// RO certification

struct RoSampling {
  double a = 2.0;
  double t_max = 1e6;
  int lambda_samples = 128;
  int t_samples = 512;
};

struct ROCertificate {
  double a = 0.0;
  double c = 1.0;   // smallest sampled c with c^-1 <= phi(lt)/phi(t) <= c, l in [1, a]
  double s0 = 0.0;  // extreme local growth exponents seen on the same grid
  double s1 = 0.0;
  /// Largest log-excess of c^-1 l^s0 <= phi(lt)/phi(t) <= c l^s1 over all
  /// pairs of t-grid points (l = ratio of the pair, not restricted to [1, a]).
  double max_violation = 0.0;
  bool positive = true;  // false: phi non-positive or non-finite on a sample (c = inf)
  std::string sample_grid;
};

ROCertificate certify_ro(const Weight& w, const RoSampling& sampling = {});

struct IndexSampling {
  double t_max = 1e8;
  /// ln of the largest dilation. Indices converge like ln ln(l) / ln(l), so
  /// the dilation range is given on the log scale.
  double log_lambda_max = 1e5;
  int t_samples = 256;
  int lambda_samples = 32;  // over the last decade [lambda_max / 10, lambda_max]
  double stability_tol = 1e-3;
};

struct MatuszewskaEstimate {
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  /// False when the estimates at lambda_max and lambda_max / 10 differ by
  /// more than the stability tolerance.
  bool stable = true;
};

MatuszewskaEstimate matuszewska_indices(const Weight& w, const IndexSampling& sampling = {});

// ---------------------------------------------------------------------------
// phi <-> psi

/// Throws std::invalid_argument unless s0 < s1.
InterpParameter psi_from_phi(const Weight& phi, double s0, double s1);
/// t^{s0} psi(t^{s1-s0}); a power parameter collapses to a power weight.
Weight phi_from_psi(const InterpParameter& psi, double s0, double s1);
Weight compose_quad(const Weight& phi0, const Weight& phi1, const InterpParameter& psi);

struct PseudoconcavitySampling {
  double tau_max = 1e6;
  int samples = 256;
  double upper = 4.0;   // psi(l tau)/psi(tau) <= upper * max(1, l)
  double lower = 0.25;  // psi(l tau)/psi(tau) >= lower * min(1, l)
};

struct PseudoconcavityResult {
  bool ok = true;
  // Worst pair found (the counterexample when !ok).
  double tau = 1.0;
  double lambda = 1.0;
  double ratio = 1.0;
  double worst_excess = 0.0;  // log-scale violation of the two-sided bound; <= 0 when ok
};

PseudoconcavityResult check_pseudoconcave(const InterpParameter& psi,
                                          const PseudoconcavitySampling& sampling = {});

}  // namespace sobscale
